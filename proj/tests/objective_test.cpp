#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "support/instances.hpp"
#include "support/oracles.hpp"
#include "vaxalloc/objective.hpp"

using namespace vaxalloc;

namespace {

constexpr double kTol = 1e-12;

ObjectiveContext context_of(const fixture::Case& c) { return build_context(c.graph, c.pop, c.params); }

double f_of(const ObjectiveContext& ctx, const std::vector<std::uint8_t>& v) {
  return eval_f(ctx, fixture::members_of(v), v);
}

}  // namespace

TEST(BuildContext, AllRecoveredIsIdenticallyZero) {
  auto c = fixture::random_case(12, 0.6, 4);
  std::fill(c.pop.state.begin(), c.pop.state.end(), HealthState::Recovered);
  const auto ctx = context_of(c);
  EXPECT_TRUE(ctx.interactions().empty());
  for (UnitId i = 0; i < 12; ++i) EXPECT_EQ(ctx.linear(i), 0.0);
  EXPECT_EQ(eval_f(ctx, Allocation({0, 3, 5, 7})), 0.0);
}

TEST(BuildContext, InfectedUnitLinearCoefficient) {
  fixture::Case c{ContactGraph(100, {}), {}, SirParams::set1()};
  c.pop.state.assign(100, HealthState::Recovered);
  c.pop.group.assign(100, Group::G1);
  c.pop.weight.assign(100, 1.0);
  c.pop.state[42] = HealthState::Infected;
  EXPECT_NEAR(context_of(c).linear(42), 0.009, 1e-15);
}

TEST(BuildContext, CrossGroupInteraction) {
  const std::vector<std::pair<UnitId, UnitId>> edges{{0, 1}};
  fixture::Case c{ContactGraph(10, edges), {}, SirParams::set1()};
  c.pop.state.assign(10, HealthState::Recovered);
  c.pop.group.assign(10, Group::G2);
  c.pop.weight.assign(10, 1.0);
  c.pop.state[0] = HealthState::Susceptible;
  c.pop.group[0] = Group::G1;
  c.pop.state[1] = HealthState::Infected;
  const auto ctx = context_of(c);
  EXPECT_NEAR(ctx.interaction(0, 1), -0.05, 1e-15);
  EXPECT_EQ(ctx.interaction(1, 0), 0.0);
}

TEST(BuildContext, SizeMismatchThrows) {
  auto c = fixture::random_case(6, 0.5, 1);
  c.pop.state.pop_back();
  c.pop.group.pop_back();
  c.pop.weight.pop_back();
  EXPECT_THROW(context_of(c), ParameterError);
}

TEST(BuildContext, MatchesDenseFormulaEntrywise) {
  for (int seed = 0; seed < 20; ++seed) {
    const auto c = fixture::random_case(14, 0.1 + 0.045 * seed, 50 + seed, seed % 2 ? SirParams::set2() : SirParams::set1(), true);
    const auto ctx = context_of(c);
    const auto d = oracle::dense(c.graph, c.pop, c.params);
    for (UnitId i = 0; i < 14; ++i) {
      EXPECT_NEAR(ctx.linear(i), d.c[i], 1e-15);
      EXPECT_GE(ctx.linear(i), 0.0);
      EXPECT_EQ(ctx.interaction(i, i), 0.0);
      for (UnitId j = 0; j < 14; ++j) {
        EXPECT_NEAR(ctx.interaction(i, j), d.w[i][j], 1e-15);
        EXPECT_LE(ctx.interaction(i, j), 0.0);
        if (!c.graph.has_edge(i, j)) {
          EXPECT_EQ(ctx.interaction(i, j), 0.0);
        }
      }
    }
    EXPECT_TRUE(ctx.has_submodular_form());
  }
}

TEST(EvalF, TwoUnitHandValues) {
  const auto c = fixture::two_unit_case();
  const auto ctx = context_of(c);
  EXPECT_EQ(eval_f(ctx, Allocation{}), 0.0);
  EXPECT_NEAR(eval_f(ctx, Allocation({1})), 0.80, 1e-15);
  EXPECT_NEAR(eval_f(ctx, Allocation({0})), 0.35, 1e-15);
}

TEST(EvalF, AgreesWithMatrixAndPairwiseForms) {
  std::mt19937_64 gen(17);
  for (int seed = 0; seed < 40; ++seed) {
    const std::size_t n = 6 + seed % 10;
    const auto c = fixture::random_case(n, std::array{0.1, 0.5, 1.0}[seed % 3], 900 + seed,
                                        seed % 2 ? SirParams::set2() : SirParams::set1(), seed % 4 == 0);
    const auto ctx = context_of(c);
    const auto dense = oracle::dense(c.graph, c.pop, c.params);
    for (int t = 0; t < 25; ++t) {
      const auto v = fixture::random_indicator(n, gen);
      const double f = f_of(ctx, v);
      ASSERT_NEAR(f, oracle::f_matrix(dense, v), kTol);
      ASSERT_NEAR(f, oracle::f_pairwise(c.graph, c.pop, c.params, v), kTol);
    }
  }
}

TEST(EvalWelfare, FullVaccinationIsOne) {
  const auto c = fixture::random_case(20, 0.5, 8);
  std::vector<UnitId> all(20);
  std::iota(all.begin(), all.end(), UnitId{0});
  EXPECT_EQ(eval_welfare(c.graph, c.pop, c.params, Allocation(all)), 1.0);
  EXPECT_EQ(eval_welfare(c.graph, c.pop, c.params, Allocation(all), InfectionMode::Exact), 1.0);
}

TEST(EvalWelfare, AllRecoveredIsOne) {
  auto c = fixture::random_case(20, 0.5, 8);
  std::fill(c.pop.state.begin(), c.pop.state.end(), HealthState::Recovered);
  EXPECT_EQ(eval_welfare(c.graph, c.pop, c.params, Allocation{}), 1.0);
}

TEST(EvalWelfare, TwoUnitHandValue) {
  const auto c = fixture::two_unit_case();
  const auto ctx = context_of(c);
  const double empty = eval_welfare(c.graph, c.pop, c.params, Allocation{});
  EXPECT_NEAR(empty, 0.20, 1e-15);
  EXPECT_NEAR(eval_welfare(c.graph, c.pop, c.params, Allocation({1})) - empty, eval_f(ctx, Allocation({1})), 1e-15);
  EXPECT_NEAR(ctx.welfare_constant(), 0.20, 1e-15);
}

TEST(EvalWelfare, MatchesFormulaOracleInBothModes) {
  std::mt19937_64 gen(23);
  for (int seed = 0; seed < 30; ++seed) {
    const std::size_t n = 10 + seed % 7;
    const auto c = fixture::random_case(n, 0.3, 400 + seed, SirParams::set2(), true);
    for (int t = 0; t < 10; ++t) {
      const auto v = fixture::random_indicator(n, gen, 0.3);
      const Allocation a(fixture::members_of(v));
      for (auto mode : {InfectionMode::Linear, InfectionMode::Exact})
        ASSERT_NEAR(eval_welfare(c.graph, c.pop, c.params, a, mode), oracle::welfare(c.graph, c.pop, c.params, v, mode),
                    kTol);
    }
  }
}

TEST(EvalWelfare, LinearOffsetIsConstant) {
  std::mt19937_64 gen(29);
  for (double density : {0.1, 0.5, 1.0}) {
    const auto c = fixture::random_case(40, density, 77, SirParams::set1(), true);
    const auto ctx = context_of(c);
    double lo = 1e9, hi = -1e9;
    for (int t = 0; t < 100; ++t) {
      const auto v = fixture::random_indicator(40, gen, 0.25);
      const Allocation a(fixture::members_of(v));
      const double offset = eval_welfare(c.graph, c.pop, c.params, a) - eval_f(ctx, a);
      lo = std::min(lo, offset);
      hi = std::max(hi, offset);
    }
    EXPECT_LE(hi - lo, kTol);
    EXPECT_NEAR(lo, ctx.welfare_constant(), kTol);
  }
}

TEST(MarginalGain, IsolatedRecoveredUnitIsZero) {
  auto c = fixture::random_case(5, 0.0, 2);
  c.pop.state[3] = HealthState::Recovered;
  EXPECT_EQ(marginal_gain(context_of(c), Allocation{}, 3), 0.0);
}

TEST(MarginalGain, TwoUnitHandValues) {
  const auto ctx = context_of(fixture::two_unit_case());
  EXPECT_NEAR(marginal_gain(ctx, Allocation{}, 1), 0.80, 1e-15);
  EXPECT_NEAR(marginal_gain(ctx, Allocation({1}), 0), 0.0, 1e-15);
}

TEST(MarginalGain, RejectsSelectedCandidate) {
  const auto ctx = context_of(fixture::two_unit_case());
  EXPECT_THROW(marginal_gain(ctx, Allocation({1}), 1), ParameterError);
}

TEST(MarginalGain, MatchesDifferenceOfFullEvaluations) {
  std::mt19937_64 gen(31);
  int checked = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 8 + inst % 25;
    const auto c = fixture::random_case(n, std::array{0.1, 0.5, 1.0}[inst % 3], 1200 + inst,
                                        inst % 2 ? SirParams::set2() : SirParams::set1(), inst % 3 == 1);
    const auto ctx = context_of(c);
    for (int t = 0; t < 100; ++t, ++checked) {
      auto v = fixture::random_indicator(n, gen, 0.4);
      std::uniform_int_distribution<UnitId> pick(0, n - 1);
      UnitId x = pick(gen);
      v[x] = 0;
      const double before = f_of(ctx, v);
      const double gain = marginal_gain(ctx, v, x);
      v[x] = 1;
      ASSERT_NEAR(gain, f_of(ctx, v) - before, kTol);
      ASSERT_GE(gain, -kTol);
    }
  }
  EXPECT_EQ(checked, 10000);
}

TEST(CheckSubmodular, PassesOnBuiltContexts) {
  for (double density : {0.1, 0.5, 1.0})
    for (int seed = 0; seed < 3; ++seed) {
      const auto c = fixture::random_case(30, density, 60 + seed, SirParams::set2(), true);
      const auto report = check_submodular(context_of(c), 1000, seed);
      EXPECT_TRUE(report.passed);
      EXPECT_EQ(report.trials, 1000u);
    }
}

TEST(CheckSubmodular, EmptyGraphPasses) {
  const auto c = fixture::random_case(10, 0.0, 5);
  EXPECT_TRUE(check_submodular(context_of(c), 500, 1).passed);
}

TEST(CheckSubmodular, DetectsPositiveInteraction) {
  const auto c = fixture::random_case(10, 0.6, 3);
  const auto ctx = context_of(c);
  ASSERT_FALSE(ctx.interactions().empty());
  std::vector<Interaction> flipped(ctx.interactions().begin(), ctx.interactions().end());
  flipped.front().value = -flipped.front().value;
  std::vector<double> linear(10);
  for (UnitId i = 0; i < 10; ++i) linear[i] = ctx.linear(i);
  const auto mutated = ObjectiveContext::from_terms(10, linear, flipped);
  EXPECT_FALSE(mutated.has_submodular_form());
  const auto report = check_submodular(mutated, 1000, 11);
  ASSERT_FALSE(report.passed);
  ASSERT_TRUE(report.counterexample.has_value());
  const auto& v = *report.counterexample;
  EXPECT_TRUE(std::includes(v.larger.begin(), v.larger.end(), v.smaller.begin(), v.smaller.end()));
}

TEST(FromTerms, MergesDuplicatesAndRejectsDiagonal) {
  const auto ctx = ObjectiveContext::from_terms(3, {0.1, 0.0, 0.2}, {{0, 1, -0.01}, {0, 1, -0.02}});
  EXPECT_NEAR(ctx.interaction(0, 1), -0.03, 1e-15);
  EXPECT_THROW(ObjectiveContext::from_terms(2, {0.0, 0.0}, {{1, 1, -0.1}}), ParameterError);
  EXPECT_THROW(ObjectiveContext::from_terms(2, {0.0}, {}), ParameterError);
}
