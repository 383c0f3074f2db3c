#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vaxalloc/vaxalloc.hpp"

using namespace vaxalloc;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kCheckFailed = 1, kBadInput = 2, kBudget = 3 };

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> policies;
  std::string mode;
  std::optional<std::size_t> threads;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig c;
  if (!o.config_path.empty()) {
    auto in = open_input(o.config_path);
    c = load_config(in);
  }
  if (o.seed) c.seed = *o.seed;
  if (!o.policies.empty()) c.policies = parse_policies(o.policies);
  if (!o.mode.empty()) c.mode = parse_mode(o.mode);
  if (o.threads) c.threads = *o.threads;
  c.validate();
  return c;
}

// Writes to --out when given, stdout otherwise.
template <typename Fn>
void with_output(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  write(out);
}

void add_common(CLI::App* cmd, CommonOptions& o, bool with_policies) {
  cmd->add_option("-c,--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", o.out_path, "output path (default stdout)");
  cmd->add_option("--seed", o.seed, "root seed, overrides the config");
  cmd->add_option("--mode", o.mode, "infection mode: linear or exact");
  cmd->add_option("--threads", o.threads, "worker threads, 0 = all cores");
  if (with_policies)
    cmd->add_option("--policies", o.policies, "greedy, brute, random, twni, greedy_targeting")->delimiter(',');
}

json allocation_json(const Allocation& a) { return json(a.units()); }

int cmd_gen(const CommonOptions& o, std::size_t replicate, const std::string& population_out) {
  const ExperimentConfig c = resolve_config(o);
  const Instance inst = make_instance(c, replicate);
  with_output(o.out_path, [&](std::ostream& out) { save_edge_list(inst.graph, out); });
  if (!population_out.empty())
    with_output(population_out, [&](std::ostream& out) { save_population(inst.population, out); });
  return kOk;
}

struct SolveOptions {
  std::string graph_path;
  std::string population_path;
  std::string policy = "greedy";
  std::size_t capacity = 0;
  std::size_t replicate = 0;
  std::size_t draws = 0;
};

int cmd_solve(const CommonOptions& o, const SolveOptions& s) {
  const ExperimentConfig c = resolve_config(o);
  ContactGraph graph;
  Population pop;
  if (!s.graph_path.empty() || !s.population_path.empty()) {
    if (s.graph_path.empty() || s.population_path.empty())
      throw ParameterError("--graph and --population must be given together");
    auto gin = open_input(s.graph_path);
    graph = load_edge_list(gin);
    auto pin = open_input(s.population_path);
    pop = load_population(pin);
    if (pop.n_units() != graph.n_units()) throw ParameterError("population size does not match the graph");
  } else {
    Instance inst = make_instance(c, s.replicate);
    graph = std::move(inst.graph);
    pop = std::move(inst.population);
  }
  const auto ctx = build_context(graph, pop, c.params);
  const std::size_t d = s.capacity ? s.capacity : c.capacity_for(c.capacity_fractions.front());
  const Policy policy = parse_policy(s.policy);

  json row{{"policy", to_string(policy)}, {"n_units", graph.n_units()}, {"d", d},
           {"mode", c.mode == InfectionMode::Linear ? "linear" : "exact"}};
  const auto start = std::chrono::steady_clock::now();
  auto describe = [&](const SolverResult& r) {
    row["allocation"] = allocation_json(r.allocation);
    row["f_value"] = r.f_value;
    row["welfare"] = c.mode == InfectionMode::Linear ? r.welfare
                                                     : eval_welfare(graph, pop, c.params, r.allocation, c.mode);
    row["rounds"] = r.rounds;
    row["pct_young"] = pct_group1(r.allocation, pop);
    if (!r.gain_trace.empty()) {
      json trace = json::array();
      for (const auto& step : r.gain_trace) trace.push_back({{"unit", step.unit}, {"gain", step.gain}});
      row["gain_trace"] = std::move(trace);
    }
  };
  switch (policy) {
    case Policy::Greedy: describe(greedy_capacity(ctx, d)); break;
    case Policy::Brute: describe(brute_force(ctx, d, c.brute_budget)); break;
    case Policy::Twni: describe(twni(ctx, d, pop.group, c.twni_priority)); break;
    case Policy::GreedyTargeting: {
      const auto caps = c.targeting_caps(d);
      row["caps"] = {caps.group1, caps.group2};
      describe(greedy_targeting(ctx, d, caps, pop.group));
      break;
    }
    case Policy::Random: {
      const auto r = random_assignment(ctx, d, s.draws ? s.draws : c.random_draws, c.seed, pop.group);
      row["draws"] = r.draws;
      row["mean_f"] = r.mean_f;
      row["sd_f"] = r.sd_f;
      row["mean_welfare"] = r.mean_welfare;
      row["sd_welfare"] = r.sd_welfare;
      row["pct_young"] = 100.0 * r.mean_group1_share;
      break;
    }
  }
  row["runtime_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  with_output(o.out_path, [&](std::ostream& out) { out << row.dump() << '\n'; });
  return kOk;
}

int cmd_experiment(const CommonOptions& o) {
  const ExperimentConfig c = resolve_config(o);
  const auto rows = run_experiment(c);
  with_output(o.out_path, [&](std::ostream& out) { emit_csv(rows, out); });
  return kOk;
}

int cmd_regret(const CommonOptions& o) {
  const ExperimentConfig c = resolve_config(o);
  const auto rows = run_regret_study(c);
  with_output(o.out_path, [&](std::ostream& out) { emit_regret_csv(rows, out); });
  return kOk;
}

// Property suites on every replicate network of the config. One JSON line per
// suite and replicate; exit status 1 when anything fails.
int cmd_check(const CommonOptions& o, std::size_t trials, std::size_t brute_limit) {
  const ExperimentConfig c = resolve_config(o);
  bool all_passed = true;
  with_output(o.out_path, [&](std::ostream& out) {
    for (std::size_t k = 0; k < c.n_networks; ++k) {
      const Instance inst = make_instance(c, k);
      const auto& ctx = inst.context;
      const std::uint64_t seed = replicate_seed(c, k);

      const auto sub = check_submodular(ctx, trials, seed);
      json line{{"suite", "submodular"}, {"replicate", k}, {"trials", sub.trials}, {"passed", sub.passed}};
      if (sub.counterexample) {
        const auto& v = *sub.counterexample;
        line["counterexample"] = {{"smaller", v.smaller}, {"larger", v.larger}, {"candidate", v.candidate},
                                  {"smaller_value", v.smaller_value}, {"larger_value", v.larger_value}};
      }
      all_passed &= sub.passed;
      out << line.dump() << '\n';

      Rng rng(derive_seed(seed, 1));
      const std::size_t n = ctx.n_units();
      double lo = 0.0, hi = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        RandomSubsetSampler sampler(n, uniform_below(rng, n + 1));
        auto members = sampler.draw(rng);
        const Allocation a({members.begin(), members.end()});
        const double offset =
            eval_welfare(inst.graph, inst.population, c.params, a, InfectionMode::Linear) - eval_f(ctx, a);
        lo = t ? std::min(lo, offset) : offset;
        hi = t ? std::max(hi, offset) : offset;
      }
      const bool offset_ok = hi - lo <= kTolerance;
      all_passed &= offset_ok;
      out << json{{"suite", "welfare_offset"}, {"replicate", k}, {"spread", hi - lo}, {"passed", offset_ok}}.dump()
          << '\n';

      for (double fraction : c.capacity_fractions) {
        const std::size_t d = c.capacity_for(fraction);
        if (binomial(n, std::min(d, n)) > static_cast<double>(brute_limit)) continue;
        const double greedy = greedy_capacity(ctx, d).f_value;
        const double best = brute_force(ctx, d, c.brute_budget).f_value;
        const double k_d = static_cast<double>(d);
        const double factor = 1.0 - std::pow(1.0 - 1.0 / k_d, k_d);
        const bool ok = greedy >= factor * best - kTolerance;
        all_passed &= ok;
        out << json{{"suite", "greedy_vs_brute"}, {"replicate", k}, {"d", d}, {"greedy", greedy},
                    {"brute", best}, {"exact", std::abs(best - greedy) <= kTolerance}, {"passed", ok}}
                   .dump()
            << '\n';
      }
    }
  });
  return all_passed ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vaccine allocation on contact networks under a heterogeneous SIR model"};
  app.require_subcommand(1);

  CommonOptions gen_opts, solve_opts, exp_opts, regret_opts, check_opts;

  auto* gen = app.add_subcommand("gen", "generate one replicate network as an edge list");
  add_common(gen, gen_opts, false);
  std::size_t gen_replicate = 0;
  std::string population_out;
  gen->add_option("--replicate", gen_replicate, "replicate index");
  gen->add_option("--population-out", population_out, "also write the drawn population here");

  auto* solve = app.add_subcommand("solve", "solve one instance with one policy, JSON line output");
  add_common(solve, solve_opts, false);
  SolveOptions solve_args;
  solve->add_option("--policy", solve_args.policy, "greedy, brute, random, twni, greedy_targeting");
  solve->add_option("-d,--capacity", solve_args.capacity, "dose count (default: first capacity fraction)");
  solve->add_option("--graph", solve_args.graph_path, "edge list file")->check(CLI::ExistingFile);
  solve->add_option("--population", solve_args.population_path, "population file")->check(CLI::ExistingFile);
  solve->add_option("--replicate", solve_args.replicate, "replicate drawn from the config when no files given");
  solve->add_option("--draws", solve_args.draws, "random policy draws (default: config random_draws)");

  auto* experiment = app.add_subcommand("experiment", "run the policy comparison, CSV output");
  add_common(experiment, exp_opts, true);

  auto* regret = app.add_subcommand("regret", "regret Monte Carlo over external sample sizes, CSV output");
  add_common(regret, regret_opts, false);

  auto* check = app.add_subcommand("check", "run property suites on the configured networks");
  add_common(check, check_opts, false);
  std::size_t check_trials = 1000;
  std::size_t brute_limit = 200000;
  check->add_option("--trials", check_trials, "random chains and allocations per network");
  check->add_option("--brute-limit", brute_limit, "skip brute-force comparison above this many subsets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*gen) return cmd_gen(gen_opts, gen_replicate, population_out);
    if (*solve) return cmd_solve(solve_opts, solve_args);
    if (*experiment) return cmd_experiment(exp_opts);
    if (*regret) return cmd_regret(regret_opts);
    if (*check) return cmd_check(check_opts, check_trials, brute_limit);
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kOk;
}
