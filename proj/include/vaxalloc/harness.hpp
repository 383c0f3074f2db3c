#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vaxalloc/config.hpp"
#include "vaxalloc/epidemic.hpp"
#include "vaxalloc/errors.hpp"
#include "vaxalloc/graph.hpp"
#include "vaxalloc/objective.hpp"
#include "vaxalloc/random.hpp"
#include "vaxalloc/regret.hpp"
#include "vaxalloc/solvers.hpp"

namespace vaxalloc {

enum class Policy { Greedy, Brute, Random, Twni, GreedyTargeting };

inline constexpr Policy kAllPolicies[] = {Policy::Greedy, Policy::Brute, Policy::Random, Policy::Twni,
                                          Policy::GreedyTargeting};

inline const char* to_string(Policy p) {
  switch (p) {
    case Policy::Greedy: return "greedy";
    case Policy::Brute: return "brute";
    case Policy::Random: return "random";
    case Policy::Twni: return "twni";
    case Policy::GreedyTargeting: return "greedy_targeting";
  }
  return "?";
}

inline Policy parse_policy(const std::string& name) {
  for (Policy p : kAllPolicies)
    if (name == to_string(p)) return p;
  throw ParseError("unknown policy '" + name + "'");
}

inline std::vector<Policy> parse_policies(const std::vector<std::string>& names) {
  std::set<Policy> chosen;
  for (const auto& n : names) chosen.insert(parse_policy(n));
  return {chosen.begin(), chosen.end()};
}

inline InfectionMode parse_mode(const std::string& text) {
  if (text == "linear") return InfectionMode::Linear;
  if (text == "exact") return InfectionMode::Exact;
  throw ParseError("mode must be 'linear' or 'exact', got '" + text + "'");
}

/// Probabilities of the first-period states S, I, R within one group.
struct StateDistribution {
  double susceptible = 0.425;
  double infected = 0.40;
  double recovered = 0.175;
};

struct ExperimentConfig {
  std::size_t n_units = 500;
  double density = 0.1;
  std::size_t n_networks = 100;
  std::string parameter_set = "set1";
  SirParams params = SirParams::set1();
  double group1_probability = 0.4;
  StateDistribution initial_state[2];
  std::vector<double> capacity_fractions{0.07, 0.10, 0.20};
  double weights[2] = {1.0, 1.0};
  std::vector<Policy> policies{Policy::Greedy, Policy::Random, Policy::Twni};
  std::size_t random_draws = 10000;
  std::uint64_t seed = 1;
  InfectionMode mode = InfectionMode::Linear;
  Group twni_priority = Group::G2;
  double targeting_group1_share = 0.4;  // greedy_targeting: d1 = round(share d), d2 = d - d1
  double brute_budget = kDefaultBruteForceBudget;
  bool timing = true;      // false writes runtime_ms = 0 so output is reproducible byte for byte
  std::size_t threads = 0; // 0 = hardware concurrency

  // Regret Monte Carlo.
  std::vector<std::uint64_t> regret_n_external{100, 1000, 10000};
  std::size_t regret_replications = 200;
  std::size_t regret_capacity = 3;
  bool regret_use_brute = true;

  /// Capacity for a fraction of N, at least one dose.
  std::size_t capacity_for(double fraction) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_units))));
  }

  TargetingCaps targeting_caps(std::size_t d) const {
    const auto g1 = static_cast<std::size_t>(std::llround(targeting_group1_share * static_cast<double>(d)));
    return {g1, d - std::min(g1, d)};
  }

  void validate() const {
    auto prob = [](double p, const std::string& what) {
      if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(what + " must lie in [0, 1]");
    };
    if (n_units < 1) throw ParameterError("n_units must be at least 1");
    prob(density, "density");
    if (n_networks < 1) throw ParameterError("n_networks must be at least 1");
    params.validate();
    prob(group1_probability, "group1_probability");
    for (const auto& dist : initial_state) {
      prob(dist.susceptible, "initial state probability");
      prob(dist.infected, "initial state probability");
      prob(dist.recovered, "initial state probability");
      if (std::abs(dist.susceptible + dist.infected + dist.recovered - 1.0) > 1e-9)
        throw ParameterError("initial state probabilities must sum to 1 per group");
    }
    if (capacity_fractions.empty()) throw ParameterError("capacity_fractions must not be empty");
    for (double c : capacity_fractions)
      if (!(c > 0.0 && c <= 1.0)) throw ParameterError("capacity fractions must lie in (0, 1]");
    for (double g : weights)
      if (!(g >= 0.0) || !std::isfinite(g)) throw ParameterError("weights must be non-negative");
    if (policies.empty()) throw ParameterError("at least one policy is required");
    if (random_draws < 1) throw ParameterError("random_draws must be at least 1");
    prob(targeting_group1_share, "targeting_group1_share");
    if (regret_replications < 1) throw ParameterError("regret_replications must be at least 1");
    for (auto n : regret_n_external)
      if (n < 1) throw ParameterError("regret_n_external entries must be at least 1");
  }
};

namespace detail {

inline SirParams named_parameter_set(const std::string& name) {
  if (name == "set1") return SirParams::set1();
  if (name == "set2") return SirParams::set2();
  throw ParseError("parameter_set must be 'set1' or 'set2', got '" + name + "'");
}

inline StateDistribution state_distribution(const KeyValueFile& kv, const std::string& key, StateDistribution d) {
  if (!kv.has(key)) return d;
  auto v = kv.get_doubles(key, {});
  if (v.size() != 3) kv.fail(key, "expected three probabilities S,I,R");
  return {v[0], v[1], v[2]};
}

}  // namespace detail

/// Reads SirParams keys into `params`: `parameter_set` picks a preset, then
/// beta_11 .. beta_22, gamma_1, gamma_2, delta_1, delta_2 override entries.
inline SirParams read_params(const KeyValueFile& kv, SirParams params, std::string* set_name = nullptr) {
  if (kv.has("parameter_set")) {
    params = detail::named_parameter_set(kv.raw("parameter_set"));
    if (set_name) *set_name = kv.raw("parameter_set");
  }
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t k = 0; k < 2; ++k)
      params.beta[s][k] = kv.get_double("beta_" + std::to_string(s + 1) + std::to_string(k + 1), params.beta[s][k]);
    params.gamma[s] = kv.get_double("gamma_" + std::to_string(s + 1), params.gamma[s]);
    params.delta[s] = kv.get_double("delta_" + std::to_string(s + 1), params.delta[s]);
  }
  return params;
}

inline void write_params(const SirParams& params, std::ostream& out) {
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t k = 0; k < 2; ++k) out << "beta_" << s + 1 << k + 1 << " = " << params.beta[s][k] << '\n';
  for (std::size_t s = 0; s < 2; ++s) out << "gamma_" << s + 1 << " = " << params.gamma[s] << '\n';
  for (std::size_t s = 0; s < 2; ++s) out << "delta_" << s + 1 << " = " << params.delta[s] << '\n';
}

/// Parses an experiment config. Unknown keys are rejected.
inline ExperimentConfig load_config(std::istream& in) {
  static const std::set<std::string> known = {
      "n_units", "density", "n_networks", "parameter_set", "beta_11", "beta_12", "beta_21", "beta_22",
      "gamma_1", "gamma_2", "delta_1", "delta_2", "group1_probability", "initial_state_g1",
      "initial_state_g2", "capacity_fractions", "weights", "policies", "random_draws", "seed", "mode",
      "twni_priority", "targeting_group1_share", "brute_budget", "timing", "threads", "regret_n_external",
      "regret_replications", "regret_capacity", "regret_use_brute"};
  const KeyValueFile kv = KeyValueFile::parse(in);
  for (const auto& key : kv.keys())
    if (!known.count(key)) kv.fail(key, "unknown key");

  ExperimentConfig c;
  c.n_units = kv.get_u64("n_units", c.n_units);
  c.density = kv.get_double("density", c.density);
  c.n_networks = kv.get_u64("n_networks", c.n_networks);
  c.params = read_params(kv, c.params, &c.parameter_set);
  c.group1_probability = kv.get_double("group1_probability", c.group1_probability);
  c.initial_state[0] = detail::state_distribution(kv, "initial_state_g1", c.initial_state[0]);
  c.initial_state[1] = detail::state_distribution(kv, "initial_state_g2", c.initial_state[1]);
  c.capacity_fractions = kv.get_doubles("capacity_fractions", c.capacity_fractions);
  if (kv.has("weights")) {
    auto w = kv.get_doubles("weights", {});
    if (w.size() != 2) kv.fail("weights", "expected two weights g1,g2");
    c.weights[0] = w[0];
    c.weights[1] = w[1];
  }
  if (kv.has("policies")) c.policies = parse_policies(kv.get_list("policies"));
  c.random_draws = kv.get_u64("random_draws", c.random_draws);
  c.seed = kv.get_u64("seed", c.seed);
  if (kv.has("mode")) c.mode = parse_mode(kv.raw("mode"));
  if (kv.has("twni_priority")) {
    const auto& p = kv.raw("twni_priority");
    if (p == "G1" || p == "1") c.twni_priority = Group::G1;
    else if (p == "G2" || p == "2") c.twni_priority = Group::G2;
    else kv.fail("twni_priority", "expected G1 or G2");
  }
  c.targeting_group1_share = kv.get_double("targeting_group1_share", c.targeting_group1_share);
  c.brute_budget = kv.get_double("brute_budget", c.brute_budget);
  c.timing = kv.get_bool("timing", c.timing);
  c.threads = kv.get_u64("threads", c.threads);
  c.regret_n_external = kv.get_u64s("regret_n_external", c.regret_n_external);
  c.regret_replications = kv.get_u64("regret_replications", c.regret_replications);
  c.regret_capacity = kv.get_u64("regret_capacity", c.regret_capacity);
  c.regret_use_brute = kv.get_bool("regret_use_brute", c.regret_use_brute);
  c.validate();
  return c;
}

/// Draws groups and first-period states independently per unit: G1 with
/// probability group1_probability, then S/I/R from the group's distribution.
/// Weights come from the group.
inline Population draw_population(const ExperimentConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  Population pop;
  const std::size_t n = config.n_units;
  pop.state.reserve(n);
  pop.group.reserve(n);
  pop.weight.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Group g = uniform01(rng) < config.group1_probability ? Group::G1 : Group::G2;
    const auto& dist = config.initial_state[index(g)];
    const double u = uniform01(rng);
    HealthState h = HealthState::Recovered;
    if (u < dist.susceptible) h = HealthState::Susceptible;
    else if (u < dist.susceptible + dist.infected) h = HealthState::Infected;
    pop.state.push_back(h);
    pop.group.push_back(g);
    pop.weight.push_back(config.weights[index(g)]);
  }
  return pop;
}

/// Population in the key-value format: `n_units`, then comma-separated
/// `state` (S/I/R), `group` (1/2) and `weight` lists.
inline void save_population(const Population& pop, std::ostream& out) {
  auto join = [&](auto&& item) {
    for (std::size_t i = 0; i < pop.n_units(); ++i) {
      if (i) out << ',';
      item(i);
    }
    out << '\n';
  };
  out << "n_units = " << pop.n_units() << '\n';
  out << "state = ";
  join([&](std::size_t i) {
    out << (pop.state[i] == HealthState::Susceptible ? 'S' : pop.state[i] == HealthState::Infected ? 'I' : 'R');
  });
  out << "group = ";
  join([&](std::size_t i) { out << (pop.group[i] == Group::G1 ? '1' : '2'); });
  out << "weight = ";
  out.precision(17);
  join([&](std::size_t i) { out << pop.weight[i]; });
  if (!out) throw std::runtime_error("failed writing population");
}

inline Population load_population(std::istream& in) {
  const KeyValueFile kv = KeyValueFile::parse(in);
  for (const char* key : {"n_units", "state", "group"})
    if (!kv.has(key)) throw ParseError(std::string("population file is missing '") + key + "'");
  const std::size_t n = kv.get_u64("n_units", 0);
  Population pop;
  for (const auto& s : kv.get_list("state")) {
    if (s == "S") pop.state.push_back(HealthState::Susceptible);
    else if (s == "I") pop.state.push_back(HealthState::Infected);
    else if (s == "R") pop.state.push_back(HealthState::Recovered);
    else kv.fail("state", "expected S, I or R, got '" + s + "'");
  }
  for (const auto& g : kv.get_list("group")) {
    if (g == "1") pop.group.push_back(Group::G1);
    else if (g == "2") pop.group.push_back(Group::G2);
    else kv.fail("group", "expected 1 or 2, got '" + g + "'");
  }
  pop.weight = kv.has("weight") ? kv.get_doubles("weight", {}) : std::vector<double>(n, 1.0);
  if (pop.state.size() != n || pop.group.size() != n || pop.weight.size() != n)
    throw ParseError("population lists must have n_units entries");
  pop.validate();
  return pop;
}

/// One policy at one capacity on one network.
struct PolicyOutcome {
  Policy policy = Policy::Greedy;
  double capacity_fraction = 0.0;
  std::size_t d = 0;
  double welfare = 0.0;
  double f_value = 0.0;
  double pct_young = 0.0;
  double runtime_ms = 0.0;
};

struct ReplicateRecord {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::vector<PolicyOutcome> outcomes;

  const PolicyOutcome& find(Policy p, double capacity_fraction) const {
    for (const auto& o : outcomes)
      if (o.policy == p && o.capacity_fraction == capacity_fraction) return o;
    throw std::out_of_range(std::string("no outcome for policy ") + to_string(p));
  }
};

/// A network replicate with everything the policies need.
struct Instance {
  ContactGraph graph;
  Population population;
  ObjectiveContext context;
};

// Sub-stream ids under a replicate seed.
inline constexpr std::uint64_t kGraphStream = 0;
inline constexpr std::uint64_t kPopulationStream = 1;
inline constexpr std::uint64_t kRandomPolicyStream = 2;

/// Replicate k uses seed derive_seed(config.seed, k); its graph and
/// population come from sub-streams of that seed.
inline std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t k) {
  return derive_seed(config.seed, k);
}

inline Instance make_instance(const ExperimentConfig& config, std::size_t k) {
  const std::uint64_t seed = replicate_seed(config, k);
  Instance inst;
  inst.graph = erdos_renyi(config.n_units, config.density, derive_seed(seed, kGraphStream));
  inst.population = draw_population(config, derive_seed(seed, kPopulationStream));
  inst.context = build_context(inst.graph, inst.population, config.params);
  return inst;
}

inline double pct_group1(const Allocation& alloc, const Population& pop) {
  if (alloc.empty()) return 0.0;
  std::size_t young = 0;
  for (UnitId i : alloc.units()) young += pop.group[i] == Group::G1;
  return 100.0 * static_cast<double>(young) / static_cast<double>(alloc.size());
}

/// Runs every configured policy at every capacity on replicate k.
inline ReplicateRecord run_replicate(const ExperimentConfig& config, std::size_t k) {
  const Instance inst = make_instance(config, k);
  const auto& ctx = inst.context;
  const auto& groups = inst.population.group;
  ReplicateRecord rec;
  rec.replicate = k;
  rec.seed = replicate_seed(config, k);

  for (std::size_t ci = 0; ci < config.capacity_fractions.size(); ++ci) {
    const double fraction = config.capacity_fractions[ci];
    const std::size_t d = config.capacity_for(fraction);
    for (Policy p : config.policies) {
      const auto start = std::chrono::steady_clock::now();
      PolicyOutcome out{p, fraction, d};
      auto record_solver = [&](const SolverResult& r) {
        out.f_value = r.f_value;
        out.welfare = config.mode == InfectionMode::Linear
                          ? r.welfare
                          : eval_welfare(inst.graph, inst.population, config.params, r.allocation, config.mode);
        out.pct_young = pct_group1(r.allocation, inst.population);
      };
      switch (p) {
        case Policy::Greedy: record_solver(greedy_capacity(ctx, d)); break;
        case Policy::Brute: record_solver(brute_force(ctx, d, config.brute_budget)); break;
        case Policy::Twni: record_solver(twni(ctx, d, groups, config.twni_priority)); break;
        case Policy::GreedyTargeting:
          record_solver(greedy_targeting(ctx, d, config.targeting_caps(d), groups));
          break;
        case Policy::Random: {
          const std::uint64_t seed = derive_seed(derive_seed(rec.seed, kRandomPolicyStream), ci);
          const auto r = random_assignment(ctx, d, config.random_draws, seed, groups);
          out.f_value = r.mean_f;
          out.welfare = r.mean_welfare;
          out.pct_young = 100.0 * r.mean_group1_share;
          if (config.mode != InfectionMode::Linear) {
            // Replays the same draws and scores each with the requested mode.
            Rng rng(seed);
            RandomSubsetSampler sampler(config.n_units, d);
            double sum = 0.0;
            for (std::size_t t = 0; t < config.random_draws; ++t) {
              auto members = sampler.draw(rng);
              sum += eval_welfare(inst.graph, inst.population, config.params,
                                  Allocation({members.begin(), members.end()}), config.mode);
            }
            out.welfare = sum / static_cast<double>(config.random_draws);
          }
          break;
        }
      }
      if (config.timing)
        out.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      rec.outcomes.push_back(out);
    }
  }
  return rec;
}

/// Runs all replicates, spread over worker threads. Records come back in
/// replicate order regardless of scheduling; the first failure is rethrown.
inline std::vector<ReplicateRecord> run_replicates(const ExperimentConfig& config) {
  config.validate();
  std::vector<ReplicateRecord> records(config.n_networks);
  std::vector<std::exception_ptr> errors(config.n_networks);
  std::size_t workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.n_networks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < config.n_networks; k = next++) {
      try {
        records[k] = run_replicate(config, k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return records;
}

struct ExperimentRow {
  Policy policy = Policy::Greedy;
  double capacity_fraction = 0.0;
  double mean_welfare = 0.0;
  double sd_welfare = 0.0;
  double mean_f = 0.0;
  double pct_young_vaccinated = 0.0;
  double runtime_ms = 0.0;  // mean per network
};

/// Means across networks; sd_welfare uses the n-1 denominator (0 for one
/// network). Rows are ordered by capacity fraction, then policy.
inline std::vector<ExperimentRow> aggregate(const ExperimentConfig& config,
                                            const std::vector<ReplicateRecord>& records) {
  std::vector<ExperimentRow> rows;
  const double n = static_cast<double>(records.size());
  for (double fraction : config.capacity_fractions) {
    for (Policy p : config.policies) {
      ExperimentRow row{p, fraction};
      std::vector<double> welfare;
      for (const auto& rec : records) {
        const auto& o = rec.find(p, fraction);
        welfare.push_back(o.welfare);
        row.mean_f += o.f_value / n;
        row.pct_young_vaccinated += o.pct_young / n;
        row.runtime_ms += o.runtime_ms / n;
      }
      double mean = 0.0;
      for (double w : welfare) mean += w / n;
      double ss = 0.0;
      for (double w : welfare) ss += (w - mean) * (w - mean);
      row.mean_welfare = mean;
      row.sd_welfare = records.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config) {
  return aggregate(config, run_replicates(config));
}

inline constexpr const char* kCsvHeader =
    "policy,capacity_fraction,mean_welfare,sd_welfare,mean_f,pct_young_vaccinated,runtime_ms";

inline void emit_csv(const std::vector<ExperimentRow>& rows, std::ostream& out) {
  if (rows.empty()) throw ParameterError("no rows to write");
  out << kCsvHeader << '\n';
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%s,%.6g,%.6f,%.6f,%.6f,%.6f,%.3f\n", to_string(r.policy),
                  r.capacity_fraction, r.mean_welfare, r.sd_welfare, r.mean_f, r.pct_young_vaccinated, r.runtime_ms);
    out << line;
  }
  if (!out) throw std::runtime_error("failed writing CSV");
}

struct RegretRow {
  std::uint64_t n_external = 0;
  RegretSummary mean;  // field-wise mean of the per-network summaries
};

/// Regret Monte Carlo on every network replicate at each configured external
/// sample size, averaged across networks. Capacity is `regret_capacity`.
inline std::vector<RegretRow> run_regret_study(const ExperimentConfig& config) {
  config.validate();
  std::vector<RegretRow> rows;
  for (std::uint64_t n_ext : config.regret_n_external) {
    RegretRow row{n_ext, {}};
    row.mean.n_external = n_ext;
    row.mean.approximate = !config.regret_use_brute;
    const double k = static_cast<double>(config.n_networks);
    for (std::size_t net = 0; net < config.n_networks; ++net) {
      const Instance inst = make_instance(config, net);
      const auto s = regret_monte_carlo(inst.graph, inst.population, config.params, config.regret_capacity,
                                        EstimationNoiseModel(n_ext), config.regret_replications,
                                        derive_seed(replicate_seed(config, net), n_ext), config.regret_use_brute);
      row.mean.replications += s.replications;
      row.mean.mean_total += s.mean_total / k;
      row.mean.mean_term1 += s.mean_term1 / k;
      row.mean.mean_term2 += s.mean_term2 / k;
      row.mean.mean_term3 += s.mean_term3 / k;
      row.mean.mean_estimation_error += s.mean_estimation_error / k;
      row.mean.bound += s.bound / k;
      row.mean.f_star += s.f_star / k;
    }
    rows.push_back(row);
  }
  return rows;
}

inline void emit_regret_csv(const std::vector<RegretRow>& rows, std::ostream& out) {
  if (rows.empty()) throw ParameterError("no rows to write");
  out << "n_external,replications,mean_total,mean_term1,mean_term2,mean_term3,mean_estimation_error,"
         "mean_bound,mean_f_star,approximate\n";
  char line[320];
  for (const auto& r : rows) {
    const auto& m = r.mean;
    std::snprintf(line, sizeof line, "%llu,%zu,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%d\n",
                  static_cast<unsigned long long>(r.n_external), m.replications, m.mean_total, m.mean_term1,
                  m.mean_term2, m.mean_term3, m.mean_estimation_error, m.bound, m.f_star, m.approximate ? 1 : 0);
    out << line;
  }
  if (!out) throw std::runtime_error("failed writing CSV");
}

}  // namespace vaxalloc
