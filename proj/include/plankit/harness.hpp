#pragma once

#include "plankit/corpus.hpp"
#include "plankit/discount.hpp"
#include "plankit/explore.hpp"
#include "plankit/parallel.hpp"
#include "plankit/planners.hpp"
#include "plankit/qlearn.hpp"
#include "plankit/report.hpp"
#include "plankit/rollout.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace plankit {

enum class Algorithm { kDijkstra, kViSync, kViAsync, kModelFreeDijkstra, kModelFreeVi, kQLearn };

inline std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kDijkstra: return "dijkstra";
    case Algorithm::kViSync: return "vi-sync";
    case Algorithm::kViAsync: return "vi-async";
    case Algorithm::kModelFreeDijkstra: return "model-free-dijkstra";
    case Algorithm::kModelFreeVi: return "model-free-vi";
    case Algorithm::kQLearn: return "qlearn";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::kDijkstra, Algorithm::kViSync, Algorithm::kViAsync, Algorithm::kModelFreeDijkstra,
                 Algorithm::kModelFreeVi, Algorithm::kQLearn})
    if (algorithm_name(a) == s) return a;
  throw Error("InvalidConfig", "unknown algorithm '" + std::string(s) + "'");
}

/// One experiment: an algorithm run `trials` times on one problem. The
/// learner's own seed is ignored; trial i uses split_seed(base_seed, i).
struct ExperimentConfig {
  std::string problem;  // "corpus:NAME", "builtin:trap" or a map file path
  Algorithm algorithm = Algorithm::kDijkstra;
  double gamma = 1.0;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  LearnerConfig learner;
  bool allow_jump = false;

  void validate() const {
    if (trials < 1) throw Error("InvalidConfig", "trials must be at least 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("InvalidConfig", "gamma must lie in (0, 1]");
    if (algorithm == Algorithm::kQLearn) learner.validate();
  }
};

/// Problem text resolution shared by the harness and the CLI.
inline PlanningProblem load_problem(const std::string& ref) {
  if (ref.rfind("corpus:", 0) == 0) return corpus_problem(ref.substr(7));
  if (ref == "builtin:trap") return build_discount_trap_problem();
  return load_grid_map(ref);
}

/// Ground truth for convergence checks: exact values on deterministic
/// problems, stochastic value iteration otherwise.
struct Oracle {
  ValueTable<double> values;
  std::optional<ValueTable<Rational>> exact;
  double rel_tol = 1e-9;
};

inline Oracle compute_oracle(const PlanningProblem& p) {
  Oracle o;
  if (p.is_deterministic()) {
    o.exact = dijkstra<Rational>(p).values;
    o.values = to_double_table(*o.exact);
  } else {
    ViOptions opts;
    opts.tol = 1e-10;
    o.values = value_iteration<double>(p, SweepMode::kAsynchronous, opts).values;
    o.rel_tol = 0.1;
  }
  return o;
}

/// Memoizes problems and oracles by (problem ref, gamma). Concurrent
/// requests for one key compute it once; all callers share the object.
class OracleCache {
 public:
  struct Entry {
    PlanningProblem problem;
    Oracle oracle;
  };

  std::shared_ptr<const Entry> get(const std::string& problem_ref, double gamma) {
    const std::string key = problem_ref + "@" + format_number(gamma);
    std::shared_future<std::shared_ptr<const Entry>> fut;
    std::promise<std::shared_ptr<const Entry>> promise;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        fut = promise.get_future().share();
        entries_.emplace(key, fut);
        owner = true;
      } else {
        fut = it->second;
      }
    }
    if (owner) {
      try {
        auto p = load_problem(problem_ref).with_predictability(gamma);
        Oracle o;
        try {
          o = compute_oracle(p);
        } catch (const Error& e) {
          throw Error("OracleFailure", e.kind() + ": " + e.what());
        }
        promise.set_value(std::make_shared<const Entry>(Entry{std::move(p), std::move(o)}));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_future<std::shared_ptr<const Entry>>> entries_;
};

struct Report {
  ReportRow row;
  std::string problem;
  ExperimentConfig config;
  std::vector<TrialMetrics> trials;
};

namespace detail {

template <class Scalar>
bool value_matches(const std::optional<Scalar>& v, const std::optional<double>& target, double rel_tol) {
  if (!target) return true;
  if (!v) return false;
  return std::abs(to_double(*v) - *target) <= rel_tol * std::abs(*target);
}

/// Converged flags of a value table against the oracle (exact when both
/// sides are rational).
template <class Scalar>
std::pair<bool, bool> judge(const PlanningProblem& p, const ValueTable<Scalar>& v, const Oracle& o) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    if (o.exact) {
      bool all = true;
      for (std::size_t x = 0; x < v.size(); ++x)
        all = all && (!o.exact->value[x] || v.value[x] == o.exact->value[x]);
      const auto x0 = p.initial();
      return {all, !(*o.exact)[x0] || v[x0] == (*o.exact)[x0]};
    }
  }
  bool all = true;
  for (std::size_t x = 0; x < v.size(); ++x) all = all && value_matches(v.value[x], o.values.value[x], o.rel_tol);
  return {all, value_matches(v[p.initial()], o.values[p.initial()], o.rel_tol)};
}

inline std::uint64_t rollout_length(const PlanningProblem& p, const Policy& pi, std::uint64_t seed) {
  std::optional<TransitionModel> model;
  if (!p.is_deterministic()) model.emplace(p);
  RandomStream rng = RandomStream::sub(seed, SubStream::kRollout);
  return policy_path_length(p, pi, model ? &*model : nullptr, rng);
}

template <class Scalar>
TrialMetrics planner_trial(const PlanningProblem& p, Algorithm a, const Oracle& o, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  PlannerResult<Scalar> res;
  if (a == Algorithm::kDijkstra)
    res = dijkstra<Scalar>(p);
  else
    res = value_iteration<Scalar>(p, a == Algorithm::kViSync ? SweepMode::kSynchronous : SweepMode::kAsynchronous);
  TrialMetrics m;
  m.action_count = res.stats.backups;
  std::tie(m.converged_whole_space, m.initial_ctg_converged) = judge(p, res.values, o);
  const auto len = rollout_length(p, extract_policy(p, res.values), seed);
  m.shortest_path = len;
  m.longest_path = len;
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return m;
}

inline TrialMetrics model_free_trial(const PlanningProblem& p, Algorithm a, bool allow_jump, const Oracle& o,
                                     std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  BlackBoxEnvironment env(p, seed);
  const ExploreResult ex = model_free_explore(env, allow_jump);
  const auto learned = a == Algorithm::kModelFreeDijkstra
                           ? dijkstra<Rational>(ex.model).values
                           : value_iteration<Rational>(ex.model, SweepMode::kAsynchronous).values;
  // Map the learned model back onto the true state numbering.
  std::unordered_map<std::uint64_t, std::uint32_t> by_token;
  for (std::uint32_t s = 0; s < ex.tokens.size(); ++s) by_token.emplace(ex.tokens[s], s);
  ValueTable<Rational> values(p.num_states());
  Policy pi;
  pi.action.assign(p.num_states(), kTerminate);
  const Policy model_pi = extract_policy(ex.model, learned);
  for (std::uint32_t x = 0; x < p.num_states(); ++x) {
    auto it = by_token.find(env.token_of(StateId(x)));
    if (it == by_token.end()) continue;
    values.value[x] = learned.value[it->second];
    pi.action[x] = model_pi.action[it->second];
  }
  TrialMetrics m;
  m.action_count = ex.physical_actions;
  m.discover_goal_action_index = env.first_goal_step();
  std::tie(m.converged_whole_space, m.initial_ctg_converged) = judge(p, values, o);
  if (m.initial_ctg_converged) m.initial_ctg_action_index = ex.physical_actions;
  const auto len = rollout_length(p, pi, seed);
  m.shortest_path = len;
  m.longest_path = len;
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return m;
}

/// Exact arithmetic applies to deterministic problems learned with the
/// constant rate 1 from an integer initial value.
inline bool learns_exactly(const PlanningProblem& p, const LearnerConfig& c) {
  return p.is_deterministic() && c.rho.kind == RhoSchedule::Kind::kConstant && c.rho.value == 1.0 &&
         std::floor(c.q_init) == c.q_init;
}

inline TrialMetrics qlearn_trial(const PlanningProblem& p, LearnerConfig cfg, const Oracle& o, std::uint64_t seed) {
  cfg.seed = seed;
  const ConvergenceTarget target{&o.values, o.rel_tol};
  return learns_exactly(p, cfg) ? run_qlearning<Rational>(p, cfg, target).metrics
                                : run_qlearning<double>(p, cfg, target).metrics;
}

inline TrialMetrics run_trial(const ExperimentConfig& cfg, const OracleCache::Entry& e, std::size_t i) {
  const std::uint64_t seed = split_seed(cfg.base_seed, i);
  const auto& p = e.problem;
  switch (cfg.algorithm) {
    case Algorithm::kDijkstra:
    case Algorithm::kViSync:
    case Algorithm::kViAsync:
      return p.is_deterministic() ? planner_trial<Rational>(p, cfg.algorithm, e.oracle, seed)
                                  : planner_trial<double>(p, cfg.algorithm, e.oracle, seed);
    case Algorithm::kModelFreeDijkstra:
    case Algorithm::kModelFreeVi:
      return model_free_trial(p, cfg.algorithm, cfg.allow_jump, e.oracle, seed);
    case Algorithm::kQLearn:
      return qlearn_trial(p, cfg.learner, e.oracle, seed);
  }
  throw Error("InvalidConfig", "unknown algorithm");
}

inline std::string rho_text(const RhoSchedule& r) {
  return r.kind == RhoSchedule::Kind::kConstant ? format_number(r.value) : "n^-" + format_number(r.value);
}

}  // namespace detail

/// Deterministic fold of per-trial metrics, in trial order.
inline ReportRow aggregate(const ExperimentConfig& cfg, const std::vector<TrialMetrics>& trials) {
  ReportRow r;
  r.algorithm = algorithm_name(cfg.algorithm);
  if (cfg.algorithm == Algorithm::kQLearn) {
    r.epsilon = format_number(cfg.learner.epsilon);
    r.rho = detail::rho_text(cfg.learner.rho);
  }
  r.gamma = cfg.gamma;
  std::vector<double> runtime, actions, discover, init_time;
  double converged = 0.0;
  double init_converged = 0.0;
  std::optional<std::uint64_t> shortest, longest;
  for (const auto& m : trials) {
    runtime.push_back(m.wall_time_s);
    actions.push_back(static_cast<double>(m.action_count));
    if (m.discover_goal_action_index) discover.push_back(static_cast<double>(*m.discover_goal_action_index));
    if (m.initial_ctg_converged && m.initial_ctg_action_index)
      init_time.push_back(static_cast<double>(*m.initial_ctg_action_index));
    converged += m.converged_whole_space ? 1.0 : 0.0;
    init_converged += m.initial_ctg_converged ? 1.0 : 0.0;
    if (m.shortest_path && (!shortest || *m.shortest_path < *shortest)) shortest = m.shortest_path;
    if (m.longest_path && (!longest || *m.longest_path > *longest)) longest = m.longest_path;
  }
  r.runtime = Aggregate::of(runtime);
  r.actions = Aggregate::of(actions);
  r.discover = Aggregate::of(discover);
  r.init_ctg_time = Aggregate::of(init_time);
  if (!trials.empty()) {
    r.convergence_pct = 100.0 * converged / static_cast<double>(trials.size());
    r.init_ctg_pct = 100.0 * init_converged / static_cast<double>(trials.size());
  }
  if (shortest) r.shortest = static_cast<double>(*shortest);
  if (longest) r.longest = static_cast<double>(*longest);
  return r;
}

/// A sweep entry: the report, or the error that stopped this config.
struct SweepOutcome {
  std::optional<Report> report;
  std::string error_kind;
  std::string error_message;

  bool ok() const { return report.has_value(); }
};

/// Runs every (config, trial) pair on up to `threads` workers. Results do
/// not depend on the thread count or on completion order: trial seeds are
/// derived from indices and aggregation folds trials in index order.
inline std::vector<SweepOutcome> run_sweep(const std::vector<ExperimentConfig>& configs, std::size_t threads = 1,
                                           OracleCache* cache = nullptr) {
  OracleCache local;
  OracleCache& oracles = cache != nullptr ? *cache : local;
  std::vector<SweepOutcome> out(configs.size());
  std::vector<std::vector<TrialMetrics>> metrics(configs.size());
  std::vector<std::vector<std::optional<Error>>> failures(configs.size());
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    try {
      configs[c].validate();
    } catch (const Error& e) {
      out[c].error_kind = e.kind();
      out[c].error_message = e.what();
      continue;
    }
    metrics[c].resize(configs[c].trials);
    failures[c].resize(configs[c].trials);
    for (std::size_t i = 0; i < configs[c].trials; ++i) jobs.emplace_back(c, i);
  }
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const auto [c, i] = jobs[j];
    try {
      const auto entry = oracles.get(configs[c].problem, configs[c].gamma);
      metrics[c][i] = detail::run_trial(configs[c], *entry, i);
    } catch (const Error& e) {
      failures[c][i] = e;
    } catch (const std::exception& e) {
      failures[c][i] = Error("InternalError", e.what());
    }
  });
  for (std::size_t c = 0; c < configs.size(); ++c) {
    if (!out[c].error_kind.empty()) continue;
    auto failed = std::find_if(failures[c].begin(), failures[c].end(), [](const auto& f) { return f.has_value(); });
    if (failed != failures[c].end()) {
      out[c].error_kind = (*failed)->kind();
      out[c].error_message = (*failed)->what();
      continue;
    }
    out[c].report = Report{aggregate(configs[c], metrics[c]), configs[c].problem, configs[c], std::move(metrics[c])};
  }
  return out;
}

inline Report run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1) {
  auto out = run_sweep({cfg}, threads);
  if (!out.front().ok()) throw Error(out.front().error_kind, out.front().error_message);
  return std::move(*out.front().report);
}

/// Cartesian (epsilon, rho) grid over a qlearn template config.
inline std::vector<ExperimentConfig> epsilon_rho_grid(const ExperimentConfig& base, const std::vector<double>& epsilons,
                                                      const std::vector<RhoSchedule>& rhos) {
  std::vector<ExperimentConfig> out;
  for (double e : epsilons)
    for (const auto& r : rhos) {
      ExperimentConfig c = base;
      c.algorithm = Algorithm::kQLearn;
      c.learner.epsilon = e;
      c.learner.rho = r;
      out.push_back(c);
    }
  return out;
}

namespace detail {

template <class T>
std::vector<T> one_or_many(const nlohmann::json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

}  // namespace detail

/// Reads one config object; `epsilon`, `rho` and `rho_decay` may be arrays,
/// which expand into a grid (epsilon-major).
inline std::vector<ExperimentConfig> configs_from_json(const nlohmann::json& j) {
  using nlohmann::json;
  if (j.is_array()) {
    std::vector<ExperimentConfig> out;
    for (const auto& item : j) {
      auto part = configs_from_json(item);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (j.contains("experiments")) return configs_from_json(j.at("experiments"));
  try {
    ExperimentConfig c;
    c.problem = j.at("problem").get<std::string>();
    c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    c.gamma = j.value("gamma", 1.0);
    c.trials = j.value("trials", std::size_t{1});
    c.base_seed = j.value("base_seed", std::uint64_t{0});
    c.allow_jump = j.value("allow_jump", false);
    if (c.algorithm != Algorithm::kQLearn) return {c};
    const json l = j.value("learner", json::object());
    c.learner.episodes = l.value("episodes", c.learner.episodes);
    c.learner.steps_per_episode = l.value("steps", c.learner.steps_per_episode);
    c.learner.q_init = l.value("q_init", 0.0);
    const std::string plan = l.value("explore", std::string("random"));
    if (plan == "random")
      c.learner.plan = ExplorationPlan::kRandom;
    else if (plan == "pi4")
      c.learner.plan = ExplorationPlan::kPiBase4;
    else
      throw Error("InvalidConfig", "explore must be 'random' or 'pi4'");
    std::vector<RhoSchedule> rhos;
    if (l.contains("rho_decay"))
      for (double w : detail::one_or_many<double>(l.at("rho_decay"))) rhos.push_back(RhoSchedule::decay(w));
    if (l.contains("rho"))
      for (double r : detail::one_or_many<double>(l.at("rho"))) rhos.push_back(RhoSchedule::constant(r));
    if (rhos.empty()) rhos.push_back(RhoSchedule::constant(1.0));
    const auto epsilons = l.contains("epsilon") ? detail::one_or_many<double>(l.at("epsilon")) : std::vector<double>{1.0};
    return epsilon_rho_grid(c, epsilons, rhos);
  } catch (const json::exception& e) {
    throw Error("InvalidConfig", std::string("bad experiment config: ") + e.what());
  }
}

inline std::vector<ExperimentConfig> load_experiment_configs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ProblemLoadError", "cannot open config file '" + path + "'");
  try {
    return configs_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("InvalidConfig", "config '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace plankit
