#pragma once

#include "plankit/metrics.hpp"
#include "plankit/pi_digits.hpp"
#include "plankit/problem.hpp"
#include "plankit/random.hpp"
#include "plankit/rollout.hpp"
#include "plankit/stochastic.hpp"
#include "plankit/value_table.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <type_traits>
#include <vector>

namespace plankit {

/// Learning-rate schedule: a constant rho in (0, 1], or rho = n(x,u)^-omega.
struct RhoSchedule {
  enum class Kind { kConstant, kDecay };
  Kind kind = Kind::kConstant;
  double value = 1.0;  // rho for kConstant, omega for kDecay

  static RhoSchedule constant(double rho) { return {Kind::kConstant, rho}; }
  static RhoSchedule decay(double omega) { return {Kind::kDecay, omega}; }

  friend bool operator==(const RhoSchedule&, const RhoSchedule&) = default;
};

enum class ExplorationPlan {
  kRandom,   // uniform over the non-terminate actions
  kPiBase4,  // successive base-4 digits of pi, taken modulo |U(x)|
};

struct LearnerConfig {
  double epsilon = 1.0;
  RhoSchedule rho;
  std::size_t episodes = 1000;
  std::size_t steps_per_episode = 3000;
  ExplorationPlan plan = ExplorationPlan::kRandom;
  std::uint64_t seed = 0;
  double q_init = 0.0;

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("InvalidConfig", "epsilon must lie in [0, 1]");
    if (rho.kind == RhoSchedule::Kind::kConstant && !(rho.value > 0.0 && rho.value <= 1.0))
      throw Error("InvalidConfig", "rho must lie in (0, 1]");
    if (rho.kind == RhoSchedule::Kind::kDecay && !(rho.value > 0.0))
      throw Error("InvalidConfig", "rho decay exponent must be positive");
    if (episodes < 1) throw Error("InvalidConfig", "episodes must be at least 1");
    if (steps_per_episode < 1) throw Error("InvalidConfig", "steps per episode must be at least 1");
  }
};

/// rho for the n-th visit of a pair (n counts the current visit).
inline double learning_rate(const LearnerConfig& cfg, std::uint64_t n) {
  if (cfg.rho.kind == RhoSchedule::Kind::kConstant) return cfg.rho.value;
  if (n < 1) throw Error("InvalidVisitCount", "learning rate is evaluated for n >= 1");
  return std::pow(static_cast<double>(n), -cfg.rho.value);
}

/// Q(x, u) and visit counts n(x, u) over exactly the pairs of the problem,
/// stored flat in the order of p.actions(x).
template <class Scalar>
class QTable {
 public:
  explicit QTable(const PlanningProblem& p, Scalar init = Scalar(0)) {
    offsets_.reserve(p.num_states() + 1);
    offsets_.push_back(0);
    for (std::uint32_t x = 0; x < p.num_states(); ++x) {
      for (const auto& t : p.actions(StateId(x))) {
        actions_.push_back(t.action);
        q_.push_back(t.action.is_terminate() ? Scalar(0) : init);
      }
      offsets_.push_back(actions_.size());
    }
    visits_.assign(q_.size(), 0);
  }

  std::size_t num_states() const { return offsets_.size() - 1; }
  std::size_t num_actions(StateId x) const { return offsets_[x.index() + 1] - offsets_[x.index()]; }
  ActionId action_at(StateId x, std::size_t slot) const { return actions_[offsets_[x.index()] + slot]; }

  std::size_t slot_of(StateId x, ActionId u) const {
    if (x.index() >= num_states()) throw Error("InvalidPair", "state out of range");
    for (std::size_t k = offsets_[x.index()]; k < offsets_[x.index() + 1]; ++k)
      if (actions_[k] == u) return k - offsets_[x.index()];
    throw Error("InvalidPair", "action " + std::to_string(u.value) + " is not in U(" + std::to_string(x.value) + ")");
  }

  const Scalar& at(StateId x, std::size_t slot) const { return q_[offsets_[x.index()] + slot]; }
  Scalar& at(StateId x, std::size_t slot) { return q_[offsets_[x.index()] + slot]; }
  const Scalar& value(StateId x, ActionId u) const { return at(x, slot_of(x, u)); }
  void set(StateId x, ActionId u, Scalar v) { at(x, slot_of(x, u)) = v; }

  std::uint64_t visits_at(StateId x, std::size_t slot) const { return visits_[offsets_[x.index()] + slot]; }
  std::uint64_t& visits_at(StateId x, std::size_t slot) { return visits_[offsets_[x.index()] + slot]; }
  std::uint64_t visits(StateId x, ActionId u) const { return visits_at(x, slot_of(x, u)); }

  /// Slot of min_u Q(x, u), ties to the lowest ActionId; at goals the
  /// TERMINATE slot wins every tie.
  std::size_t argmin_slot(StateId x) const {
    const std::size_t begin = offsets_[x.index()];
    const std::size_t end = offsets_[x.index() + 1];
    std::size_t best = begin;
    for (std::size_t k = begin + 1; k < end; ++k)
      if (q_[k] < q_[best] || (actions_[k].is_terminate() && !(q_[best] < q_[k]))) best = k;
    return best - begin;
  }

  /// min_u Q(x, u); nullopt for a state without actions.
  std::optional<Scalar> min_value(StateId x) const {
    if (num_actions(x) == 0) return std::nullopt;
    return at(x, argmin_slot(x));
  }

  std::uint64_t total_visits() const {
    std::uint64_t n = 0;
    for (auto v : visits_) n += v;
    return n;
  }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<ActionId> actions_;
  std::vector<Scalar> q_;
  std::vector<std::uint64_t> visits_;
};

/// Q(x,u) <- (1 - rho) Q(x,u) + rho (cost + min_{u'} Q(x', u')), counting
/// the visit. With rho = 1 this is the derandomized update. TERMINATE
/// entries stay pinned at 0 and are not counted.
template <class Scalar>
Scalar q_update(QTable<Scalar>& qt, StateId x, ActionId u, const Scalar& cost, StateId x_next, const Scalar& rho) {
  const std::size_t slot = qt.slot_of(x, u);
  if (x_next.index() >= qt.num_states()) throw Error("InvalidPair", "successor state out of range");
  if (u.is_terminate()) return qt.at(x, slot);
  if (!(rho > Scalar(0) && rho <= Scalar(1))) throw Error("InvalidConfig", "rho must lie in (0, 1]");
  const Scalar next_min = qt.min_value(x_next).value_or(Scalar(0));
  Scalar& q = qt.at(x, slot);
  if (rho == Scalar(1))
    q = cost + next_min;
  else
    q = (Scalar(1) - rho) * q + rho * (cost + next_min);
  ++qt.visits_at(x, slot);
  return q;
}

/// G(x) = min_u Q(x, u).
template <class Scalar>
ValueTable<Scalar> q_to_value(const QTable<Scalar>& qt) {
  ValueTable<Scalar> g(qt.num_states());
  for (std::uint32_t x = 0; x < qt.num_states(); ++x) g.value[x] = qt.min_value(StateId(x));
  return g;
}

/// Greedy policy of a Q-table: argmin with the QTable tie rules.
template <class Scalar>
Policy greedy_policy(const QTable<Scalar>& qt) {
  Policy pi;
  pi.action.assign(qt.num_states(), kTerminate);
  for (std::uint32_t x = 0; x < qt.num_states(); ++x)
    if (qt.num_actions(StateId(x)) > 0) pi.action[x] = qt.action_at(StateId(x), qt.argmin_slot(StateId(x)));
  return pi;
}

/// The independent random streams of one learning trial.
struct LearnerStreams {
  RandomStream coin;
  RandomStream explore;
  RandomStream environment;
  RandomStream rollout;

  static LearnerStreams from_seed(std::uint64_t seed) {
    return {RandomStream::sub(seed, SubStream::kEpsilonCoin), RandomStream::sub(seed, SubStream::kExploration),
            RandomStream::sub(seed, SubStream::kEnvironment), RandomStream::sub(seed, SubStream::kRollout)};
  }
};

/// Position inside the pure exploration plan.
struct ExplorationState {
  ExplorationPlan plan = ExplorationPlan::kRandom;
  std::size_t pi_index = 0;
};

/// epsilon-greedy choice: with probability epsilon the exploration plan's
/// next action, otherwise argmin_u Q(x, u) (lowest ActionId on ties, and
/// TERMINATE at goals). The coin and the exploration draw come from
/// separate streams; the greedy branch consumes no randomness.
template <class Scalar>
ActionId select_action(const QTable<Scalar>& qt, StateId x, double epsilon, ExplorationState& plan,
                       LearnerStreams& streams) {
  const std::size_t n = qt.num_actions(x);
  if (n == 0) return kTerminate;
  if (streams.coin.uniform01() < epsilon) {
    std::size_t moves = 0;
    while (moves < n && !qt.action_at(x, moves).is_terminate()) ++moves;
    if (moves == 0) return kTerminate;
    std::size_t pick = 0;
    if (plan.plan == ExplorationPlan::kRandom)
      pick = streams.explore.uniform_index(moves);
    else
      pick = pi_base4_digit(plan.pi_index++) % moves;
    return qt.action_at(x, pick);
  }
  return qt.action_at(x, qt.argmin_slot(x));
}

struct EpisodeRecord {
  std::uint64_t steps = 0;
  bool goal_reached = false;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

/// Reference cost-to-go for convergence bookkeeping: a state counts as
/// converged when |G(x) - target(x)| <= rel_tol * |target(x)|. States with
/// an UNREACHABLE target are ignored.
struct ConvergenceTarget {
  const ValueTable<double>* values = nullptr;
  double rel_tol = 1e-9;
};

template <class Scalar>
struct LearnRunResult {
  QTable<Scalar> table;
  TrialMetrics metrics;
  std::vector<EpisodeRecord> trace;
  std::optional<std::uint64_t> initial_ctg_episode;        // 0-based episode of first match
  std::optional<std::uint64_t> whole_space_action_index;  // first action after which every state matched
};

namespace detail {

template <class Scalar>
Scalar exact_scalar(double v, const char* what) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return v;
  } else {
    const auto whole = static_cast<std::int64_t>(v);
    if (static_cast<double>(whole) != v)
      throw Error("InvalidConfig", std::string(what) + " must be an integer for exact learning");
    return Scalar(whole);
  }
}

}  // namespace detail

/// Episodic Q-learning. Each episode resets to x_I and repeats
/// select_action -> transition -> q_update until a goal is entered
/// (TERMINATE ends the episode) or the step cap is hit. All episodes are
/// run; non-convergence is reported in the metrics, never thrown.
///
/// Scalar = Rational runs the derandomized update exactly and therefore
/// requires a deterministic problem with constant rho = 1.
template <class Scalar>
LearnRunResult<Scalar> run_qlearning(const PlanningProblem& p, const LearnerConfig& cfg,
                                     ConvergenceTarget target = {}) {
  cfg.validate();
  if constexpr (!std::is_same_v<Scalar, double>) {
    if (!p.is_deterministic() || cfg.rho.kind != RhoSchedule::Kind::kConstant || cfg.rho.value != 1.0)
      throw Error("InvalidConfig", "exact Q-learning needs a deterministic problem and rho = 1");
  }
  const auto started = std::chrono::steady_clock::now();
  LearnRunResult<Scalar> res{QTable<Scalar>(p, detail::exact_scalar<Scalar>(cfg.q_init, "q_init")), {}, {}, {}, {}};
  auto& qt = res.table;
  auto& m = res.metrics;
  res.trace.reserve(cfg.episodes);

  std::optional<TransitionModel> model;
  if (!p.is_deterministic()) model.emplace(p);
  LearnerStreams streams = LearnerStreams::from_seed(cfg.seed);
  ExplorationState plan{cfg.plan, 0};

  // Incremental convergence bookkeeping: only the updated state can change.
  const std::size_t n = p.num_states();
  std::vector<char> matched(n, 1);
  std::size_t mismatches = 0;
  auto state_matches = [&](StateId s) {
    const auto& t = (*target.values)[s];
    if (!t) return true;
    const auto v = qt.min_value(s);
    if (!v) return false;
    return std::abs(to_double(*v) - *t) <= target.rel_tol * std::abs(*t);
  };
  if (target.values != nullptr) {
    for (std::uint32_t x = 0; x < n; ++x) {
      matched[x] = state_matches(StateId(x)) ? 1 : 0;
      mismatches += matched[x] == 0 ? 1 : 0;
    }
    if (matched[p.initial().index()] != 0) {
      m.initial_ctg_action_index = 0;
      res.initial_ctg_episode = 0;
    }
    if (mismatches == 0) res.whole_space_action_index = 0;
  }

  const Scalar fixed_rho = detail::exact_scalar<Scalar>(cfg.rho.kind == RhoSchedule::Kind::kConstant ? cfg.rho.value : 1.0, "rho");
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    StateId x = p.initial();
    EpisodeRecord rec;
    while (!p.is_goal(x) && rec.steps < cfg.steps_per_episode) {
      const ActionId u = select_action(qt, x, cfg.epsilon, plan, streams);
      if (u.is_terminate()) break;  // isolated state: nothing to do
      const std::size_t slot = qt.slot_of(x, u);
      const Transition& tr = p.actions(x)[slot];
      const StateId next = model ? sample_outcome(model->at(x, slot), streams.environment) : tr.next;
      Scalar rho = fixed_rho;
      if constexpr (std::is_same_v<Scalar, double>) rho = learning_rate(cfg, qt.visits_at(x, slot) + 1);
      q_update(qt, x, u, scalar_from<Scalar>(tr.cost), next, rho);
      ++m.action_count;
      ++rec.steps;
      if (p.is_goal(next) && !m.discover_goal_action_index) m.discover_goal_action_index = m.action_count;
      if (target.values != nullptr) {
        const char now = state_matches(x) ? 1 : 0;
        if (now != matched[x.index()]) {
          mismatches = now != 0 ? mismatches - 1 : mismatches + 1;
          matched[x.index()] = now;
        }
        if (now != 0 && x == p.initial() && !m.initial_ctg_action_index) {
          m.initial_ctg_action_index = m.action_count;
          res.initial_ctg_episode = ep;
        }
        if (mismatches == 0 && !res.whole_space_action_index) res.whole_space_action_index = m.action_count;
      }
      x = next;
    }
    rec.goal_reached = p.is_goal(x);
    res.trace.push_back(rec);
  }

  if (target.values != nullptr) {
    m.converged_whole_space = mismatches == 0;
    m.initial_ctg_converged = matched[p.initial().index()] != 0;
  }
  const std::uint64_t path = policy_path_length(p, greedy_policy(qt), model ? &*model : nullptr, streams.rollout);
  m.shortest_path = path;
  m.longest_path = path;
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return res;
}

}  // namespace plankit
