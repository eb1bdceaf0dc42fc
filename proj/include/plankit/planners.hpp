#pragma once

#include "plankit/problem.hpp"
#include "plankit/stochastic.hpp"
#include "plankit/value_table.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <type_traits>
#include <unordered_set>
#include <vector>

namespace plankit {

enum class SweepMode {
  kSynchronous,   // Jacobi: every backup of a sweep reads the previous sweep's table
  kAsynchronous,  // Gauss-Seidel: in place, ascending state index
};

struct ViOptions {
  double tol = 1e-9;  // stochastic stopping threshold on the max-norm residual
  std::uint64_t max_sweeps = 100000;
};

template <class Scalar>
struct PlannerResult {
  ValueTable<Scalar> values;
  PlannerStats stats;
};

namespace detail {

/// States from which some policy reaches X_G with probability one, together
/// with the per-pair flag "support stays inside that set".
struct ProperSet {
  std::vector<char> state;
  std::vector<std::vector<char>> action_ok;
};

inline ProperSet proper_states(const PlanningProblem& p, const TransitionModel& model) {
  const std::size_t n = p.num_states();
  ProperSet ps;
  ps.state.assign(n, 1);
  ps.action_ok.resize(n);
  for (std::uint32_t x = 0; x < n; ++x) ps.action_ok[x].assign(p.actions(StateId(x)).size(), 1);
  for (;;) {
    for (std::uint32_t x = 0; x < n; ++x) {
      auto acts = p.actions(StateId(x));
      for (std::size_t k = 0; k < acts.size(); ++k) {
        bool inside = true;
        for (const auto& o : model.at(StateId(x), k)) inside = inside && ps.state[o.state.index()] != 0;
        ps.action_ok[x][k] = inside ? 1 : 0;
      }
    }
    // Backward closure from the goals through admissible actions.
    std::vector<char> reach(n, 0);
    for (StateId g : p.goals()) reach[g.index()] = 1;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::uint32_t x = 0; x < n; ++x) {
        if (reach[x] != 0 || ps.state[x] == 0) continue;
        auto acts = p.actions(StateId(x));
        for (std::size_t k = 0; k < acts.size() && reach[x] == 0; ++k) {
          if (ps.action_ok[x][k] == 0) continue;
          for (const auto& o : model.at(StateId(x), k))
            if (reach[o.state.index()] != 0) {
              reach[x] = 1;
              grew = true;
              break;
            }
        }
      }
    }
    if (reach == ps.state) return ps;
    ps.state = std::move(reach);
  }
}

template <class Scalar>
std::optional<Scalar> deterministic_backup(const PlanningProblem& p, StateId x,
                                           const std::vector<std::optional<Scalar>>& v,
                                           std::uint64_t& backups) {
  std::optional<Scalar> best;
  for (const auto& t : p.actions(x)) {
    ++backups;
    const auto& next = v[t.next.index()];
    if (!next) continue;
    Scalar cand = scalar_from<Scalar>(t.cost) + *next;
    if (!best || cand < *best) best = cand;
  }
  return best;
}

inline double change_of(const std::optional<double>& before, const std::optional<double>& after) {
  if (before.has_value() != after.has_value()) return std::numeric_limits<double>::infinity();
  if (!before) return 0.0;
  return std::abs(*after - *before);
}
inline double change_of(const std::optional<Rational>& before, const std::optional<Rational>& after) {
  if (before.has_value() != after.has_value()) return std::numeric_limits<double>::infinity();
  if (!before) return 0.0;
  return std::abs(to_double(*after - *before));
}

template <class Scalar>
PlannerResult<Scalar> deterministic_value_iteration(const PlanningProblem& p, SweepMode mode,
                                                    const ViOptions& opts,
                                                    std::vector<ValueTable<Scalar>>* history = nullptr) {
  const std::size_t n = p.num_states();
  PlannerResult<Scalar> res;
  res.values = ValueTable<Scalar>(n);
  auto& v = res.values.value;
  for (StateId g : p.goals()) v[g.index()] = Scalar(0);
  std::vector<std::optional<Scalar>> previous;
  for (;;) {
    if (res.stats.sweeps >= opts.max_sweeps)
      throw Error("MaxSweepsExceeded", "value iteration did not stabilize within " +
                                           std::to_string(opts.max_sweeps) + " sweeps");
    ++res.stats.sweeps;
    bool changed = false;
    double residual = 0.0;
    if (mode == SweepMode::kSynchronous) previous = v;
    const auto& source = mode == SweepMode::kSynchronous ? previous : v;
    for (std::uint32_t x = 0; x < n; ++x) {
      auto updated = deterministic_backup<Scalar>(p, StateId(x), source, res.stats.backups);
      if (updated != v[x]) {
        residual = std::max(residual, change_of(v[x], updated));
        v[x] = updated;
        changed = true;
      }
    }
    res.stats.residual = residual;
    if (history != nullptr) history->push_back(res.values);
    if (!changed) return res;
  }
}

inline PlannerResult<double> stochastic_value_iteration(const PlanningProblem& p, SweepMode mode,
                                                        const ViOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error("InvalidTolerance", "stochastic value iteration needs tol > 0");
  const std::size_t n = p.num_states();
  const TransitionModel model(p);
  const detail::ProperSet proper = detail::proper_states(p, model);
  PlannerResult<double> res;
  res.values = ValueTable<double>(n);
  auto& v = res.values.value;
  for (std::size_t x = 0; x < n; ++x)
    if (proper.state[x] != 0) v[x] = 0.0;
  std::vector<std::optional<double>> previous;
  for (;;) {
    if (res.stats.sweeps >= opts.max_sweeps)
      throw Error("MaxSweepsExceeded", "stochastic value iteration did not reach tol within " +
                                           std::to_string(opts.max_sweeps) + " sweeps");
    ++res.stats.sweeps;
    if (mode == SweepMode::kSynchronous) previous = v;
    const auto& source = mode == SweepMode::kSynchronous ? previous : v;
    double residual = 0.0;
    for (std::uint32_t x = 0; x < n; ++x) {
      if (proper.state[x] == 0) continue;
      auto acts = p.actions(StateId(x));
      std::optional<double> best;
      for (std::size_t k = 0; k < acts.size(); ++k) {
        ++res.stats.backups;
        if (proper.action_ok[x][k] == 0) continue;
        double q = to_double(acts[k].cost);
        for (const auto& o : model.at(StateId(x), k)) q += o.probability * *source[o.state.index()];
        if (!best || q < *best) best = q;
      }
      residual = std::max(residual, std::abs(*best - *v[x]));
      v[x] = best;
    }
    res.stats.residual = residual;
    if (residual < opts.tol) return res;
  }
}

}  // namespace detail

/// Value iteration to the fixed point of the Bellman backup
///   G(x) = min_{u in U(x)} { l(x,u) + E[G(x')] }.
///
/// Deterministic problems start from 0 at goals and UNREACHABLE elsewhere
/// and iterate until no value changes (exact with Scalar = Rational).
/// Stochastic problems (Scalar = double) restrict to the states that reach
/// X_G almost surely, start from 0 and stop once the residual drops below
/// opts.tol. Throws MaxSweepsExceeded past opts.max_sweeps.
template <class Scalar>
PlannerResult<Scalar> value_iteration(const PlanningProblem& p, SweepMode mode, const ViOptions& opts = {}) {
  if (p.is_deterministic()) return detail::deterministic_value_iteration<Scalar>(p, mode, opts);
  if constexpr (std::is_same_v<Scalar, double>) {
    return detail::stochastic_value_iteration(p, mode, opts);
  } else {
    throw Error("StochasticProblem", "exact value iteration needs a deterministic problem");
  }
}

/// Deterministic value iteration that also records the table after every
/// sweep (for inspecting convergence behaviour).
template <class Scalar>
PlannerResult<Scalar> value_iteration_history(const PlanningProblem& p, SweepMode mode,
                                              std::vector<ValueTable<Scalar>>& history,
                                              const ViOptions& opts = {}) {
  if (!p.is_deterministic()) throw Error("StochasticProblem", "sweep history is recorded for deterministic problems");
  return detail::deterministic_value_iteration<Scalar>(p, mode, opts, &history);
}

/// Dijkstra from the goal set over reversed edges. Each edge is relaxed at
/// most once, so `backups` never exceeds value iteration's.
template <class Scalar = Rational>
PlannerResult<Scalar> dijkstra(const PlanningProblem& p) {
  if (!p.is_deterministic()) throw Error("StochasticProblem", "Dijkstra needs a deterministic problem");
  const std::size_t n = p.num_states();
  struct Edge {
    StateId from;
    Scalar cost;
  };
  std::vector<std::vector<Edge>> preds(n);
  for (std::uint32_t x = 0; x < n; ++x)
    for (const auto& t : p.actions(StateId(x)))
      if (!t.action.is_terminate()) preds[t.next.index()].push_back({StateId(x), scalar_from<Scalar>(t.cost)});

  PlannerResult<Scalar> res;
  res.values = ValueTable<Scalar>(n);
  auto& v = res.values.value;
  using Entry = std::pair<Scalar, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (StateId g : p.goals()) {
    v[g.index()] = Scalar(0);
    open.emplace(Scalar(0), g.value);
  }
  std::vector<char> closed(n, 0);
  while (!open.empty()) {
    auto [d, y] = open.top();
    open.pop();
    if (closed[y] != 0) continue;
    closed[y] = 1;
    for (const auto& e : preds[y]) {
      ++res.stats.backups;
      Scalar cand = d + e.cost;
      auto& cur = v[e.from.index()];
      if (!cur || cand < *cur) {
        cur = cand;
        open.emplace(cand, e.from.value);
      }
    }
  }
  return res;
}

/// Expected cost of applying u at x and then following `g`; nullopt when
/// some outcome is UNREACHABLE.
template <class Scalar>
std::optional<Scalar> action_value(const PlanningProblem& p, const ValueTable<Scalar>& g, StateId x,
                                   const Transition& t) {
  if (p.is_deterministic() || t.action.is_terminate()) {
    const auto& next = g[t.next];
    if (!next) return std::nullopt;
    return scalar_from<Scalar>(t.cost) + *next;
  }
  if constexpr (std::is_same_v<Scalar, double>) {
    double q = to_double(t.cost);
    for (const auto& o : stochastic_outcomes(p, x, t.action)) {
      const auto& next = g[o.state];
      if (!next) return std::nullopt;
      q += o.probability * *next;
    }
    return q;
  } else {
    throw Error("StochasticProblem", "exact action values need a deterministic problem");
  }
}

/// pi(x) = argmin_u { l(x,u) + E[G(x')] }, ties to the lowest ActionId;
/// goals always TERMINATE.
template <class Scalar>
Policy extract_policy(const PlanningProblem& p, const ValueTable<Scalar>& g) {
  Policy pi;
  pi.action.assign(p.num_states(), kTerminate);
  for (std::uint32_t x = 0; x < p.num_states(); ++x) {
    StateId s(x);
    if (p.is_goal(s)) continue;
    auto acts = p.actions(s);
    if (acts.empty()) continue;
    pi.action[x] = acts.front().action;
    std::optional<Scalar> best;
    for (const auto& t : acts) {
      auto q = action_value(p, g, s, t);
      if (q && (!best || *q < *best)) {
        best = q;
        pi.action[x] = t.action;
      }
    }
  }
  return pi;
}

/// Outcome of rolling a fixed policy out on the deterministic model.
struct PolicyEvaluation {
  bool terminates = false;  // false == NONTERMINATING
  Rational cost{0};
  std::size_t steps = 0;
};

/// L(pi, x) by deterministic rollout. A revisited state means the rollout
/// cycles forever without terminating, i.e. infinite true cost.
inline PolicyEvaluation evaluate_policy(const PlanningProblem& p, const Policy& pi, StateId x,
                                        std::size_t max_steps = 1000000) {
  if (!p.is_deterministic()) throw Error("StochasticProblem", "policy rollout needs a deterministic problem");
  PolicyEvaluation out;
  std::vector<char> visited(p.num_states(), 0);
  while (out.steps <= max_steps) {
    const ActionId u = pi(x);
    if (u.is_terminate()) {
      out.terminates = p.is_goal(x);
      return out;
    }
    if (visited[x.index()] != 0) return out;
    visited[x.index()] = 1;
    const Transition& t = p.transition(x, u);
    out.cost += t.cost;
    ++out.steps;
    x = t.next;
  }
  return out;
}

}  // namespace plankit
