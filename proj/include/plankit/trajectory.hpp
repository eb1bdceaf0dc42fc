#pragma once

#include "plankit/problem.hpp"
#include "plankit/stochastic.hpp"

#include <cmath>
#include <vector>

namespace plankit {

/// A state/action sequence with the per-step costs that were incurred.
/// Invariant: actions.size() + 1 == states.size() == costs.size() + 1.
struct Trajectory {
  std::vector<StateId> states;
  std::vector<ActionId> actions;
  std::vector<Rational> costs;

  /// Appends one step of the deterministic model.
  void push(const PlanningProblem& p, ActionId u) {
    const Transition& t = p.transition(states.back(), u);
    actions.push_back(u);
    costs.push_back(t.cost);
    states.push_back(t.next);
  }

  static Trajectory from_actions(const PlanningProblem& p, StateId start, const std::vector<ActionId>& us) {
    Trajectory t;
    t.states.push_back(start);
    for (ActionId u : us) t.push(p, u);
    return t;
  }
};

/// Throws InconsistentTrajectory unless every step is possible in p (the
/// successor is in the outcome support) and costs match l(x,u).
inline void check_trajectory(const PlanningProblem& p, const Trajectory& t) {
  if (t.states.empty() || t.actions.size() + 1 != t.states.size() || t.costs.size() != t.actions.size())
    throw Error("InconsistentTrajectory", "trajectory lengths do not line up");
  for (std::size_t k = 0; k < t.actions.size(); ++k) {
    const Transition* tr = p.find(t.states[k], t.actions[k]);
    if (tr == nullptr)
      throw Error("InconsistentTrajectory", "step " + std::to_string(k) + " uses an unavailable action");
    if (tr->cost != t.costs[k])
      throw Error("InconsistentTrajectory", "step " + std::to_string(k) + " has the wrong cost");
    bool possible = tr->next == t.states[k + 1];
    if (!possible && !p.is_deterministic() && !tr->action.is_terminate())
      for (const auto& o : stochastic_outcomes(p, t.states[k], t.actions[k]))
        possible = possible || o.state == t.states[k + 1];
    if (!possible)
      throw Error("InconsistentTrajectory", "step " + std::to_string(k) + " lands on an impossible state");
  }
}

/// Stage-additive cost: sum of l(x_k, u_k), nothing accumulates after TERMINATE.
inline Rational trajectory_cost(const PlanningProblem& p, const Trajectory& t) {
  check_trajectory(p, t);
  Rational total(0);
  for (std::size_t k = 0; k < t.actions.size(); ++k) {
    if (t.actions[k].is_terminate()) break;
    total += t.costs[k];
  }
  return total;
}

/// sum_{k=0}^{K} alpha^k l(x_k, u_k), truncated to the trajectory length.
inline double discounted_cost(const PlanningProblem& p, const Trajectory& t, double alpha, std::size_t horizon) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("InvalidDiscount", "discount factor must lie in (0, 1)");
  check_trajectory(p, t);
  double total = 0.0;
  double weight = 1.0;
  for (std::size_t k = 0; k < t.actions.size() && k <= horizon; ++k) {
    total += weight * to_double(t.costs[k]);
    weight *= alpha;
  }
  return total;
}

/// (1/N) sum of the N step costs; finite-horizon estimate of the average cost.
inline Rational truncated_average_cost(const PlanningProblem& p, const Trajectory& t) {
  check_trajectory(p, t);
  if (t.actions.empty()) throw Error("EmptyTrajectory", "average cost needs at least one step");
  Rational total(0);
  for (const auto& c : t.costs) total += c;
  return total / static_cast<std::int64_t>(t.costs.size());
}

}  // namespace plankit
