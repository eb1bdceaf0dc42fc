#pragma once

#include "plankit/cycles.hpp"
#include "plankit/value_table.hpp"

#include <cmath>
#include <functional>
#include <optional>

namespace plankit {

inline constexpr ActionId kTrapLeft{0};   // "-1"
inline constexpr ActionId kTrapRight{1};  // "+1"

/// Six-state chain 0..5 with goal 5, moves -1/+1 clamped to the chain, and
/// cost x+1 for either move at x. The cheapest loop sits at 0, the goal at
/// the expensive end.
inline PlanningProblem build_discount_trap_problem() {
  constexpr std::uint32_t kStates = 6;
  ProblemBuilder b(kStates);
  for (std::uint32_t x = 0; x + 1 < kStates; ++x) {
    const Rational cost(static_cast<std::int64_t>(x) + 1);
    b.add_action(StateId(x), kTrapLeft, StateId(x == 0 ? 0 : x - 1), cost);
    b.add_action(StateId(x), kTrapRight, StateId(x + 1), cost);
  }
  b.set_initial(StateId(0)).add_goal(StateId(kStates - 1));
  b.set_action_names({"-1", "+1"}).set_name("discount-trap");
  return std::move(b).build();
}

struct DiscountedSolution {
  ValueTable<double> values;
  Policy policy;
  std::uint64_t sweeps = 0;
};

/// G(x) <- min_u [ l(x,u) + alpha * G(f(x,u)) ], from G = 0 until the
/// max-norm change drops below `tol`. Ties go to the lowest ActionId.
inline DiscountedSolution discounted_value_iteration(const PlanningProblem& p, double alpha, double tol = 1e-12) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("InvalidDiscount", "discount factor must lie in (0, 1)");
  if (!p.is_deterministic()) throw Error("StochasticProblem", "discounted iteration runs on deterministic problems");
  const std::size_t n = p.num_states();
  std::vector<double> g(n, 0.0);
  DiscountedSolution out;
  constexpr std::uint64_t kMaxSweeps = 10'000'000;
  for (;;) {
    double residual = 0.0;
    for (std::uint32_t x = 0; x < n; ++x) {
      auto acts = p.actions(StateId(x));
      if (acts.empty()) continue;
      double best = INFINITY;
      for (const auto& t : acts) best = std::min(best, to_double(t.cost) + alpha * g[t.next.index()]);
      residual = std::max(residual, std::abs(best - g[x]));
      g[x] = best;
    }
    ++out.sweeps;
    if (residual < tol) break;
    if (out.sweeps >= kMaxSweeps) throw Error("MaxSweepsExceeded", "discounted iteration did not settle");
  }
  out.values = ValueTable<double>(n);
  out.policy.action.assign(n, kTerminate);
  for (std::uint32_t x = 0; x < n; ++x) {
    auto acts = p.actions(StateId(x));
    if (acts.empty()) continue;
    out.values.value[x] = g[x];
    if (p.is_goal(StateId(x))) continue;
    double best = INFINITY;
    for (const auto& t : acts) {
      const double q = to_double(t.cost) + alpha * g[t.next.index()];
      if (q < best) {
        best = q;
        out.policy.action[x] = t.action;
      }
    }
  }
  return out;
}

struct DiscountReport {
  double alpha = 0.0;
  Policy discounted_optimal_policy;
  bool reaches_goal = false;
  std::optional<Rational> true_cost;  // nullopt == infinite
  std::optional<Cycle> cycle;
};

/// Rolls the discounted-optimal policy out from x_I and reports its
/// undiscounted cost, or the cycle it gets stuck in.
inline DiscountReport discount_trap_report(const PlanningProblem& p, double alpha) {
  DiscountReport rep;
  rep.alpha = alpha;
  rep.discounted_optimal_policy = discounted_value_iteration(p, alpha).policy;
  const Policy& pi = rep.discounted_optimal_policy;

  std::vector<std::optional<std::size_t>> first_seen(p.num_states());
  std::vector<StateId> states{p.initial()};
  std::vector<ActionId> actions;
  std::vector<Rational> costs;
  StateId x = p.initial();
  for (;;) {
    if (p.is_goal(x)) {
      rep.reaches_goal = true;
      Rational total(0);
      for (const auto& c : costs) total += c;
      rep.true_cost = total;
      return rep;
    }
    first_seen[x.index()] = states.size() - 1;
    const ActionId u = pi(x);
    if (u.is_terminate()) return rep;  // stuck on a dead end: infinite cost, no cycle
    const Transition& t = p.transition(x, u);
    actions.push_back(u);
    costs.push_back(t.cost);
    states.push_back(t.next);
    x = t.next;
    if (first_seen[x.index()]) {
      const std::size_t i = *first_seen[x.index()];
      Cycle c;
      c.states.assign(states.begin() + static_cast<std::ptrdiff_t>(i), states.end());
      c.actions.assign(actions.begin() + static_cast<std::ptrdiff_t>(i), actions.end());
      for (std::size_t k = i; k < costs.size(); ++k) c.total_cost += costs[k];
      for (StateId s : c.states) c.contains_goal = c.contains_goal || p.is_goal(s);
      rep.cycle = std::move(c);
      return rep;
    }
  }
}

/// Discounted cost of looping -1 at state 0 forever: 1 / (1 - alpha).
inline double trap_loop_cost(double alpha) { return 1.0 / (1.0 - alpha); }

/// Discounted cost of walking 0 -> 5: sum_{i=0}^{4} alpha^i (i + 1).
inline double trap_goal_cost(double alpha) {
  double total = 0.0;
  double a = 1.0;
  for (int i = 0; i < 5; ++i) {
    total += a * (i + 1);
    a *= alpha;
  }
  return total;
}

/// Bisection for the point where `loops` turns from true to false on
/// [lo, hi]; requires loops(lo) && !loops(hi).
inline double bisect_threshold(const std::function<bool(double)>& loops, double lo, double hi, int iterations = 60) {
  if (!loops(lo) || loops(hi)) throw Error("InvalidBracket", "threshold is not bracketed");
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    (loops(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace plankit
