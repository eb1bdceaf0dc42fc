#pragma once

#include "plankit/planners.hpp"

#include <vector>

namespace plankit {

struct DualityReport {
  bool holds = false;
  ValueTable<Rational> cost_to_go;    // min-cost optimum
  ValueTable<Rational> reward_to_go;  // max-reward optimum with reward = -cost
  std::vector<std::vector<ActionId>> argmin_sets;
  std::vector<std::vector<ActionId>> argmax_sets;
};

namespace detail {

/// R(x) = max_u { -l(x,u) + R(f(x,u)) }, 0 at goals, iterated from -inf
/// until stable. Independent of the min-cost code path on purpose of being
/// a second route to the same optimum.
inline ValueTable<Rational> max_reward_values(const PlanningProblem& p) {
  ValueTable<Rational> r(p.num_states());
  for (StateId g : p.goals()) r[g] = Rational(0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t x = 0; x < p.num_states(); ++x) {
      std::optional<Rational> best;
      for (const auto& t : p.actions(StateId(x))) {
        const auto& next = r[t.next];
        if (!next) continue;
        Rational cand = -t.cost + *next;
        if (!best || cand > *best) best = cand;
      }
      if (best != r.value[x]) {
        r.value[x] = best;
        changed = true;
      }
    }
  }
  return r;
}

}  // namespace detail

/// Checks that minimizing cost and maximizing reward = -cost pick the same
/// action sets at every state, and that the two optimal tables are exact
/// negations of each other.
inline DualityReport verify_cost_reward_duality(const PlanningProblem& p) {
  if (!p.is_deterministic()) throw Error("StochasticProblem", "duality check runs on deterministic problems");
  DualityReport rep;
  rep.cost_to_go = value_iteration<Rational>(p, SweepMode::kAsynchronous).values;
  rep.reward_to_go = detail::max_reward_values(p);
  rep.holds = true;
  for (std::uint32_t x = 0; x < p.num_states(); ++x) {
    const auto& g = rep.cost_to_go.value[x];
    const auto& r = rep.reward_to_go.value[x];
    if (g.has_value() != r.has_value() || (g && *g != -*r)) rep.holds = false;
    std::vector<ActionId> mins;
    std::vector<ActionId> maxs;
    for (const auto& t : p.actions(StateId(x))) {
      const auto& gn = rep.cost_to_go[t.next];
      const auto& rn = rep.reward_to_go[t.next];
      if (g && gn && t.cost + *gn == *g) mins.push_back(t.action);
      if (r && rn && -t.cost + *rn == *r) maxs.push_back(t.action);
    }
    if (mins != maxs) rep.holds = false;
    rep.argmin_sets.push_back(std::move(mins));
    rep.argmax_sets.push_back(std::move(maxs));
  }
  return rep;
}

}  // namespace plankit
