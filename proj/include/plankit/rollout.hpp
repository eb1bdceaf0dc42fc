#pragma once

#include "plankit/metrics.hpp"
#include "plankit/stochastic.hpp"
#include "plankit/value_table.hpp"

#include <vector>

namespace plankit {

/// Number of actions a policy needs to get from x_I to a goal, or kPathCap
/// when it does not get there within kPathCap - 1 steps. Deterministic
/// rollouts stop early on the first revisited state; stochastic ones sample
/// from `model` with `rng`.
inline std::uint64_t policy_path_length(const PlanningProblem& p, const Policy& pi, const TransitionModel* model,
                                        RandomStream& rng) {
  StateId x = p.initial();
  std::uint64_t steps = 0;
  std::vector<char> visited;
  if (p.is_deterministic()) visited.assign(p.num_states(), 0);
  while (!p.is_goal(x)) {
    if (steps + 1 >= kPathCap) return kPathCap;
    const ActionId u = pi(x);
    if (u.is_terminate()) return kPathCap;
    if (p.is_deterministic()) {
      if (visited[x.index()] != 0) return kPathCap;
      visited[x.index()] = 1;
      x = p.successor(x, u);
    } else {
      auto acts = p.actions(x);
      std::size_t slot = 0;
      while (acts[slot].action != u) ++slot;
      x = sample_outcome(model->at(x, slot), rng);
    }
    ++steps;
  }
  return steps;
}

}  // namespace plankit
