#pragma once

#include "plankit/problem.hpp"
#include "plankit/random.hpp"

#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

namespace plankit {

/// What the robot senses: an opaque label that identifies the state, and
/// whether it is a goal.
struct Observation {
  std::uint64_t token = 0;
  bool is_goal = false;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct StepResult {
  Observation observation;
  Rational cost;
};

/// A deterministic problem hidden behind reset / step / jump. The learner
/// only ever sees observation tokens, the actions offered at the current
/// state and the cost of each step it takes.
class BlackBoxEnvironment {
 public:
  explicit BlackBoxEnvironment(const PlanningProblem& p, std::uint64_t salt = 0x5eed)
      : problem_(&p), salt_(salt), current_(p.initial()) {
    if (!p.is_deterministic())
      throw Error("StochasticProblem", "model-free exploration assumes a deterministic system");
    for (std::uint32_t x = 0; x < p.num_states(); ++x) by_token_.emplace(token_of(StateId(x)), StateId(x));
  }

  Observation reset() {
    current_ = problem_->initial();
    ++resets_;
    return observe();
  }

  Observation observe() const { return {token_of(current_), problem_->is_goal(current_)}; }

  std::vector<ActionId> available_actions() const {
    std::vector<ActionId> out;
    for (const auto& t : problem_->actions(current_)) out.push_back(t.action);
    return out;
  }

  StepResult step(ActionId u) {
    const Transition& t = problem_->transition(current_, u);
    current_ = t.next;
    ++steps_;
    if (!first_goal_step_ && problem_->is_goal(current_)) first_goal_step_ = steps_;
    return {observe(), t.cost};
  }

  /// Physical placement onto a previously observed state.
  Observation jump_to(std::uint64_t token) {
    auto it = by_token_.find(token);
    if (it == by_token_.end()) throw Error("UnknownObservation", "cannot jump to an unseen state");
    if (it->second != current_) {
      current_ = it->second;
      ++jumps_;
    }
    return observe();
  }

  std::uint64_t token_of(StateId x) const { return mix64(salt_ ^ (0xA5A5A5A5ULL + x.value)); }

  std::uint64_t steps() const { return steps_; }
  std::uint64_t jumps() const { return jumps_; }
  std::uint64_t resets() const { return resets_; }
  /// 1-based index of the step that first entered a goal.
  std::optional<std::uint64_t> first_goal_step() const { return first_goal_step_; }

 private:
  const PlanningProblem* problem_;
  std::uint64_t salt_;
  StateId current_;
  std::unordered_map<std::uint64_t, StateId> by_token_;
  std::uint64_t steps_ = 0;
  std::uint64_t jumps_ = 0;
  std::uint64_t resets_ = 0;
  std::optional<std::uint64_t> first_goal_step_;
};

struct ExploreResult {
  PlanningProblem model;                // states numbered in discovery order, x_I = 0
  std::vector<std::uint64_t> tokens;    // observation token of each model state
  std::uint64_t physical_actions = 0;   // every step taken, TERMINATE probes included
  std::uint64_t jumps = 0;
};

/// Discovers f by trying every (x, u) exactly once, then returns the
/// reconstructed problem.
///
/// With allow_jump the robot is placed on each discovered state and probes
/// its actions, so physical_actions equals the number of pairs. Without
/// jumping it walks: untried actions at the current state first, otherwise
/// the shortest known route to the nearest state that still has one.
/// Throws NotStronglyConnected if untried pairs become unreachable.
inline ExploreResult model_free_explore(BlackBoxEnvironment& env, bool allow_jump) {
  struct Known {
    Observation obs;
    std::vector<ActionId> actions;
    std::vector<std::optional<std::pair<std::uint32_t, Rational>>> outcome;  // per action slot
    std::size_t untried = 0;
  };
  std::vector<Known> states;
  std::unordered_map<std::uint64_t, std::uint32_t> index;
  const std::uint64_t steps_before = env.steps();
  const std::uint64_t jumps_before = env.jumps();

  auto register_current = [&](const Observation& obs) -> std::uint32_t {
    auto it = index.find(obs.token);
    if (it != index.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(states.size());
    Known k;
    k.obs = obs;
    k.actions = env.available_actions();
    k.outcome.resize(k.actions.size());
    k.untried = k.actions.size();
    states.push_back(std::move(k));
    index.emplace(obs.token, id);
    return id;
  };
  auto probe = [&](std::uint32_t from, std::size_t slot) -> std::uint32_t {
    StepResult r = env.step(states[from].actions[slot]);
    const std::uint32_t to = register_current(r.observation);
    states[from].outcome[slot] = std::make_pair(to, r.cost);
    --states[from].untried;
    return to;
  };

  std::uint32_t here = register_current(env.reset());
  if (allow_jump) {
    for (std::uint32_t s = 0; s < states.size(); ++s) {
      for (std::size_t slot = 0; slot < states[s].actions.size(); ++slot) {
        env.jump_to(states[s].obs.token);
        probe(s, slot);
      }
    }
  } else {
    for (;;) {
      if (states[here].untried > 0) {
        std::size_t slot = 0;
        while (states[here].outcome[slot]) ++slot;
        here = probe(here, slot);
        continue;
      }
      // BFS over known edges to the nearest state with an untried action.
      std::vector<std::int64_t> parent(states.size(), -1);
      std::vector<std::size_t> via(states.size(), 0);
      std::deque<std::uint32_t> queue{here};
      parent[here] = here;
      std::optional<std::uint32_t> target;
      while (!queue.empty() && !target) {
        const std::uint32_t s = queue.front();
        queue.pop_front();
        for (std::size_t slot = 0; slot < states[s].outcome.size(); ++slot) {
          if (!states[s].outcome[slot]) continue;
          const std::uint32_t t = states[s].outcome[slot]->first;
          if (parent[t] >= 0) continue;
          parent[t] = s;
          via[t] = slot;
          if (states[t].untried > 0) {
            target = t;
            break;
          }
          queue.push_back(t);
        }
      }
      if (!target) {
        for (const auto& k : states)
          if (k.untried > 0)
            throw Error("NotStronglyConnected",
                        "untried actions remain on states that cannot be reached by walking");
        break;
      }
      std::vector<std::size_t> route;
      for (std::uint32_t s = *target; s != here; s = static_cast<std::uint32_t>(parent[s])) route.push_back(via[s]);
      std::uint32_t at = here;
      for (auto it = route.rbegin(); it != route.rend(); ++it) {
        env.step(states[at].actions[*it]);
        at = states[at].outcome[*it]->first;
      }
      here = at;
    }
  }

  ProblemBuilder b(states.size());
  b.set_initial(StateId(0));
  ExploreResult out{PlanningProblem{}, {}, env.steps() - steps_before, env.jumps() - jumps_before};
  for (std::uint32_t s = 0; s < states.size(); ++s) {
    out.tokens.push_back(states[s].obs.token);
    if (states[s].obs.is_goal) b.add_goal(StateId(s));
    for (std::size_t slot = 0; slot < states[s].actions.size(); ++slot) {
      const ActionId u = states[s].actions[slot];
      if (u.is_terminate()) continue;
      const auto& [to, cost] = *states[s].outcome[slot];
      b.add_action(StateId(s), u, StateId(to), cost);
    }
  }
  out.model = std::move(b).build();
  return out;
}

}  // namespace plankit
