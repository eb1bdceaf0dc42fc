#pragma once

#include "plankit/problem.hpp"
#include "plankit/random.hpp"

#include <vector>

namespace plankit {

struct Outcome {
  StateId state;
  double probability;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Successor distribution of one (x, u) pair, in construction order:
/// the intended successor first, then alternatives in action order, then
/// the "stay" outcome. Duplicate states are merged into their first slot.
using OutcomeDistribution = std::vector<Outcome>;

/// Outcome distribution under the predictability model: the intended
/// successor f(x,u) gets gamma; the remaining 1 - gamma is split evenly
/// over the successors of the other non-terminate actions of U(x) plus
/// staying at x (the state-holding termination alternative).
inline OutcomeDistribution stochastic_outcomes(const PlanningProblem& p, StateId x, ActionId u) {
  if (u.is_terminate())
    throw Error("InvalidAction", "TERMINATE has no stochastic outcome distribution");
  const Transition& chosen = p.transition(x, u);
  const double gamma = p.predictability();
  OutcomeDistribution out{{chosen.next, gamma}};
  if (gamma == 1.0) return out;

  std::vector<StateId> alternatives;
  for (const auto& t : p.actions(x))
    if (t.action != u && !t.action.is_terminate()) alternatives.push_back(t.next);
  alternatives.push_back(x);
  const double share = (1.0 - gamma) / static_cast<double>(alternatives.size());
  for (StateId s : alternatives) {
    bool merged = false;
    for (auto& o : out)
      if (o.state == s) {
        o.probability += share;
        merged = true;
        break;
      }
    if (!merged) out.push_back({s, share});
  }
  return out;
}

/// Inverse-CDF draw over an outcome list in construction order.
inline StateId sample_outcome(const OutcomeDistribution& d, RandomStream& rng) {
  const double r = rng.uniform01();
  double acc = 0.0;
  for (const auto& o : d) {
    acc += o.probability;
    if (r < acc) return o.state;
  }
  return d.back().state;
}

inline StateId sample_transition(const PlanningProblem& p, StateId x, ActionId u, RandomStream& rng) {
  return sample_outcome(stochastic_outcomes(p, x, u), rng);
}

/// Precomputed distributions for every non-terminate (x, u) pair, laid out in
/// the order of p.actions(x). Build once per problem and share read-only.
class TransitionModel {
 public:
  explicit TransitionModel(const PlanningProblem& p) : problem_(&p) {
    offsets_.reserve(p.num_states() + 1);
    offsets_.push_back(0);
    for (std::uint32_t x = 0; x < p.num_states(); ++x) {
      for (const auto& t : p.actions(StateId(x))) {
        if (t.action.is_terminate())
          dists_.push_back({{t.next, 1.0}});
        else
          dists_.push_back(stochastic_outcomes(p, StateId(x), t.action));
      }
      offsets_.push_back(dists_.size());
    }
  }

  const PlanningProblem& problem() const { return *problem_; }

  /// Distribution of the `slot`-th entry of p.actions(x).
  const OutcomeDistribution& at(StateId x, std::size_t slot) const {
    return dists_[offsets_[x.index()] + slot];
  }

 private:
  const PlanningProblem* problem_;
  std::vector<std::size_t> offsets_;
  std::vector<OutcomeDistribution> dists_;
};

}  // namespace plankit
