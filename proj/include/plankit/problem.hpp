#pragma once

#include "plankit/error.hpp"
#include "plankit/rational.hpp"

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace plankit {

/// Dense state index in [0, num_states).
struct StateId {
  std::uint32_t value = 0;

  constexpr StateId() = default;
  constexpr explicit StateId(std::uint32_t v) : value(v) {}
  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(StateId, StateId) = default;
};

/// Action label. On grids 0..3 are N, E, S, W. TERMINATE sorts after every
/// ordinary action, so "lowest ActionId" tie-breaks never prefer it.
struct ActionId {
  std::uint8_t value = 0;

  constexpr ActionId() = default;
  constexpr explicit ActionId(std::uint8_t v) : value(v) {}
  constexpr bool is_terminate() const;
  friend constexpr auto operator<=>(ActionId, ActionId) = default;
};

inline constexpr ActionId kNorth{0};
inline constexpr ActionId kEast{1};
inline constexpr ActionId kSouth{2};
inline constexpr ActionId kWest{3};
inline constexpr ActionId kTerminate{255};

constexpr bool ActionId::is_terminate() const { return value == kTerminate.value; }

/// One entry of U(x): the action, its successor f(x,u) and its cost l(x,u).
struct Transition {
  ActionId action;
  StateId next;
  Rational cost;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Cell geometry of a problem parsed from a grid map.
struct GridLayout {
  std::vector<std::string> rows;  // original map text, one string per row
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cell;  // (row, col) per state

  friend bool operator==(const GridLayout&, const GridLayout&) = default;
};

/// The planning tuple (X, U, f, x_I, X_G, l) plus the predictability factor
/// of the stochastic extension. Immutable once built; share freely.
class PlanningProblem {
 public:
  std::size_t num_states() const { return actions_.size(); }

  std::span<const Transition> actions(StateId x) const { return actions_.at(x.index()); }

  /// Entry for (x, u), or nullptr when u is not in U(x).
  const Transition* find(StateId x, ActionId u) const {
    if (x.index() >= actions_.size()) return nullptr;
    for (const auto& t : actions_[x.index()])
      if (t.action == u) return &t;
    return nullptr;
  }

  const Transition& transition(StateId x, ActionId u) const {
    const Transition* t = find(x, u);
    if (t == nullptr)
      throw Error("InvalidAction", "action " + action_name(u) + " is not available at state " +
                                       std::to_string(x.value));
    return *t;
  }

  StateId successor(StateId x, ActionId u) const { return transition(x, u).next; }
  const Rational& step_cost(StateId x, ActionId u) const { return transition(x, u).cost; }

  StateId initial() const { return initial_; }
  const std::vector<StateId>& goals() const { return goals_; }
  bool is_goal(StateId x) const { return goal_flag_.at(x.index()) != 0; }

  /// gamma in (0, 1]; exactly 1 means the deterministic model.
  double predictability() const { return predictability_; }
  bool is_deterministic() const { return predictability_ == 1.0; }

  /// Same problem with a different predictability factor.
  PlanningProblem with_predictability(double gamma) const;

  std::string action_name(ActionId u) const {
    if (u.is_terminate()) return "T";
    if (u.value < action_names_.size()) return action_names_[u.value];
    return std::to_string(u.value);
  }
  const std::vector<std::string>& action_names() const { return action_names_; }

  const std::optional<GridLayout>& grid() const { return grid_; }
  const std::string& name() const { return name_; }

  /// Total number of (x, u) pairs including TERMINATE entries.
  std::size_t num_pairs() const {
    std::size_t n = 0;
    for (const auto& a : actions_) n += a.size();
    return n;
  }

  friend bool operator==(const PlanningProblem& a, const PlanningProblem& b) {
    return a.actions_ == b.actions_ && a.initial_ == b.initial_ && a.goals_ == b.goals_ &&
           a.predictability_ == b.predictability_ && a.action_names_ == b.action_names_ &&
           a.grid_ == b.grid_;
  }

 private:
  friend class ProblemBuilder;

  std::vector<std::vector<Transition>> actions_;
  StateId initial_;
  std::vector<StateId> goals_;
  std::vector<char> goal_flag_;
  double predictability_ = 1.0;
  std::vector<std::string> action_names_;
  std::optional<GridLayout> grid_;
  std::string name_;
};

/// Validating builder. `add_goal` installs the zero-cost TERMINATE self-loop.
class ProblemBuilder {
 public:
  explicit ProblemBuilder(std::size_t num_states) {
    p_.actions_.resize(num_states);
    p_.goal_flag_.assign(num_states, 0);
  }

  ProblemBuilder& add_action(StateId from, ActionId u, StateId to, Rational cost) {
    check_state(from);
    check_state(to);
    if (u.is_terminate()) throw Error("InvalidAction", "TERMINATE is added through add_goal");
    if (cost <= Rational(0))
      throw Error("NonPositiveCost", "cost of action " + std::to_string(u.value) + " at state " +
                                         std::to_string(from.value) + " must be positive");
    if (p_.find(from, u) != nullptr)
      throw Error("DuplicateAction", "action " + std::to_string(u.value) +
                                         " declared twice at state " +
                                         std::to_string(from.value));
    p_.actions_[from.index()].push_back({u, to, cost});
    return *this;
  }

  ProblemBuilder& set_initial(StateId x) {
    check_state(x);
    p_.initial_ = x;
    return *this;
  }

  ProblemBuilder& add_goal(StateId g) {
    check_state(g);
    if (p_.goal_flag_[g.index()] == 0) {
      p_.goal_flag_[g.index()] = 1;
      p_.goals_.push_back(g);
    }
    return *this;
  }

  ProblemBuilder& set_predictability(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
      throw Error("InvalidPredictability", "predictability must lie in (0, 1]");
    p_.predictability_ = gamma;
    return *this;
  }

  ProblemBuilder& set_action_names(std::vector<std::string> names) {
    p_.action_names_ = std::move(names);
    return *this;
  }

  ProblemBuilder& set_grid(GridLayout grid) {
    p_.grid_ = std::move(grid);
    return *this;
  }

  ProblemBuilder& set_name(std::string name) {
    p_.name_ = std::move(name);
    return *this;
  }

  PlanningProblem build() && {
    if (p_.actions_.empty()) throw Error("EmptyProblem", "a problem needs at least one state");
    if (p_.goals_.empty()) throw Error("NoGoal", "a problem needs at least one goal state");
    std::sort(p_.goals_.begin(), p_.goals_.end());
    for (std::size_t x = 0; x < p_.actions_.size(); ++x) {
      auto& acts = p_.actions_[x];
      std::sort(acts.begin(), acts.end(),
                [](const Transition& a, const Transition& b) { return a.action < b.action; });
      if (p_.goal_flag_[x] != 0)
        acts.push_back({kTerminate, StateId(static_cast<std::uint32_t>(x)), Rational(0)});
    }
    return std::move(p_);
  }

 private:
  void check_state(StateId x) const {
    if (x.index() >= p_.actions_.size())
      throw Error("InvalidState", "state " + std::to_string(x.value) + " out of range");
  }

  PlanningProblem p_;
};

inline PlanningProblem PlanningProblem::with_predictability(double gamma) const {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw Error("InvalidPredictability", "predictability must lie in (0, 1]");
  PlanningProblem copy = *this;
  copy.predictability_ = gamma;
  return copy;
}

/// States that can reach some goal along deterministic successors.
inline std::vector<char> can_reach_goal(const PlanningProblem& p) {
  const std::size_t n = p.num_states();
  std::vector<std::vector<StateId>> preds(n);
  for (std::uint32_t x = 0; x < n; ++x)
    for (const auto& t : p.actions(StateId(x))) preds[t.next.index()].push_back(StateId(x));
  std::vector<char> seen(n, 0);
  std::vector<StateId> stack(p.goals().begin(), p.goals().end());
  for (StateId g : stack) seen[g.index()] = 1;
  while (!stack.empty()) {
    StateId y = stack.back();
    stack.pop_back();
    for (StateId x : preds[y.index()])
      if (seen[x.index()] == 0) {
        seen[x.index()] = 1;
        stack.push_back(x);
      }
  }
  return seen;
}

/// States reachable from `from` along deterministic successors.
inline std::vector<char> reachable_from(const PlanningProblem& p, StateId from) {
  std::vector<char> seen(p.num_states(), 0);
  std::vector<StateId> stack{from};
  seen[from.index()] = 1;
  while (!stack.empty()) {
    StateId x = stack.back();
    stack.pop_back();
    for (const auto& t : p.actions(x))
      if (seen[t.next.index()] == 0) {
        seen[t.next.index()] = 1;
        stack.push_back(t.next);
      }
  }
  return seen;
}

}  // namespace plankit
