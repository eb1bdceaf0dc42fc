#pragma once

#include "plankit/cycles.hpp"
#include "plankit/planners.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace plankit {

/// An action sequence applied from `origin` together with the states it
/// visits (path.front() == origin, path.back() == end state).
struct ActionSequence {
  StateId origin;
  std::vector<ActionId> actions;
  std::vector<StateId> path;
  Rational cost{0};

  std::size_t steps() const { return actions.size(); }
  StateId end() const { return path.back(); }

  friend bool operator==(const ActionSequence&, const ActionSequence&) = default;
};

inline ActionSequence make_sequence(const PlanningProblem& p, StateId origin, const std::vector<ActionId>& actions) {
  ActionSequence s{origin, {}, {origin}, Rational(0)};
  StateId x = origin;
  for (ActionId u : actions) {
    const Transition& t = p.transition(x, u);
    s.actions.push_back(u);
    s.cost += t.cost;
    x = t.next;
    s.path.push_back(x);
  }
  return s;
}

namespace detail {

inline StateId single_goal(const PlanningProblem& p) {
  if (!p.is_deterministic()) throw Error("StochasticProblem", "episodic analysis needs a deterministic problem");
  if (p.goals().size() != 1) throw Error("MultipleGoals", "episodic analysis needs exactly one goal state");
  return p.goals().front();
}

}  // namespace detail

/// Every acyclic action sequence from x_I to the goal with at most
/// `max_len` actions. The goal ends a sequence; it is never passed through.
inline std::vector<ActionSequence> enumerate_goal_sequences(const PlanningProblem& p, std::size_t max_len,
                                                            std::size_t limit = 1000000) {
  const StateId goal = detail::single_goal(p);
  std::vector<ActionSequence> out;
  std::vector<char> on_path(p.num_states(), 0);
  ActionSequence cur{p.initial(), {}, {p.initial()}, Rational(0)};
  if (p.initial() == goal) {
    out.push_back(cur);
    return out;
  }
  auto dfs = [&](auto&& self, StateId x) -> void {
    if (cur.steps() >= max_len) return;
    for (const auto& t : p.actions(x)) {
      if (t.action.is_terminate() || on_path[t.next.index()] != 0) continue;
      cur.actions.push_back(t.action);
      cur.path.push_back(t.next);
      cur.cost += t.cost;
      if (t.next == goal) {
        out.push_back(cur);
        if (out.size() > limit) throw Error("ExplosionGuard", "more than " + std::to_string(limit) + " goal sequences");
      } else {
        on_path[t.next.index()] = 1;
        self(self, t.next);
        on_path[t.next.index()] = 0;
      }
      cur.cost -= t.cost;
      cur.path.pop_back();
      cur.actions.pop_back();
    }
  };
  on_path[p.initial().index()] = 1;
  dfs(dfs, p.initial());
  return out;
}

/// A(u) = (1 - S/S*) (S L* / (S* L) - 1), the published bonus constraint.
inline Rational constraint_A(const ActionSequence& u, const ActionSequence& u_star) {
  if (u.cost == Rational(0) || u_star.cost == Rational(0)) throw Error("ZeroCostSequence", "constraint needs sequences of positive cost");
  if (u.steps() == 0 || u_star.steps() == 0) throw Error("ZeroCostSequence", "constraint needs non-empty sequences");
  const Rational s(static_cast<std::int64_t>(u.steps()));
  const Rational s_star(static_cast<std::int64_t>(u_star.steps()));
  return (Rational(1) - s / s_star) * (s * u_star.cost / (s_star * u.cost) - Rational(1));
}

/// The M at which the goal cycles of u and u* have equal mean:
/// (L* + M) / S* = (L + M) / S  <=>  M = (S* L - S L*) / (S - S*).
/// u* beats u iff M <= bound when S > S*, and iff M >= bound when S < S*.
inline Rational pairwise_bonus_bound(const ActionSequence& u, const ActionSequence& u_star) {
  if (u.steps() == u_star.steps()) throw Error("EqualLength", "sequences of equal length give no bound on M");
  const auto s = static_cast<std::int64_t>(u.steps());
  const auto s_star = static_cast<std::int64_t>(u_star.steps());
  return (Rational(s_star) * u.cost - Rational(s) * u_star.cost) / Rational(s - s_star);
}

enum class MPlacement { kInside, kBoundary, kOutside, kNotABonus };

/// Range of reset bonuses M < 0 under which the shortest-path policy is also
/// average-cost optimal on the reset system. nullopt bounds are infinite.
struct MInterval {
  std::optional<Rational> lower;  // -inf when no shorter goal sequence exists
  std::optional<Rational> upper;  // +inf when nothing caps it
  // Published-formula components: max of A over shorter sequences, min of
  // A over longer ones.
  std::optional<Rational> alpha_bound;
  std::optional<Rational> beta_bound;
  // Exact pairwise components the interval is built from.
  std::optional<Rational> shorter_bound;
  std::optional<Rational> longer_bound;
  std::optional<Rational> cycle_bound;  // S* L_av(C) - L*
  ActionSequence u_star;
  std::optional<Cycle> min_mean_cycle;
  std::size_t shorter_count = 0;
  std::size_t longer_count = 0;
  std::size_t equal_count = 0;

  bool nonempty() const { return !lower || !upper || *lower <= *upper; }
  bool contains(const Rational& m) const { return (!lower || *lower <= m) && (!upper || m <= *upper); }
  bool admits_bonus() const { return nonempty() && (!lower || *lower < Rational(0)); }

  MPlacement place(const Rational& m) const {
    if (m >= Rational(0)) return MPlacement::kNotABonus;
    if ((lower && m == *lower) || (upper && m == *upper)) return MPlacement::kBoundary;
    return contains(m) ? MPlacement::kInside : MPlacement::kOutside;
  }
};

/// Goal-free states reachable from x_I without entering the goal.
inline std::vector<char> goal_free_reachable(const PlanningProblem& p) {
  std::vector<char> seen(p.num_states(), 0);
  if (p.is_goal(p.initial())) return seen;
  std::vector<StateId> stack{p.initial()};
  seen[p.initial().index()] = 1;
  while (!stack.empty()) {
    const StateId x = stack.back();
    stack.pop_back();
    for (const auto& t : p.actions(x))
      if (!t.action.is_terminate() && !p.is_goal(t.next) && seen[t.next.index()] == 0) {
        seen[t.next.index()] = 1;
        stack.push_back(t.next);
      }
  }
  return seen;
}

/// The sequence the shortest-path policy follows from x_I to the goal.
inline ActionSequence optimal_goal_sequence(const PlanningProblem& p) {
  const auto values = dijkstra<Rational>(p).values;
  if (!values[p.initial()]) throw Error("NoGoalSequence", "the goal is unreachable from the initial state");
  const Policy pi = extract_policy(p, values);
  std::vector<ActionId> us;
  StateId x = p.initial();
  while (!p.is_goal(x)) {
    us.push_back(pi(x));
    x = p.successor(x, pi(x));
  }
  return make_sequence(p, p.initial(), us);
}

inline MInterval m_interval(const PlanningProblem& p, std::size_t max_len) {
  detail::single_goal(p);
  MInterval iv;
  iv.u_star = optimal_goal_sequence(p);
  for (const auto& u : enumerate_goal_sequences(p, max_len)) {
    if (u.actions == iv.u_star.actions) continue;
    if (u.steps() == iv.u_star.steps()) {
      ++iv.equal_count;
      continue;
    }
    const Rational a = constraint_A(u, iv.u_star);
    const Rational b = pairwise_bonus_bound(u, iv.u_star);
    if (u.steps() < iv.u_star.steps()) {
      ++iv.shorter_count;
      if (!iv.alpha_bound || a > *iv.alpha_bound) iv.alpha_bound = a;
      if (!iv.shorter_bound || b > *iv.shorter_bound) iv.shorter_bound = b;
    } else {
      ++iv.longer_count;
      if (!iv.beta_bound || a < *iv.beta_bound) iv.beta_bound = a;
      if (!iv.longer_bound || b < *iv.longer_bound) iv.longer_bound = b;
    }
  }
  iv.min_mean_cycle = min_mean_cycle_karp(p, goal_free_reachable(p));
  if (iv.min_mean_cycle)
    iv.cycle_bound =
        Rational(static_cast<std::int64_t>(iv.u_star.steps())) * iv.min_mean_cycle->mean_cost() - iv.u_star.cost;
  iv.lower = iv.shorter_bound;
  iv.upper = iv.longer_bound;
  if (iv.cycle_bound && (!iv.upper || *iv.cycle_bound < *iv.upper)) iv.upper = iv.cycle_bound;
  return iv;
}

/// Long-run behaviour of a stationary policy on the reset system: from x_I,
/// arriving at the goal costs an extra M and jumps back to x_I. The rollout
/// is a lasso (prefix then a repeating cycle); costs are stored without M
/// and `reset` marks the steps that hit the goal.
struct PolicyProfile {
  Policy policy;
  bool stuck = false;  // reaches a state where the policy has no action
  std::vector<Rational> prefix_cost;
  std::vector<char> prefix_reset;
  std::vector<Rational> cycle_cost;
  std::vector<char> cycle_reset;

  std::optional<Rational> average(const Rational& m) const {
    if (stuck) return std::nullopt;
    Rational total(0);
    for (std::size_t i = 0; i < cycle_cost.size(); ++i) total += cycle_cost[i] + (cycle_reset[i] != 0 ? m : Rational(0));
    return total / static_cast<std::int64_t>(cycle_cost.size());
  }

  /// Mean cost of the first `horizon` steps.
  std::optional<Rational> truncated_average(const Rational& m, std::uint64_t horizon) const {
    if (stuck || horizon == 0) return std::nullopt;
    auto step = [&](const std::vector<Rational>& c, const std::vector<char>& r, std::size_t i) {
      return c[i] + (r[i] != 0 ? m : Rational(0));
    };
    Rational total(0);
    std::uint64_t left = horizon;
    for (std::size_t i = 0; i < prefix_cost.size() && left > 0; ++i, --left) total += step(prefix_cost, prefix_reset, i);
    if (left > 0) {
      Rational lap(0);
      for (std::size_t i = 0; i < cycle_cost.size(); ++i) lap += step(cycle_cost, cycle_reset, i);
      const std::uint64_t laps = left / cycle_cost.size();
      total += lap * static_cast<std::int64_t>(laps);
      left -= laps * cycle_cost.size();
      for (std::size_t i = 0; left > 0; ++i, --left) total += step(cycle_cost, cycle_reset, i);
    }
    return total / static_cast<std::int64_t>(horizon);
  }
};

inline PolicyProfile profile_policy(const PlanningProblem& p, const Policy& pi) {
  const StateId goal = detail::single_goal(p);
  PolicyProfile prof;
  prof.policy = pi;
  std::vector<std::optional<std::size_t>> seen(p.num_states());
  std::vector<Rational> cost;
  std::vector<char> reset;
  StateId x = p.initial();
  while (!seen[x.index()]) {
    seen[x.index()] = cost.size();
    const ActionId u = pi(x);
    const Transition* t = u.is_terminate() ? nullptr : p.find(x, u);
    if (t == nullptr) {
      prof.stuck = true;
      return prof;
    }
    cost.push_back(t->cost);
    reset.push_back(t->next == goal ? 1 : 0);
    x = t->next == goal ? p.initial() : t->next;
  }
  const auto split = static_cast<std::ptrdiff_t>(*seen[x.index()]);
  prof.prefix_cost.assign(cost.begin(), cost.begin() + split);
  prof.prefix_reset.assign(reset.begin(), reset.begin() + split);
  prof.cycle_cost.assign(cost.begin() + split, cost.end());
  prof.cycle_reset.assign(reset.begin() + split, reset.end());
  return prof;
}

inline constexpr std::size_t kMaxBruteForceStates = 12;

/// Profiles of every stationary policy, indexed in mixed radix over the
/// non-goal states with state 0 the fastest-moving digit.
inline std::vector<PolicyProfile> enumerate_policy_profiles(const PlanningProblem& p) {
  detail::single_goal(p);
  if (p.num_states() > kMaxBruteForceStates)
    throw Error("TooManyStates", "exhaustive policy search is limited to " + std::to_string(kMaxBruteForceStates) +
                                     " states");
  std::vector<std::vector<ActionId>> choices(p.num_states());
  for (std::uint32_t x = 0; x < p.num_states(); ++x) {
    if (!p.is_goal(StateId(x)))
      for (const auto& t : p.actions(StateId(x))) choices[x].push_back(t.action);
    if (choices[x].empty()) choices[x].push_back(kTerminate);
  }
  std::vector<std::size_t> digit(p.num_states(), 0);
  std::vector<PolicyProfile> out;
  Policy pi;
  pi.action.resize(p.num_states());
  for (;;) {
    for (std::size_t x = 0; x < digit.size(); ++x) pi.action[x] = choices[x][digit[x]];
    out.push_back(profile_policy(p, pi));
    std::size_t k = 0;
    while (k < digit.size() && ++digit[k] == choices[k].size()) digit[k++] = 0;
    if (k == digit.size()) break;
  }
  return out;
}

struct AverageCostOptimum {
  Policy policy;
  std::size_t index = 0;
  Rational truncated_average{0};
  Rational average{0};
};

/// Exhaustive search for the policy with the least truncated average cost
/// over `horizon` steps on the reset system; the lowest index wins ties.
inline AverageCostOptimum average_cost_optimal_policy_bruteforce(const PlanningProblem& p, const Rational& m,
                                                                 std::uint64_t horizon = 10000) {
  const auto profiles = enumerate_policy_profiles(p);
  std::optional<AverageCostOptimum> best;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto avg = profiles[i].truncated_average(m, horizon);
    if (!avg) continue;
    if (!best || *avg < best->truncated_average)
      best = AverageCostOptimum{profiles[i].policy, i, *avg, *profiles[i].average(m)};
  }
  if (!best) throw Error("NoGoalSequence", "every policy gets stuck");
  return *best;
}

/// Up to `count` bonuses M < 0 strictly inside the interval.
inline std::vector<Rational> sample_bonus_inside(const MInterval& iv, std::size_t count = 5) {
  std::vector<Rational> out;
  const Rational hi = iv.upper && *iv.upper < Rational(0) ? *iv.upper : Rational(0);
  if (iv.lower && *iv.lower >= hi) return out;
  const auto k_max = static_cast<std::int64_t>(count);
  for (std::int64_t k = 1; k <= k_max; ++k)
    out.push_back(iv.lower ? *iv.lower + (hi - *iv.lower) * Rational(k, k_max + 1) : hi - Rational(k));
  return out;
}

/// Up to `count` bonuses M < 0 outside the closed interval, taken from both
/// sides when both exist.
inline std::vector<Rational> sample_bonus_outside(const MInterval& iv, std::size_t count = 5) {
  std::vector<Rational> below;
  std::vector<Rational> above;
  const auto k_max = static_cast<std::int64_t>(count);
  for (std::int64_t k = 1; k <= k_max; ++k) {
    if (iv.lower) below.push_back(std::min(*iv.lower, Rational(0)) - Rational(k));
    if (iv.upper && *iv.upper < Rational(0)) above.push_back(*iv.upper - *iv.upper * Rational(k, k_max + 1));
  }
  std::vector<Rational> out;
  for (std::size_t i = 0; out.size() < count && (i < below.size() || i < above.size()); ++i)
    for (const auto* side : {&below, &above})
      if (i < side->size() && out.size() < count && (*side)[i] < Rational(0) && !iv.contains((*side)[i]))
        out.push_back((*side)[i]);
  return out;
}

/// One member of the exhaustive small-graph family: state 0 starts, state
/// n-1 is the goal, every other state has one or two moves to distinct
/// successors with integer costs.
struct TinyInstance {
  struct Move {
    std::uint8_t to;
    std::uint8_t cost;
  };
  std::uint8_t num_states = 0;
  std::array<std::array<Move, 2>, 8> moves{};
  std::array<std::uint8_t, 8> move_count{};

  PlanningProblem to_problem() const {
    ProblemBuilder b(num_states);
    for (std::uint8_t x = 0; x + 1 < num_states; ++x)
      for (std::uint8_t k = 0; k < move_count[x]; ++k)
        b.add_action(StateId(x), ActionId{k}, StateId(moves[x][k].to), Rational(moves[x][k].cost));
    b.set_initial(StateId(0)).add_goal(StateId(num_states - 1u));
    return std::move(b).build();
  }

  /// Compact edge list, e.g. "0>1:2 0>2:1 1>2:3".
  std::string describe() const {
    std::string out;
    for (std::uint8_t x = 0; x + 1 < num_states; ++x)
      for (std::uint8_t k = 0; k < move_count[x]; ++k) {
        if (!out.empty()) out += ' ';
        out += std::to_string(x) + '>' + std::to_string(moves[x][k].to) + ':' + std::to_string(moves[x][k].cost);
      }
    return out;
  }
};

struct TinyFamilyOptions {
  std::uint8_t min_states = 2;
  std::uint8_t max_states = 5;
  std::vector<std::uint8_t> costs{1, 2, 3};
};

namespace detail {

struct TinyOption {
  std::uint8_t count;
  std::array<TinyInstance::Move, 2> moves;
  std::uint32_t mask;
};

inline std::uint32_t option_code(std::uint8_t count, const std::array<TinyInstance::Move, 2>& m) {
  std::uint32_t code = count;
  for (std::uint8_t k = 0; k < count; ++k) code = code * 256u + m[k].to * 16u + m[k].cost;
  return code;
}

}  // namespace detail

/// Calls fn(const TinyInstance&) once per instance in which every state is
/// reachable from 0 and the goal is reachable from every state, keeping one
/// representative per relabelling of the interior states. Returns the
/// number of instances visited.
template <class Fn>
std::uint64_t for_each_tiny_instance(const TinyFamilyOptions& opt, Fn&& fn) {
  if (opt.max_states > 8 || opt.min_states < 2) throw Error("InvalidConfig", "tiny family supports 2..8 states");
  std::uint64_t visited = 0;
  for (std::uint8_t n = opt.min_states; n <= opt.max_states; ++n) {
    std::vector<detail::TinyOption> options;
    for (std::uint8_t a = 0; a < n; ++a)
      for (std::uint8_t ca : opt.costs) {
        options.push_back({1, {{{a, ca}, {}}}, 1u << a});
        for (std::uint8_t b = a + 1; b < n; ++b)
          for (std::uint8_t cb : opt.costs) options.push_back({2, {{{a, ca}, {b, cb}}}, (1u << a) | (1u << b)});
      }
    const std::size_t inner = n - 1u;  // states with moves
    const std::uint32_t all = (1u << n) - 1u;
    std::vector<std::uint8_t> perm(n);
    std::vector<std::vector<std::uint8_t>> perms;  // relabellings of 1..n-2
    std::iota(perm.begin(), perm.end(), std::uint8_t{0});
    do {
      if (perm[0] == 0 && perm[n - 1] == n - 1) perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<std::size_t> choice(inner, 0);
    TinyInstance inst;
    inst.num_states = n;
    std::array<std::uint32_t, 8> code{};
    std::array<std::uint32_t, 8> alt{};
    for (;;) {
      std::array<std::uint32_t, 8> succ{};
      for (std::size_t x = 0; x < inner; ++x) succ[x] = options[choice[x]].mask;
      // forward reachability from 0
      std::uint32_t reach = 1u;
      for (std::uint32_t grow = 0; grow != reach;) {
        grow = reach;
        for (std::size_t x = 0; x < inner; ++x)
          if ((reach >> x) & 1u) reach |= succ[x];
      }
      // backward reachability to the goal
      std::uint32_t back = 1u << (n - 1);
      for (std::uint32_t grow = 0; grow != back;) {
        grow = back;
        for (std::size_t x = 0; x < inner; ++x)
          if ((succ[x] & back) != 0) back |= 1u << x;
      }
      if (reach == all && back == all) {
        for (std::size_t x = 0; x < inner; ++x) {
          const auto& o = options[choice[x]];
          code[x] = detail::option_code(o.count, o.moves);
        }
        bool canonical = true;
        for (std::size_t pi = 1; pi < perms.size() && canonical; ++pi) {
          const auto& s = perms[pi];
          for (std::size_t x = 0; x < inner; ++x) {
            const auto& o = options[choice[x]];
            std::array<TinyInstance::Move, 2> m = o.moves;
            for (std::uint8_t k = 0; k < o.count; ++k) m[k].to = s[m[k].to];
            if (o.count == 2 && m[1].to < m[0].to) std::swap(m[0], m[1]);
            alt[s[x]] = detail::option_code(o.count, m);
          }
          for (std::size_t x = 0; x < inner; ++x) {
            if (alt[x] != code[x]) {
              canonical = alt[x] > code[x];
              break;
            }
          }
        }
        if (canonical) {
          for (std::size_t x = 0; x < inner; ++x) {
            const auto& o = options[choice[x]];
            inst.move_count[x] = o.count;
            inst.moves[x] = o.moves;
          }
          ++visited;
          fn(static_cast<const TinyInstance&>(inst));
        }
      }
      std::size_t k = 0;
      while (k < inner && ++choice[k] == options.size()) choice[k++] = 0;
      if (k == inner) break;
    }
  }
  return visited;
}

/// Verdict for one sampled reset bonus on one family instance.
struct BonusCheck {
  std::uint64_t instance = 0;
  const TinyInstance* graph = nullptr;
  Rational m{0};
  bool inside = false;
  bool shortest_path_optimal = false;

  bool agrees() const { return inside == shortest_path_optimal; }
};

/// Sweeps the tiny family: per instance, `samples` bonuses strictly inside
/// and strictly outside the interval are checked against exhaustive policy
/// search under exact average costs. Returns the instance count.
template <class Fn>
std::uint64_t sweep_bonus_checks(const TinyFamilyOptions& opt, std::size_t samples, Fn&& fn) {
  std::uint64_t index = 0;
  return for_each_tiny_instance(opt, [&](const TinyInstance& inst) {
    const auto p = inst.to_problem();
    const auto iv = m_interval(p, p.num_states());
    const auto profiles = enumerate_policy_profiles(p);
    const auto sp = profile_policy(p, extract_policy(p, dijkstra<Rational>(p).values));
    auto check = [&](const Rational& m, bool inside) {
      const Rational own = *sp.average(m);
      bool optimal = true;
      for (const auto& prof : profiles)
        if (auto a = prof.average(m); a && *a < own) {
          optimal = false;
          break;
        }
      fn(BonusCheck{index, &inst, m, inside, optimal});
    };
    for (const auto& m : sample_bonus_inside(iv, samples)) check(m, true);
    for (const auto& m : sample_bonus_outside(iv, samples)) check(m, false);
    ++index;
  });
}

}  // namespace plankit
