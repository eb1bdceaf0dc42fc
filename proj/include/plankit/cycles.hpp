#pragma once

#include "plankit/problem.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace plankit {

/// A simple cycle: states.front() == states.back(), no interior repeats.
struct Cycle {
  std::vector<StateId> states;
  std::vector<ActionId> actions;
  Rational total_cost{0};
  bool contains_goal = false;

  std::size_t length() const { return actions.size(); }
  Rational mean_cost() const { return total_cost / static_cast<std::int64_t>(actions.size()); }
};

namespace detail {

/// Non-terminate edges whose endpoints both lie in `allowed`.
struct EdgeList {
  struct Edge {
    std::uint32_t from;
    std::uint32_t to;
    ActionId action;
    Rational cost;
  };
  std::vector<Edge> edges;
};

inline EdgeList induced_edges(const PlanningProblem& p, const std::vector<char>& allowed) {
  EdgeList el;
  for (std::uint32_t x = 0; x < p.num_states(); ++x) {
    if (allowed[x] == 0) continue;
    for (const auto& t : p.actions(StateId(x)))
      if (!t.action.is_terminate() && allowed[t.next.index()] != 0)
        el.edges.push_back({x, t.next.value, t.action, t.cost});
  }
  return el;
}

inline Cycle make_cycle(const PlanningProblem& p, const std::vector<const EdgeList::Edge*>& edges) {
  Cycle c;
  c.states.push_back(StateId(edges.front()->from));
  for (const auto* e : edges) {
    c.actions.push_back(e->action);
    c.states.push_back(StateId(e->to));
    c.total_cost += e->cost;
  }
  for (StateId s : c.states) c.contains_goal = c.contains_goal || p.is_goal(s);
  return c;
}

}  // namespace detail

/// Minimum-mean cycle of the subgraph induced by `allowed`, via Karp's
/// recurrence D_k(v) = min_{(u,v)} D_{k-1}(u) + w(u,v) with D_0 = 0:
///   mean* = min_v max_{0<=k<n} (D_n(v) - D_k(v)) / (n - k).
/// Exact in rational arithmetic. nullopt when the subgraph is acyclic.
inline std::optional<Cycle> min_mean_cycle_karp(const PlanningProblem& p, const std::vector<char>& allowed) {
  const detail::EdgeList el = detail::induced_edges(p, allowed);
  const std::size_t n = p.num_states();
  std::size_t m = 0;
  for (char a : allowed) m += a != 0 ? 1 : 0;
  if (m == 0 || el.edges.empty()) return std::nullopt;

  std::vector<std::vector<std::optional<Rational>>> d(m + 1, std::vector<std::optional<Rational>>(n));
  std::vector<std::vector<std::int64_t>> pred(m + 1, std::vector<std::int64_t>(n, -1));
  for (std::size_t v = 0; v < n; ++v)
    if (allowed[v] != 0) d[0][v] = Rational(0);
  for (std::size_t k = 1; k <= m; ++k)
    for (std::size_t e = 0; e < el.edges.size(); ++e) {
      const auto& edge = el.edges[e];
      if (!d[k - 1][edge.from]) continue;
      Rational cand = *d[k - 1][edge.from] + edge.cost;
      if (!d[k][edge.to] || cand < *d[k][edge.to]) {
        d[k][edge.to] = cand;
        pred[k][edge.to] = static_cast<std::int64_t>(e);
      }
    }

  std::optional<Rational> best;
  std::size_t best_v = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (!d[m][v]) continue;
    std::optional<Rational> worst;
    for (std::size_t k = 0; k < m; ++k) {
      if (!d[k][v]) continue;
      Rational r = (*d[m][v] - *d[k][v]) / static_cast<std::int64_t>(m - k);
      if (!worst || r > *worst) worst = r;
    }
    if (worst && (!best || *worst < *best)) {
      best = worst;
      best_v = v;
    }
  }
  if (!best) return std::nullopt;

  // Walk the m-edge optimal walk into best_v backwards; it contains a cycle
  // of mean exactly mean*.
  std::vector<std::size_t> walk;  // edge indices, reversed
  std::size_t v = best_v;
  for (std::size_t k = m; k > 0; --k) {
    const auto e = static_cast<std::size_t>(pred[k][v]);
    walk.push_back(e);
    v = el.edges[e].from;
  }
  std::vector<const detail::EdgeList::Edge*> forward;
  for (auto it = walk.rbegin(); it != walk.rend(); ++it) forward.push_back(&el.edges[*it]);
  // forward[i] goes from position i to position i+1 of the state walk.
  std::vector<std::uint32_t> states{forward.front()->from};
  for (const auto* e : forward) states.push_back(e->to);
  for (std::size_t j = 0; j < states.size(); ++j)
    for (std::size_t i = 0; i < j; ++i)
      if (states[i] == states[j]) {
        std::vector<const detail::EdgeList::Edge*> cyc(forward.begin() + static_cast<std::ptrdiff_t>(i),
                                                       forward.begin() + static_cast<std::ptrdiff_t>(j));
        Cycle c = detail::make_cycle(p, cyc);
        if (c.mean_cost() == *best) return c;
      }
  throw Error("InternalError", "Karp walk did not expose a minimum-mean cycle");
}

/// All simple cycles of the induced subgraph (parallel actions give
/// distinct cycles), each reported once from its smallest state.
inline std::vector<Cycle> enumerate_simple_cycles(const PlanningProblem& p, const std::vector<char>& allowed,
                                                  std::size_t limit = 1000000) {
  const detail::EdgeList el = detail::induced_edges(p, allowed);
  std::vector<std::vector<const detail::EdgeList::Edge*>> out_edges(p.num_states());
  for (const auto& e : el.edges) out_edges[e.from].push_back(&e);
  std::vector<Cycle> cycles;
  std::vector<char> on_path(p.num_states(), 0);
  std::vector<const detail::EdgeList::Edge*> path;
  std::uint32_t start = 0;
  auto dfs = [&](auto&& self, std::uint32_t v) -> void {
    for (const auto* e : out_edges[v]) {
      if (e->to == start) {
        path.push_back(e);
        cycles.push_back(detail::make_cycle(p, path));
        path.pop_back();
        if (cycles.size() > limit) throw Error("ExplosionGuard", "too many simple cycles");
      } else if (e->to > start && on_path[e->to] == 0) {
        on_path[e->to] = 1;
        path.push_back(e);
        self(self, e->to);
        path.pop_back();
        on_path[e->to] = 0;
      }
    }
  };
  for (start = 0; start < p.num_states(); ++start) {
    if (allowed[start] == 0) continue;
    on_path[start] = 1;
    dfs(dfs, start);
    on_path[start] = 0;
  }
  return cycles;
}

/// Minimum-mean cycle by exhaustive enumeration (first one found on ties).
inline std::optional<Cycle> min_mean_cycle_exhaustive(const PlanningProblem& p, const std::vector<char>& allowed) {
  std::optional<Cycle> best;
  for (auto& c : enumerate_simple_cycles(p, allowed))
    if (!best || c.mean_cost() < best->mean_cost()) best = std::move(c);
  return best;
}

}  // namespace plankit
