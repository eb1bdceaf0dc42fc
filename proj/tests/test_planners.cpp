#include "plankit/corpus.hpp"
#include "plankit/discount.hpp"
#include "plankit/planners.hpp"

#include <gtest/gtest.h>

#include <deque>

using namespace plankit;

namespace {

ValueTable<Rational> ints(std::initializer_list<std::optional<int>> xs) {
  ValueTable<Rational> t;
  for (const auto& x : xs) t.value.push_back(x ? std::optional<Rational>(Rational(*x)) : std::nullopt);
  return t;
}

/// Unit-cost distances to the goal set by breadth-first search on reversed
/// edges; independent of every planner under test.
std::vector<std::optional<std::int64_t>> bfs_distances(const PlanningProblem& p) {
  std::vector<std::vector<std::uint32_t>> preds(p.num_states());
  for (std::uint32_t x = 0; x < p.num_states(); ++x)
    for (const auto& t : p.actions(StateId(x)))
      if (!t.action.is_terminate()) preds[t.next.index()].push_back(x);
  std::vector<std::optional<std::int64_t>> d(p.num_states());
  std::deque<std::uint32_t> q;
  for (StateId g : p.goals()) {
    d[g.index()] = 0;
    q.push_back(g.value);
  }
  while (!q.empty()) {
    const auto y = q.front();
    q.pop_front();
    for (auto x : preds[y])
      if (!d[x]) {
        d[x] = *d[y] + 1;
        q.push_back(x);
      }
  }
  return d;
}

}  // namespace

TEST(ValueIteration, LineWorld) {
  const auto p = parse_grid_map("S.G");
  EXPECT_EQ(value_iteration<Rational>(p, SweepMode::kSynchronous).values, ints({2, 1, 0}));
  EXPECT_EQ(value_iteration<Rational>(p, SweepMode::kAsynchronous).values, ints({2, 1, 0}));
  EXPECT_EQ(dijkstra<Rational>(p).values, ints({2, 1, 0}));
}

TEST(ValueIteration, DisconnectedStartIsUnreachable) {
  const auto p = parse_grid_map("S#G");
  EXPECT_EQ(dijkstra<Rational>(p).values, ints({std::nullopt, 0}));
  EXPECT_EQ(value_iteration<Rational>(p, SweepMode::kSynchronous).values, ints({std::nullopt, 0}));
}

TEST(ValueIteration, AllPlannersAgreeOnCorpus) {
  for (const auto& m : corpus_maps()) {
    const auto p = corpus_problem(m.name);
    const auto d = dijkstra<Rational>(p);
    const auto sync = value_iteration<Rational>(p, SweepMode::kSynchronous);
    const auto async = value_iteration<Rational>(p, SweepMode::kAsynchronous);
    EXPECT_EQ(d.values, sync.values) << m.name;
    EXPECT_EQ(d.values, async.values) << m.name;
    EXPECT_LE(d.stats.backups, sync.stats.backups) << m.name;
    EXPECT_LE(d.stats.backups, async.stats.backups) << m.name;
    const auto bfs = bfs_distances(p);
    for (std::uint32_t x = 0; x < p.num_states(); ++x) {
      ASSERT_EQ(bfs[x].has_value(), d.values.value[x].has_value());
      if (bfs[x]) {
        EXPECT_EQ(*d.values.value[x], Rational(*bfs[x])) << m.name << " " << x;
      }
    }
  }
}

TEST(ValueIteration, DoubleMatchesRationalOnDeterministicMaps) {
  for (const auto& m : corpus_maps()) {
    const auto p = corpus_problem(m.name);
    EXPECT_EQ(to_double_table(dijkstra<Rational>(p).values), dijkstra<double>(p).values) << m.name;
  }
}

TEST(ValueIteration, AsyncValuesNeverIncrease) {
  for (const char* name : {"maze", "spiral", "four_rooms"}) {
    const auto p = corpus_problem(name);
    std::vector<ValueTable<Rational>> history;
    value_iteration_history<Rational>(p, SweepMode::kAsynchronous, history);
    ASSERT_GE(history.size(), 2u);
    for (std::size_t k = 1; k < history.size(); ++k)
      for (std::size_t x = 0; x < p.num_states(); ++x) {
        const auto& before = history[k - 1].value[x];
        const auto& after = history[k].value[x];
        if (!before) continue;  // UNREACHABLE plays +inf
        ASSERT_TRUE(after.has_value());
        EXPECT_LE(*after, *before);
      }
  }
}

TEST(ValueIteration, SweepCapSignalsImproperProblem) {
  const auto p = corpus_problem("field_40");
  ViOptions opts;
  opts.max_sweeps = 2;
  try {
    value_iteration<Rational>(p, SweepMode::kSynchronous, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "MaxSweepsExceeded");
  }
}

TEST(Dijkstra, RejectsStochasticProblems) {
  EXPECT_THROW(dijkstra<Rational>(parse_grid_map("S.G").with_predictability(0.9)), Error);
}

TEST(Policy, LineWorld) {
  const auto p = parse_grid_map("S.G");
  const auto pi = extract_policy(p, dijkstra<Rational>(p).values);
  EXPECT_EQ(pi.action, (std::vector<ActionId>{kEast, kEast, kTerminate}));
}

TEST(Policy, TiesGoToLowestAction) {
  // From the top-left corner of an open square both N-free moves (E, S)
  // are optimal toward the bottom-right goal; E has the lower id.
  const auto p = parse_grid_map("S.\n.G\n");
  const auto pi = extract_policy(p, dijkstra<Rational>(p).values);
  EXPECT_EQ(pi(StateId(0)), kEast);
  // From the bottom-left cell N and E are not tied (only E is optimal);
  // from the top-right, S is the only optimal move.
  EXPECT_EQ(pi(StateId(2)), kEast);
  EXPECT_EQ(pi(StateId(1)), kSouth);
  // Symmetric ties with N available: cell below start of a 3x3 goal-right map.
  const auto q = parse_grid_map("..G\n...\nS..\n");
  const auto qi = extract_policy(q, dijkstra<Rational>(q).values);
  EXPECT_EQ(qi(q.initial()), kNorth);
}

TEST(Policy, GreedyRolloutTakesExactlyGStarSteps) {
  for (const auto& m : corpus_maps()) {
    const auto p = corpus_problem(m.name);
    const auto g = dijkstra<Rational>(p).values;
    const auto pi = extract_policy(p, g);
    for (std::uint32_t x = 0; x < p.num_states(); ++x) {
      if (!g.value[x]) continue;
      const auto ev = evaluate_policy(p, pi, StateId(x));
      ASSERT_TRUE(ev.terminates) << m.name << " " << x;
      EXPECT_EQ(Rational(static_cast<std::int64_t>(ev.steps)), *g.value[x]);
      EXPECT_EQ(ev.cost, *g.value[x]);
    }
  }
}

TEST(Policy, DetourCostsAtLeastOptimal) {
  const auto p = corpus_problem("four_rooms");
  const auto g = dijkstra<Rational>(p).values;
  Policy pi = extract_policy(p, g);
  // Force a first move away from the optimum and follow pi afterwards.
  const StateId x0 = p.initial();
  for (const auto& t : p.actions(x0)) {
    Policy detour = pi;
    detour.action[x0.index()] = t.action;
    const auto ev = evaluate_policy(p, detour, x0);
    if (ev.terminates) {
      EXPECT_GE(ev.cost, *g[x0]);
    }
  }
}

TEST(Policy, ChainWithTrueCostIsGoalSeeking) {
  const auto p = build_discount_trap_problem();
  const auto g = dijkstra<Rational>(p).values;
  const auto pi = extract_policy(p, g);
  for (std::uint32_t x = 0; x < 5; ++x) EXPECT_EQ(pi(StateId(x)), kTrapRight);
  EXPECT_EQ(pi(StateId(5)), kTerminate);
  const auto ev = evaluate_policy(p, pi, StateId(0));
  EXPECT_TRUE(ev.terminates);
  EXPECT_EQ(ev.cost, Rational(15));
  Policy loop;
  loop.action.assign(6, kTrapLeft);
  loop.action[5] = kTerminate;
  EXPECT_FALSE(evaluate_policy(p, loop, StateId(0)).terminates);
  EXPECT_EQ(p.successor(StateId(0), kTrapLeft), StateId(0));
}

TEST(ValueTableCsv, Format) {
  const auto p = parse_grid_map("S#G");
  EXPECT_EQ(value_table_csv(p, dijkstra<Rational>(p).values), "state,row,col,value\n0,0,0,inf\n1,0,2,0\n");
}
