#include "plankit/corpus.hpp"
#include "plankit/discount.hpp"
#include "plankit/grid.hpp"
#include "plankit/trajectory.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace plankit;

namespace {

std::string kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

}  // namespace

TEST(GridParse, LineWorld) {
  const auto p = parse_grid_map("S.G\n");
  ASSERT_EQ(p.num_states(), 3u);
  EXPECT_EQ(p.initial(), StateId(0));
  EXPECT_TRUE(p.is_goal(StateId(2)));
  EXPECT_TRUE(p.is_deterministic());
  std::vector<ActionId> middle;
  for (const auto& t : p.actions(StateId(1))) middle.push_back(t.action);
  EXPECT_EQ(middle, (std::vector<ActionId>{kEast, kWest}));
  EXPECT_EQ(p.successor(StateId(1), kEast), StateId(2));
  EXPECT_EQ(p.step_cost(StateId(1), kWest), Rational(1));
}

TEST(GridParse, AdjacentStartAndGoal) {
  const auto p = parse_grid_map("SG");
  EXPECT_EQ(p.num_states(), 2u);
  EXPECT_EQ(p.successor(StateId(0), kEast), StateId(1));
}

TEST(GridParse, WallIsNotAState) {
  const auto p = parse_grid_map("S#G");
  EXPECT_EQ(p.num_states(), 2u);
  EXPECT_TRUE(p.actions(StateId(0)).empty());
  ASSERT_EQ(p.actions(StateId(1)).size(), 1u);
  EXPECT_TRUE(p.actions(StateId(1))[0].action.is_terminate());
}

TEST(GridParse, ErrorsNameThePosition) {
  try {
    parse_grid_map("S.G\n..\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "NonRectangular");
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  try {
    parse_grid_map("S.S\n..G\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "MultipleStart");
    EXPECT_NE(std::string(e.what()).find("column 3"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([] { parse_grid_map("..G"); }), "NoStart");
  EXPECT_EQ(kind_of([] { parse_grid_map("S.."); }), "NoGoal");
  EXPECT_EQ(kind_of([] { parse_grid_map(""); }), "EmptyMap");
  EXPECT_EQ(kind_of([] { parse_grid_map("S.X.G"); }), "InvalidCharacter");
}

TEST(GridParse, TerminateOnlyAtGoals) {
  for (const auto& m : corpus_maps()) {
    const auto p = parse_grid_map(m.text, std::string(m.name));
    for (std::uint32_t x = 0; x < p.num_states(); ++x) {
      const StateId s(x);
      bool has_terminate = false;
      for (const auto& t : p.actions(s)) {
        if (t.action.is_terminate()) {
          has_terminate = true;
          EXPECT_EQ(t.next, s);
          EXPECT_EQ(t.cost, Rational(0));
        } else {
          EXPECT_GT(t.cost, Rational(0));
        }
      }
      EXPECT_EQ(has_terminate, p.is_goal(s)) << m.name << " state " << x;
      if (!p.is_goal(s)) {
        EXPECT_FALSE(p.actions(s).empty()) << m.name << " state " << x;
      }
    }
  }
}

TEST(GridParse, SerializeRoundTripsOnCorpus) {
  ASSERT_GE(corpus_maps().size(), 10u);
  for (const auto& m : corpus_maps()) {
    const auto p = parse_grid_map(m.text, std::string(m.name));
    EXPECT_EQ(serialize_grid_map(p), std::string(m.text)) << m.name;
    EXPECT_EQ(parse_grid_map(serialize_grid_map(p), std::string(m.name)), p) << m.name;
  }
}

TEST(GridParse, CorpusHasAFortyByForty) {
  const auto p = corpus_problem("field_40");
  ASSERT_TRUE(p.grid().has_value());
  EXPECT_EQ(p.grid()->rows.size(), 40u);
  EXPECT_EQ(p.grid()->rows.front().size(), 40u);
  EXPECT_EQ(kind_of([] { corpus_problem("nope"); }), "ProblemLoadError");
}

TEST(Builder, RejectsBadInput) {
  EXPECT_EQ(kind_of([] { ProblemBuilder(2).add_action(StateId(0), kEast, StateId(1), Rational(0)); }),
            "NonPositiveCost");
  EXPECT_EQ(kind_of([] { ProblemBuilder(2).add_action(StateId(0), kEast, StateId(5), Rational(1)); }),
            "InvalidState");
  EXPECT_EQ(kind_of([] {
              ProblemBuilder(2).add_action(StateId(0), kEast, StateId(1), Rational(1)).add_action(
                  StateId(0), kEast, StateId(0), Rational(1));
            }),
            "DuplicateAction");
  EXPECT_EQ(kind_of([] { ProblemBuilder(2).add_action(StateId(0), kTerminate, StateId(0), Rational(1)); }),
            "InvalidAction");
  EXPECT_EQ(kind_of([] { ProblemBuilder(2).build(); }), "NoGoal");
  EXPECT_EQ(kind_of([] { ProblemBuilder(2).set_predictability(0.0); }), "InvalidPredictability");
  const auto p = parse_grid_map("S.G");
  EXPECT_EQ(kind_of([&] { (void)p.transition(StateId(0), kWest); }), "InvalidAction");
}

TEST(Trajectory, CostOfUnitPath) {
  const auto p = parse_grid_map("S..G");
  const auto t = Trajectory::from_actions(p, p.initial(), {kEast, kEast, kEast, kTerminate});
  EXPECT_EQ(trajectory_cost(p, t), Rational(3));
  EXPECT_EQ(trajectory_cost(p, Trajectory::from_actions(p, p.initial(), {})), Rational(0));
}

TEST(Trajectory, ChainGoalPathCostsFifteen) {
  const auto p = build_discount_trap_problem();
  const auto t = Trajectory::from_actions(p, StateId(0), std::vector<ActionId>(5, kTrapRight));
  EXPECT_EQ(trajectory_cost(p, t), Rational(15));
  EXPECT_NEAR(discounted_cost(p, t, 0.9, 100), 11.4265, 1e-12);
}

TEST(Trajectory, InconsistencyIsDetected) {
  const auto p = parse_grid_map("S.G");
  Trajectory t = Trajectory::from_actions(p, p.initial(), {kEast});
  t.states.back() = StateId(2);
  EXPECT_EQ(kind_of([&] { (void)trajectory_cost(p, t); }), "InconsistentTrajectory");
}

TEST(Trajectory, DiscountedCost) {
  // Self-loop of cost 1: a long rollout approaches the geometric limit 10.
  const auto p = build_discount_trap_problem();
  const auto t = Trajectory::from_actions(p, StateId(0), std::vector<ActionId>(2000, kTrapLeft));
  EXPECT_NEAR(discounted_cost(p, t, 0.9, 5000), 10.0, 1e-9);
  EXPECT_DOUBLE_EQ(discounted_cost(p, t, 0.9, 0), 1.0);
  EXPECT_EQ(kind_of([&] { (void)discounted_cost(p, t, 1.0, 3); }), "InvalidDiscount");
}

TEST(Trajectory, TruncatedAverage) {
  const auto p = build_discount_trap_problem();
  // 1 -> 0 costs 2, then 0 -> 0 costs 1: [2, 1, 1, 1] averages 5/4.
  const auto t = Trajectory::from_actions(p, StateId(1), {kTrapLeft, kTrapLeft, kTrapLeft, kTrapLeft});
  EXPECT_EQ(truncated_average_cost(p, t), Rational(5, 4));
  const auto one_three = Trajectory::from_actions(p, StateId(0), {kTrapLeft, kTrapRight});
  // costs [1, 1]: state 0 both times
  EXPECT_EQ(truncated_average_cost(p, one_three), Rational(1));
  const auto c13 = Trajectory::from_actions(p, StateId(0), {kTrapRight, kTrapRight, kTrapLeft});
  // costs [1, 2, 3]
  EXPECT_EQ(truncated_average_cost(p, c13), Rational(2));
  EXPECT_EQ(kind_of([&] { (void)truncated_average_cost(p, Trajectory::from_actions(p, StateId(0), {})); }),
            "EmptyTrajectory");
}

TEST(Trajectory, LoopAverageApproachesCycleMean) {
  // Oscillating 2 <-> 3 costs 3, 4, 3, 4, ...; the cycle mean is 7/2.
  const auto p = build_discount_trap_problem();
  for (std::size_t n : {10u, 101u, 1001u}) {
    std::vector<ActionId> us;
    for (std::size_t k = 0; k < n; ++k) us.push_back(k % 2 == 0 ? kTrapRight : kTrapLeft);
    const auto t = Trajectory::from_actions(p, StateId(2), us);
    const double err = std::abs(to_double(truncated_average_cost(p, t)) - 3.5);
    EXPECT_LE(err, 1.0 / static_cast<double>(n)) << n;
  }
}
