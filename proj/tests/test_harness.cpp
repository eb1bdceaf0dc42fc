#include "plankit/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace plankit;

namespace {

ExperimentConfig planner(const std::string& map, Algorithm a, std::size_t trials = 5) {
  ExperimentConfig c;
  c.problem = "corpus:" + map;
  c.algorithm = a;
  c.trials = trials;
  c.base_seed = 11;
  return c;
}

ExperimentConfig learner(const std::string& map, double epsilon, std::size_t trials = 5) {
  ExperimentConfig c = planner(map, Algorithm::kQLearn, trials);
  c.learner.epsilon = epsilon;
  c.learner.rho = RhoSchedule::constant(1.0);
  c.learner.episodes = 1000;
  c.learner.steps_per_episode = 3000;
  return c;
}

std::vector<ReportRow> rows_without_runtime(const std::vector<SweepOutcome>& out) {
  std::vector<ReportRow> rows;
  for (const auto& o : out) {
    EXPECT_TRUE(o.ok()) << o.error_kind << ": " << o.error_message;
    if (!o.ok()) continue;
    ReportRow r = o.report->row;
    r.runtime = {};
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST(Aggregate, MeanAndSampleStd) {
  const auto a = Aggregate::of({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(a.mean, 2.0);
  EXPECT_DOUBLE_EQ(a.std, 1.0);
  EXPECT_EQ(Aggregate::of({4.0}).std, 0.0);
  EXPECT_TRUE(std::isnan(Aggregate::of({}).mean));
}

TEST(Harness, DijkstraTrialsAreIdentical) {
  const auto rep = run_experiment(planner("maze", Algorithm::kDijkstra));
  EXPECT_EQ(rep.trials.size(), 5u);
  EXPECT_EQ(rep.row.algorithm, "dijkstra");
  EXPECT_EQ(rep.row.actions.std, 0.0);
  EXPECT_EQ(rep.row.convergence_pct, 100.0);
  EXPECT_EQ(rep.row.init_ctg_pct, 100.0);
  EXPECT_EQ(rep.row.epsilon, "nan");
  EXPECT_EQ(rep.row.shortest, rep.row.longest);
}

TEST(Harness, AllPlannersConverge) {
  for (auto a : {Algorithm::kDijkstra, Algorithm::kViSync, Algorithm::kViAsync, Algorithm::kModelFreeDijkstra,
                 Algorithm::kModelFreeVi}) {
    const auto rep = run_experiment(planner("four_rooms", a, 2));
    EXPECT_EQ(rep.row.convergence_pct, 100.0) << algorithm_name(a);
    EXPECT_EQ(parse_algorithm(algorithm_name(a)), a);
  }
  EXPECT_THROW(parse_algorithm("astar"), Error);
}

TEST(Harness, StochasticPlannersMatchTheirOracle) {
  auto c = planner("open_room", Algorithm::kViAsync, 1);
  c.gamma = 0.8;
  const auto rep = run_experiment(c);
  EXPECT_EQ(rep.row.convergence_pct, 100.0);
  EXPECT_EQ(rep.row.gamma, 0.8);
}

TEST(Harness, QLearningExplorationExtremes) {
  const auto explore = run_experiment(learner("four_rooms", 0.9));
  EXPECT_EQ(explore.row.convergence_pct, 100.0);
  EXPECT_EQ(explore.row.epsilon, "0.9");
  EXPECT_EQ(explore.row.rho, "1");
  const auto greedy = run_experiment(learner("four_rooms", 0.0));
  EXPECT_EQ(greedy.row.convergence_pct, 0.0);
  EXPECT_EQ(greedy.row.init_ctg_pct, 100.0);
  EXPECT_LT(greedy.row.actions.mean, explore.row.actions.mean);
  EXPECT_FALSE(std::isnan(greedy.row.init_ctg_time.mean));
}

TEST(Harness, RhoScheduleText) {
  auto c = learner("line", 0.5, 1);
  c.learner.rho = RhoSchedule::decay(0.7);
  c.learner.episodes = 10;
  EXPECT_EQ(run_experiment(c).row.rho, "n^-0.7");
}

TEST(Csv, RoundTrip) {
  const auto rows = rows_without_runtime(
      run_sweep({planner("maze", Algorithm::kDijkstra, 2), learner("open_room", 0.5, 2)}));
  const auto text = emit_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "algorithm,epsilon,rho,gamma,runtime_mean,runtime_std,actions_mean,actions_std,convergence_pct,"
            "discover_mean,discover_std,init_ctg_time_mean,init_ctg_time_std,init_ctg_pct,shortest,longest");
  EXPECT_EQ(parse_csv(text), rows);
  EXPECT_NE(text.find(",nan,nan,"), std::string::npos);
}

TEST(Csv, QuotingAndErrors) {
  ReportRow r;
  r.algorithm = "odd,\"name\"";
  r.gamma = 0.5;
  const auto text = emit_csv({r});
  EXPECT_NE(text.find("\"odd,\"\"name\"\"\""), std::string::npos);
  EXPECT_EQ(parse_csv(text), std::vector<ReportRow>{r});
  EXPECT_THROW(parse_csv("a,b\n"), Error);
  EXPECT_THROW(parse_csv(emit_csv({}) + "\"open"), Error);
  EXPECT_THROW(parse_csv(emit_csv({}) + "x,y\n"), Error);
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
}

TEST(Markdown, CellsShowMeanAndStd) {
  ReportRow r;
  r.algorithm = "dijkstra";
  r.actions = {12.0, 0.0};
  const auto md = emit_markdown({r});
  EXPECT_NE(md.find("| 12 ± 0 |"), std::string::npos) << md;
}

TEST(Sweep, GridShapes) {
  const auto grid = epsilon_rho_grid(learner("line", 0.0, 1), {0.0, 0.3, 0.6, 0.9},
                                     {RhoSchedule::constant(1.0), RhoSchedule::constant(0.5),
                                      RhoSchedule::decay(0.7), RhoSchedule::decay(1.0)});
  ASSERT_EQ(grid.size(), 16u);
  EXPECT_EQ(grid[5].learner.epsilon, 0.3);
  EXPECT_EQ(grid[5].learner.rho, RhoSchedule::constant(0.5));
  const auto out = run_sweep(grid);
  EXPECT_EQ(out.size(), 16u);
  for (const auto& o : out) EXPECT_TRUE(o.ok());
  EXPECT_TRUE(run_sweep({}).empty());
}

TEST(Sweep, IdenticalConfigsGiveIdenticalRows) {
  const auto c = learner("maze", 0.7, 3);
  EXPECT_EQ(rows_without_runtime(run_sweep({c})), rows_without_runtime(run_sweep({c})));
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  std::vector<ExperimentConfig> configs{planner("spiral", Algorithm::kViSync, 3),
                                        planner("maze", Algorithm::kModelFreeVi, 3), learner("maze", 0.5, 4),
                                        learner("open_room", 1.0, 4)};
  configs[2].learner.rho = RhoSchedule::decay(0.7);
  configs[3].gamma = 0.9;
  configs[3].learner.rho = RhoSchedule::decay(0.7);
  configs[3].learner.episodes = 200;
  EXPECT_EQ(rows_without_runtime(run_sweep(configs, 1)), rows_without_runtime(run_sweep(configs, 4)));
}

TEST(Sweep, ErrorsStayWithTheirConfig) {
  auto bad = learner("maze", 1.5, 1);
  auto missing = planner("nope", Algorithm::kDijkstra, 1);
  const auto out = run_sweep({bad, planner("line", Algorithm::kDijkstra, 1), missing});
  EXPECT_EQ(out[0].error_kind, "InvalidConfig");
  EXPECT_TRUE(out[1].ok());
  EXPECT_EQ(out[2].error_kind, "ProblemLoadError");
}

TEST(OracleCacheTest, ComputesOncePerKey) {
  OracleCache cache;
  const auto a = cache.get("corpus:maze", 1.0);
  const auto b = cache.get("corpus:maze", 1.0);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_NE(cache.get("corpus:maze", 0.9).get(), a.get());
  EXPECT_EQ(cache.size(), 2u);
  ASSERT_TRUE(a->oracle.exact.has_value());
  EXPECT_FALSE(cache.get("corpus:maze", 0.9)->oracle.exact.has_value());
}

TEST(Config, JsonExpandsGrids) {
  const auto j = nlohmann::json::parse(R"({"experiments": [
      {"problem": "corpus:line", "algorithm": "dijkstra", "trials": 3},
      {"problem": "corpus:maze", "algorithm": "qlearn", "gamma": 0.9, "base_seed": 5,
       "learner": {"epsilon": [0.1, 0.5], "rho": [1.0], "rho_decay": 0.7, "episodes": 20, "explore": "pi4"}}]})");
  const auto cs = configs_from_json(j);
  ASSERT_EQ(cs.size(), 5u);
  EXPECT_EQ(cs[0].trials, 3u);
  EXPECT_EQ(cs[1].learner.epsilon, 0.1);
  EXPECT_EQ(cs[1].learner.rho, RhoSchedule::decay(0.7));
  EXPECT_EQ(cs[2].learner.rho, RhoSchedule::constant(1.0));
  EXPECT_EQ(cs[4].learner.plan, ExplorationPlan::kPiBase4);
  EXPECT_EQ(cs[4].base_seed, 5u);
  EXPECT_THROW(configs_from_json(nlohmann::json::parse(R"({"problem": "x"})")), Error);
  EXPECT_THROW(configs_from_json(nlohmann::json::parse(R"({"problem": "x", "algorithm": "qlearn",
      "learner": {"explore": "lol"}})")),
               Error);
}
