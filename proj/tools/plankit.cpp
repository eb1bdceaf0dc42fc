#include "plankit/corpus.hpp"
#include "plankit/discount.hpp"
#include "plankit/duality.hpp"
#include "plankit/episodic.hpp"
#include "plankit/harness.hpp"
#include "plankit/serialize.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace plankit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNotConverged = 3;

/// Errors that mean "the invocation was wrong" rather than "the data was".
bool is_usage_error(const std::string& kind) { return kind == "InvalidConfig" || kind == "Usage"; }

bool quiet = false;

std::ostream& progress() {
  static std::ofstream null;
  return quiet ? null : std::cerr;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write '" + path.string() + "'");
  out << text;
}

json rational_json(const Rational& r) {
  return r.denominator() == 1 ? json(r.numerator()) : json(to_string(r));
}

json optional_rational(const std::optional<Rational>& r) { return r ? rational_json(*r) : json(nullptr); }

json cycle_json(const PlanningProblem& p, const Cycle& c) {
  json states = json::array();
  for (StateId s : c.states) states.push_back(s.value);
  json actions = json::array();
  for (ActionId u : c.actions) actions.push_back(p.action_name(u));
  return {{"states", states}, {"actions", actions}, {"total_cost", rational_json(c.total_cost)},
          {"mean_cost", rational_json(c.mean_cost())}, {"contains_goal", c.contains_goal}};
}

json sequence_json(const PlanningProblem& p, const ActionSequence& s) {
  json actions = json::array();
  for (ActionId u : s.actions) actions.push_back(p.action_name(u));
  json path = json::array();
  for (StateId x : s.path) path.push_back(x.value);
  return {{"actions", actions}, {"path", path}, {"steps", s.steps()}, {"cost", rational_json(s.cost)}};
}

json policy_json(const PlanningProblem& p, const Policy& pi) {
  json out = json::array();
  for (ActionId u : pi.action) out.push_back(p.action_name(u));
  return out;
}

struct SolveArgs {
  std::string map;
  std::string algo = "dijkstra";
  double gamma = 1.0;
  double tol = 1e-9;
  std::string values_out;
  bool strict = false;
};

int run_solve(const SolveArgs& a) {
  const PlanningProblem p = load_problem(a.map).with_predictability(a.gamma);
  std::string table;
  std::uint64_t backups = 0;
  if (a.algo == "dijkstra") {
    const auto r = dijkstra<Rational>(p);
    table = value_table_csv(p, r.values);
    backups = r.stats.backups;
  } else {
    const SweepMode mode = a.algo == "vi" ? SweepMode::kSynchronous : SweepMode::kAsynchronous;
    ViOptions opts;
    opts.tol = a.tol;
    try {
      if (p.is_deterministic()) {
        const auto r = value_iteration<Rational>(p, mode, opts);
        table = value_table_csv(p, r.values);
        backups = r.stats.backups;
      } else {
        const auto r = value_iteration<double>(p, mode, opts);
        table = value_table_csv(p, r.values);
        backups = r.stats.backups;
      }
    } catch (const Error& e) {
      if (e.kind() == "MaxSweepsExceeded" && a.strict) {
        std::cerr << "ERROR(" << e.kind() << "): " << e.what() << '\n';
        return kExitNotConverged;
      }
      throw;
    }
  }
  progress() << "solved " << p.num_states() << " states with " << a.algo << " (" << backups << " backups)\n";
  if (a.values_out.empty())
    std::cout << table;
  else
    write_file(a.values_out, table);
  return kExitOk;
}

struct LearnArgs {
  std::string map;
  double epsilon = 1.0;
  std::optional<double> rho;
  std::optional<double> rho_decay;
  std::size_t episodes = 1000;
  std::size_t steps = 3000;
  std::uint64_t seed = 0;
  double gamma = 1.0;
  std::string explore = "random";
  double q_init = 0.0;
  std::string json_out;
  bool strict = false;
};

int run_learn(const LearnArgs& a) {
  LearnerConfig cfg;
  cfg.epsilon = a.epsilon;
  if (a.rho && a.rho_decay) throw Error("Usage", "--rho and --rho-decay are mutually exclusive");
  cfg.rho = a.rho_decay ? RhoSchedule::decay(*a.rho_decay) : RhoSchedule::constant(a.rho.value_or(1.0));
  cfg.episodes = a.episodes;
  cfg.steps_per_episode = a.steps;
  cfg.seed = a.seed;
  cfg.q_init = a.q_init;
  cfg.plan = a.explore == "pi4" ? ExplorationPlan::kPiBase4 : ExplorationPlan::kRandom;
  cfg.validate();
  const PlanningProblem p = load_problem(a.map).with_predictability(a.gamma);
  const Oracle oracle = compute_oracle(p);
  const ConvergenceTarget target{&oracle.values, oracle.rel_tol};
  json doc;
  TrialMetrics metrics;
  if (detail::learns_exactly(p, cfg)) {
    const auto r = run_qlearning<Rational>(p, cfg, target);
    doc = to_json(p, r);
    metrics = r.metrics;
  } else {
    const auto r = run_qlearning<double>(p, cfg, target);
    doc = to_json(p, r);
    metrics = r.metrics;
  }
  std::cout << to_json(metrics).dump(2) << '\n';
  if (!a.json_out.empty()) write_file(a.json_out, doc.dump(2) + "\n");
  if (a.strict && !metrics.converged_whole_space) {
    std::cerr << "ERROR(NotConverged): learned values differ from the optimum\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

struct BenchArgs {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::size_t threads = 1;
};

int run_bench(const BenchArgs& a) {
  const auto configs = load_experiment_configs(a.config);
  progress() << "running " << configs.size() << " experiments on " << a.threads << " thread(s)\n";
  const auto results = run_sweep(configs, a.threads);
  std::vector<ReportRow> rows;
  int status = kExitOk;
  const bool md = a.format == "md";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.ok()) {
      std::cerr << "ERROR(" << r.error_kind << "): experiment " << i << ": " << r.error_message << '\n';
      status = kExitData;
      continue;
    }
    char name[64];
    std::snprintf(name, sizeof name, "%03zu_%s.%s", i, r.report->row.algorithm.c_str(), md ? "md" : "csv");
    const std::vector<ReportRow> one{r.report->row};
    write_file(fs::path(a.out) / name, md ? emit_markdown(one) : emit_csv(one));
    rows.push_back(r.report->row);
  }
  const std::string all = md ? emit_markdown(rows) : emit_csv(rows);
  write_file(fs::path(a.out) / (md ? "sweep.md" : "sweep.csv"), all);
  std::cout << all;
  return status;
}

int run_duality(const std::string& map) {
  const PlanningProblem p = load_problem(map);
  const auto rep = verify_cost_reward_duality(p);
  json cost = json::array();
  json reward = json::array();
  for (std::size_t x = 0; x < p.num_states(); ++x) {
    cost.push_back(optional_rational(rep.cost_to_go.value[x]));
    reward.push_back(optional_rational(rep.reward_to_go.value[x]));
  }
  std::cout << json{{"holds", rep.holds}, {"cost_to_go", cost}, {"reward_to_go", reward}}.dump(2) << '\n';
  return kExitOk;
}

int run_discount(double alpha, const std::string& map, bool builtin) {
  if (builtin == !map.empty()) throw Error("Usage", "give exactly one of --map and --builtin-trap");
  const PlanningProblem p = builtin ? build_discount_trap_problem() : load_problem(map);
  const auto rep = discount_trap_report(p, alpha);
  json doc{{"alpha", rep.alpha},
           {"reaches_goal", rep.reaches_goal},
           {"true_cost", rep.true_cost ? rational_json(*rep.true_cost) : json("inf")},
           {"cycle", rep.cycle ? cycle_json(p, *rep.cycle) : json(nullptr)},
           {"policy", policy_json(p, rep.discounted_optimal_policy)}};
  std::cout << doc.dump(2) << '\n';
  return kExitOk;
}

int run_episodic(const std::string& map, std::size_t max_len, bool oracle) {
  const PlanningProblem p = load_problem(map);
  const MInterval iv = m_interval(p, max_len);
  json doc{{"max_len", max_len},
           {"lower", iv.lower ? rational_json(*iv.lower) : json("-inf")},
           {"upper", iv.upper ? rational_json(*iv.upper) : json("inf")},
           {"alpha_bound", iv.alpha_bound ? rational_json(*iv.alpha_bound) : json("-inf")},
           {"beta_bound", iv.beta_bound ? rational_json(*iv.beta_bound) : json("inf")},
           {"cycle_bound", iv.cycle_bound ? rational_json(*iv.cycle_bound) : json("inf")},
           {"admits_bonus", iv.admits_bonus()},
           {"u_star", sequence_json(p, iv.u_star)},
           {"min_mean_cycle", iv.min_mean_cycle ? cycle_json(p, *iv.min_mean_cycle) : json(nullptr)},
           {"sequences", {{"shorter", iv.shorter_count}, {"equal", iv.equal_count}, {"longer", iv.longer_count}}}};
  if (oracle) {
    json checks = json::array();
    const auto profiles = enumerate_policy_profiles(p);
    const Policy pi_star = extract_policy(p, dijkstra<Rational>(p).values);
    const auto star = profile_policy(p, pi_star);
    auto check = [&](const Rational& m, bool expect) {
      Rational best = *star.average(m);
      for (const auto& prof : profiles)
        if (auto v = prof.average(m); v && *v < best) best = *v;
      const bool optimal = *star.average(m) == best;
      checks.push_back({{"M", rational_json(m)}, {"inside", expect}, {"shortest_path_policy_optimal", optimal},
                        {"agrees", optimal == expect}});
    };
    for (const auto& m : sample_bonus_inside(iv)) check(m, true);
    for (const auto& m : sample_bonus_outside(iv)) check(m, false);
    doc["oracle"] = checks;
  }
  std::cout << doc.dump(2) << '\n';
  return kExitOk;
}

struct SweepArgs {
  int min_states = 2;
  int max_states = 5;
  std::size_t samples = 5;
  std::string out;
};

/// One CSV row per (instance, bonus) pair.
int run_bonus_sweep(const SweepArgs& a) {
  if (a.min_states < 2 || a.max_states > 8 || a.min_states > a.max_states)
    throw Error("Usage", "state counts must satisfy 2 <= min <= max <= 8");
  TinyFamilyOptions opt;
  opt.min_states = static_cast<std::uint8_t>(a.min_states);
  opt.max_states = static_cast<std::uint8_t>(a.max_states);
  std::ostringstream csv;
  csv << "instance,num_states,edges,M,inside,shortest_path_optimal,agrees\n";
  std::uint64_t rows = 0;
  std::uint64_t disagreements = 0;
  const auto instances = sweep_bonus_checks(opt, a.samples, [&](const BonusCheck& c) {
    ++rows;
    disagreements += c.agrees() ? 0 : 1;
    csv << c.instance << ',' << int(c.graph->num_states) << ',' << csv_field(c.graph->describe()) << ','
        << to_string(c.m) << ',' << c.inside << ',' << c.shortest_path_optimal << ',' << c.agrees() << '\n';
  });
  if (a.out.empty())
    std::cout << csv.str();
  else
    write_file(a.out, csv.str());
  progress() << instances << " instances, " << rows << " checks, " << disagreements << " disagreements\n";
  return kExitOk;
}

int run_corpus_generate(const std::string& out) {
  for (const auto& m : corpus_maps()) {
    write_file(fs::path(out) / (std::string(m.name) + ".map"), std::string(m.text));
    progress() << "wrote " << m.name << ".map\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular planning and Q-learning toolkit"};
  app.add_flag("--quiet", quiet, "Silence progress output on stderr");
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Compute optimal cost-to-go with a model-based planner");
  solve_cmd->add_option("--map", solve.map, "Map file or corpus:NAME")->required();
  solve_cmd->add_option("--algo", solve.algo)->check(CLI::IsMember({"dijkstra", "vi", "avi"}));
  solve_cmd->add_option("--gamma", solve.gamma, "Predictability in (0, 1]");
  solve_cmd->add_option("--tol", solve.tol, "Residual tolerance for stochastic value iteration");
  solve_cmd->add_option("--values-out", solve.values_out, "Write the value table CSV here instead of stdout");
  solve_cmd->add_flag("--strict", solve.strict, "Exit 3 when value iteration does not settle");

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn", "Run one Q-learning trial");
  learn_cmd->add_option("--map", learn.map)->required();
  learn_cmd->add_option("--epsilon", learn.epsilon)->required();
  auto* rho_opt = learn_cmd->add_option("--rho", learn.rho);
  auto* decay_opt = learn_cmd->add_option("--rho-decay", learn.rho_decay, "omega in rho = n^-omega");
  rho_opt->excludes(decay_opt);
  learn_cmd->add_option("--episodes", learn.episodes)->required();
  learn_cmd->add_option("--steps", learn.steps)->required();
  learn_cmd->add_option("--seed", learn.seed)->required();
  learn_cmd->add_option("--gamma", learn.gamma);
  learn_cmd->add_option("--explore", learn.explore)->check(CLI::IsMember({"random", "pi4"}));
  learn_cmd->add_option("--q-init", learn.q_init);
  learn_cmd->add_option("--json-out", learn.json_out);
  learn_cmd->add_flag("--strict", learn.strict, "Exit 3 when the learned values miss the optimum");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run an experiment sweep from a JSON config");
  bench_cmd->add_option("--config", bench.config)->required();
  bench_cmd->add_option("--out", bench.out)->required();
  bench_cmd->add_option("--format", bench.format)->check(CLI::IsMember({"csv", "md"}));
  bench_cmd->add_option("--threads", bench.threads)->check(CLI::PositiveNumber);

  auto* analyze_cmd = app.add_subcommand("analyze", "Analytical checks");
  analyze_cmd->require_subcommand(1);
  std::string duality_map;
  auto* duality_cmd = analyze_cmd->add_subcommand("duality", "Cost minimization vs reward maximization");
  duality_cmd->add_option("--map", duality_map)->required();
  double alpha = 0.0;
  std::string discount_map;
  bool builtin_trap = false;
  auto* discount_cmd = analyze_cmd->add_subcommand("discount", "Discounted-optimal policy and its true cost");
  discount_cmd->add_option("--alpha", alpha)->required();
  discount_cmd->add_option("--map", discount_map);
  discount_cmd->add_flag("--builtin-trap", builtin_trap);
  std::string episodic_map;
  std::size_t max_len = 0;
  bool with_oracle = false;
  auto* episodic_cmd = analyze_cmd->add_subcommand("episodic", "Reset-bonus interval");
  episodic_cmd->add_option("--map", episodic_map)->required();
  episodic_cmd->add_option("--max-len", max_len)->required();
  episodic_cmd->add_flag("--oracle", with_oracle, "Check sampled bonuses against exhaustive policy search");

  SweepArgs sweep;
  auto* sweep_cmd = analyze_cmd->add_subcommand("sweep", "Reset-bonus interval over the exhaustive small-graph family");
  sweep_cmd->add_option("--min-states", sweep.min_states);
  sweep_cmd->add_option("--max-states", sweep.max_states);
  sweep_cmd->add_option("--samples", sweep.samples, "Bonuses per side of the interval");
  sweep_cmd->add_option("--out", sweep.out, "Write the CSV here instead of stdout");

  auto* corpus_cmd = app.add_subcommand("corpus", "Built-in maps");
  corpus_cmd->require_subcommand(1);
  std::string corpus_out;
  auto* generate_cmd = corpus_cmd->add_subcommand("generate", "Write every corpus map to a directory");
  generate_cmd->add_option("--out", corpus_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR(Usage): " << e.what() << '\n';
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*solve_cmd) return run_solve(solve);
    if (*learn_cmd) return run_learn(learn);
    if (*bench_cmd) return run_bench(bench);
    if (*duality_cmd) return run_duality(duality_map);
    if (*discount_cmd) return run_discount(alpha, discount_map, builtin_trap);
    if (*episodic_cmd) return run_episodic(episodic_map, max_len, with_oracle);
    if (*sweep_cmd) return run_bonus_sweep(sweep);
    if (*generate_cmd) return run_corpus_generate(corpus_out);
  } catch (const Error& e) {
    std::cerr << "ERROR(" << e.kind() << "): " << e.what() << '\n';
    if (is_usage_error(e.kind())) {
      std::cerr << app.help();
      return kExitUsage;
    }
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "ERROR(InternalError): " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
