#include "plankit/corpus.hpp"
#include "plankit/planners.hpp"
#include "plankit/stochastic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace plankit;

namespace {

double mass_on(const OutcomeDistribution& d, StateId s) {
  for (const auto& o : d)
    if (o.state == s) return o.probability;
  return 0.0;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t r = 0; r < n; ++r) b[r] /= a[r][r];
  return b;
}

/// Optimal expected cost-to-go by enumerating every deterministic policy,
/// solving its linear system exactly, and keeping the componentwise best.
std::vector<double> policy_enumeration_oracle(const PlanningProblem& p) {
  const std::size_t n = p.num_states();
  std::vector<std::size_t> choice(n, 0);
  std::vector<double> best(n, INFINITY);
  for (;;) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (std::uint32_t x = 0; x < n; ++x) {
      a[x][x] = 1.0;
      if (p.is_goal(StateId(x))) continue;
      const auto& t = p.actions(StateId(x))[choice[x]];
      b[x] = to_double(t.cost);
      for (const auto& o : stochastic_outcomes(p, StateId(x), t.action)) a[x][o.state.index()] -= o.probability;
    }
    const auto g = solve_linear(a, b);
    bool proper = true;
    for (double v : g) proper = proper && std::isfinite(v) && v >= -1e-9;
    if (proper)
      for (std::size_t x = 0; x < n; ++x) best[x] = std::min(best[x], g[x]);
    std::size_t k = 0;
    while (k < n && (p.is_goal(StateId(static_cast<std::uint32_t>(k))) ||
                     ++choice[k] == p.actions(StateId(static_cast<std::uint32_t>(k))).size()))
      choice[k++] = 0;
    if (k == n) break;
  }
  return best;
}

}  // namespace

TEST(Outcomes, DeterministicLimit) {
  const auto p = corpus_problem("four_rooms");
  for (std::uint32_t x = 0; x < p.num_states(); ++x)
    for (const auto& t : p.actions(StateId(x))) {
      if (t.action.is_terminate()) continue;
      const auto d = stochastic_outcomes(p, StateId(x), t.action);
      ASSERT_EQ(d.size(), 1u);
      EXPECT_EQ(d[0].state, t.next);
      EXPECT_EQ(d[0].probability, 1.0);
    }
}

TEST(Outcomes, InteriorCellSpreadsUniformly) {
  const auto p = parse_grid_map("S..\n...\n..G\n").with_predictability(0.7);
  const StateId centre(4);
  const auto d = stochastic_outcomes(p, centre, kNorth);
  EXPECT_DOUBLE_EQ(mass_on(d, StateId(1)), 0.7);
  for (StateId s : {StateId(5), StateId(7), StateId(3), centre}) EXPECT_NEAR(mass_on(d, s), 0.075, 1e-15);
  EXPECT_EQ(d.size(), 5u);
}

TEST(Outcomes, CornerCell) {
  const auto p = parse_grid_map("S..\n...\n..G\n").with_predictability(0.5);
  const auto d = stochastic_outcomes(p, StateId(0), kEast);
  EXPECT_DOUBLE_EQ(mass_on(d, StateId(1)), 0.5);
  EXPECT_DOUBLE_EQ(mass_on(d, StateId(3)), 0.25);
  EXPECT_DOUBLE_EQ(mass_on(d, StateId(0)), 0.25);
}

TEST(Outcomes, DuplicatesMergeIntoOneEntry) {
  // Dead end: the only move leads back, so "stay" is the sole alternative.
  const auto p = parse_grid_map("S.G").with_predictability(0.6);
  const auto d = stochastic_outcomes(p, StateId(0), kEast);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_DOUBLE_EQ(mass_on(d, StateId(1)), 0.6);
  EXPECT_NEAR(mass_on(d, StateId(0)), 0.4, 1e-15);
}

TEST(Outcomes, TerminateIsRejected) {
  const auto p = parse_grid_map("S.G").with_predictability(0.6);
  EXPECT_THROW(stochastic_outcomes(p, StateId(2), kTerminate), Error);
  EXPECT_THROW(stochastic_outcomes(p, StateId(0), kNorth), Error);
}

TEST(Outcomes, DistributionsAreNormalizedEverywhere) {
  for (const auto& m : corpus_maps())
    for (double gamma : {0.3, 0.7, 0.999}) {
      const auto p = corpus_problem(m.name).with_predictability(gamma);
      for (std::uint32_t x = 0; x < p.num_states(); ++x)
        for (const auto& t : p.actions(StateId(x))) {
          if (t.action.is_terminate()) continue;
          const auto d = stochastic_outcomes(p, StateId(x), t.action);
          double sum = 0.0;
          std::map<std::uint32_t, int> seen;
          for (const auto& o : d) {
            EXPECT_GT(o.probability, 0.0);
            sum += o.probability;
            EXPECT_EQ(++seen[o.state.value], 1);
          }
          EXPECT_NEAR(sum, 1.0, 1e-12) << m.name;
        }
    }
}

TEST(Sampling, IntendedFrequencyMatchesGamma) {
  const auto p = parse_grid_map("S..\n...\n..G\n").with_predictability(0.7);
  RandomStream rng = RandomStream::sub(12345, SubStream::kEnvironment);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += sample_transition(p, StateId(4), kNorth, rng) == StateId(1) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.7, 0.01);
}

TEST(Sampling, SameSeedSameSequence) {
  const auto p = corpus_problem("open_room").with_predictability(0.8);
  auto draw = [&] {
    RandomStream rng = RandomStream::sub(99, SubStream::kEnvironment);
    std::vector<StateId> seq;
    StateId x = p.initial();
    for (int i = 0; i < 500 && !p.is_goal(x); ++i) {
      x = sample_transition(p, x, p.actions(x).front().action, rng);
      seq.push_back(x);
    }
    return seq;
  };
  EXPECT_EQ(draw(), draw());
  const auto det = p.with_predictability(1.0);
  RandomStream rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_transition(det, StateId(0), kEast, rng), det.successor(StateId(0), kEast));
}

TEST(StochasticVi, LineWorldMatchesLinearSolve) {
  const auto p = parse_grid_map("S.G").with_predictability(0.5);
  const auto v = value_iteration<double>(p, SweepMode::kSynchronous).values;
  // Hand elimination: G1 = 1 + G1/4 + G0/4, G0 = 1 + G0/2 + G1/2.
  EXPECT_NEAR(*v[StateId(0)], 5.0, 1e-8);
  EXPECT_NEAR(*v[StateId(1)], 3.0, 1e-8);
  EXPECT_EQ(*v[StateId(2)], 0.0);
}

TEST(StochasticVi, AgreesWithPolicyEnumeration) {
  for (const char* map : {"S.G", "S..G", "S..\n.#.\n..G\n", "S.#\n...\n#.G\n"})
    for (double gamma : {0.5, 0.8, 0.95}) {
      const auto p = parse_grid_map(map).with_predictability(gamma);
      const auto oracle = policy_enumeration_oracle(p);
      for (auto mode : {SweepMode::kSynchronous, SweepMode::kAsynchronous}) {
        const auto v = value_iteration<double>(p, mode).values;
        for (std::uint32_t x = 0; x < p.num_states(); ++x)
          EXPECT_NEAR(*v[StateId(x)], oracle[x], 1e-6 * std::max(1.0, oracle[x])) << map << " gamma " << gamma;
      }
    }
}

TEST(StochasticVi, BellmanResidualAfterOneMoreSweep) {
  const auto p = corpus_problem("four_rooms").with_predictability(0.9);
  ViOptions opts;
  opts.tol = 1e-9;
  const auto v = value_iteration<double>(p, SweepMode::kAsynchronous, opts).values;
  for (std::uint32_t x = 0; x < p.num_states(); ++x) {
    const StateId s(x);
    if (p.is_goal(s)) continue;
    double best = INFINITY;
    for (const auto& t : p.actions(s)) best = std::min(best, *action_value(p, v, s, t));
    EXPECT_LT(std::abs(best - *v[s]), 1e-9) << x;
  }
}

TEST(StochasticVi, GammaOneEqualsDeterministicExactly) {
  for (const auto& m : corpus_maps()) {
    const auto p = corpus_problem(m.name).with_predictability(1.0);
    const auto exact = value_iteration<Rational>(p, SweepMode::kSynchronous).values;
    EXPECT_EQ(value_iteration<double>(p, SweepMode::kSynchronous).values, to_double_table(exact)) << m.name;
  }
}

TEST(StochasticVi, RationalOnStochasticThrows) {
  const auto p = parse_grid_map("S.G").with_predictability(0.5);
  try {
    value_iteration<Rational>(p, SweepMode::kSynchronous);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "StochasticProblem");
  }
}
