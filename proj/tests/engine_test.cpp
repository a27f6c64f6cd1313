#include "irsbeam/engine.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numeric>

namespace irsbeam {
namespace {

const NoiseModel kNoise;

TEST(RunAlternating, NoIrsEqualsBaseline) {
  const auto cs = testing::reference_instance(8, 0, 4, 21);
  AlgorithmConfig cfg;
  const auto res = run_alternating(cs, cfg, kNoise, 1.0);
  const auto base = run_baseline(cs, Baseline::NoIrs, kNoise, 1.0, cfg.final_beamformer);
  EXPECT_EQ(res.report.min_rate, base.min_rate);
  EXPECT_EQ(res.phases.size(), 0u);
}

TEST(RunAlternating, SingleUserReachesTriangleBound) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto cs = testing::reference_instance(4, 30, 1, seed);
    AlgorithmConfig cfg;
    cfg.V = 1;
    cfg.intermediate = Mrt{};
    cfg.seed = seed;
    int checked = 0;
    run_alternating(cs, cfg, kNoise, 1.0, [&](const StageEvent& e) {
      if (e.stage != Stage::PhasesUpdated) return;
      const CVec w = e.beams.W.col(0);
      double bound = std::abs(cs.direct.col(0).dot(w));
      for (Eigen::Index n = 0; n < 30; ++n) bound += std::abs(cs.irs_ue(n, 0)) * std::abs(cs.bs_irs.col(n).dot(w));
      const double achieved = std::abs(effective_channel(cs, e.phases, 0).dot(w));
      EXPECT_NEAR(achieved, bound, 1e-9 * bound);
      ++checked;
    });
    EXPECT_EQ(checked, 1);
  }
}

TEST(RunAlternating, StageOrderAndTraceShape) {
  const auto cs = testing::reference_instance(8, 40, 4, 3);
  AlgorithmConfig cfg;
  cfg.V = 3;
  cfg.check_invariants = true;
  std::vector<std::pair<Stage, int>> seen;
  const auto res = run_alternating(cs, cfg, kNoise, 1.0, [&](const StageEvent& e) {
    seen.emplace_back(e.stage, e.iteration);
  });
  std::vector<std::pair<Stage, int>> expect{{Stage::Initialized, 0}};
  for (int v = 1; v <= 3; ++v) {
    expect.emplace_back(Stage::Allocated, v);
    expect.emplace_back(Stage::PhasesUpdated, v);
    expect.emplace_back(Stage::BeamformerUpdated, v);
  }
  expect.emplace_back(Stage::Final, 4);
  EXPECT_EQ(seen, expect);
  ASSERT_EQ(res.trace.size(), 4u);
  EXPECT_TRUE(res.trace.back().final_stage);
  for (const auto& r : res.trace) {
    EXPECT_EQ(std::accumulate(r.allocation_sizes.begin(), r.allocation_sizes.end(), std::size_t{0}), 40u);
    EXPECT_EQ(r.per_user_rate.size(), 4u);
  }
  EXPECT_EQ(res.trace.back().min_rate, res.report.min_rate);
}

TEST(RunAlternating, AlignmentHoldsAfterEveryPhaseUpdate) {
  const auto cs = testing::reference_instance(8, 50, 4, 8);
  AlgorithmConfig cfg;
  cfg.seed = 8;
  run_alternating(cs, cfg, kNoise, 0.1, [&](const StageEvent& e) {
    if (e.stage != Stage::PhasesUpdated) return;
    for (std::size_t k = 0; k < 4; ++k) {
      const cplx ref = cs.direct.col(k).dot(e.beams.W.col(k));
      for (auto n : e.allocation->assigned[k]) {
        const cplx term = std::conj(cs.irs_ue(n, k)) * std::conj(e.phases.phi()(n)) * cs.bs_irs.col(n).dot(e.beams.W.col(k));
        EXPECT_LE(testing::phase_gap(term, ref), 1e-9);
      }
    }
  });
}

TEST(RunAlternating, Deterministic) {
  const auto cs = testing::reference_instance(8, 60, 4, 5);
  AlgorithmConfig cfg;
  cfg.seed = 77;
  const auto a = run_alternating(cs, cfg, kNoise, 1.0);
  const auto b = run_alternating(cs, cfg, kNoise, 1.0);
  EXPECT_EQ(a.report.min_rate, b.report.min_rate);
  EXPECT_EQ(a.phases.theta(), b.phases.theta());
  EXPECT_TRUE(a.beams.W == b.beams.W);
}

TEST(RunAlternating, RejectsBadConfig) {
  const auto cs = testing::reference_instance(2, 4, 2, 5);
  AlgorithmConfig cfg;
  cfg.V = 0;
  EXPECT_THROW(run_alternating(cs, cfg, kNoise, 1.0), std::invalid_argument);
  cfg.V = 1;
  cfg.intermediate = Zf{};
  const auto crowded = testing::reference_instance(2, 4, 3, 5);  // K > M
  EXPECT_THROW(run_alternating(crowded, cfg, kNoise, 1.0), RankDeficientError);
}

TEST(Oracle, SingleElementMatchesRoundedClosedForm) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto cs = testing::unit_instance(2, 1, 1, seed);
    std::mt19937_64 rng(seed);
    const BeamformerSet w{testing::random_cmat(2, 1, rng), 1.0};
    const NoiseModel nm{0.0, 1000.0};
    const auto o = brute_force_phase_oracle(cs, w, nm, 4);

    AllocationMap a;
    a.assigned = {{0}};
    const double exact = update_phases(cs, w, a, PhaseConfig::zeros(1)).theta()[0];
    const double step = kTwoPi / 4;
    const double rounded = wrap_angle(std::round(exact / step) * step);
    EXPECT_NEAR(o.phases.theta()[0], rounded, 1e-12) << "seed " << seed;
  }
}

TEST(Oracle, NoIrsReturnsBeamOnlyRate) {
  const auto cs = testing::reference_instance(2, 0, 2, 3);
  std::mt19937_64 rng(3);
  const auto w = mrt(cs.direct, 1.0);
  const auto o = brute_force_phase_oracle(cs, w, kNoise, 8);
  EXPECT_EQ(o.phases.size(), 0u);
  EXPECT_DOUBLE_EQ(o.min_rate, rates(cs, PhaseConfig{}, w, kNoise).min_rate);
}

TEST(Oracle, PermutationInvariant) {
  const auto cs = testing::reference_instance(2, 4, 2, 13);
  const auto w = mrt(cs.direct, 1.0);
  ChannelSet perm = cs;
  const std::vector<Eigen::Index> p{2, 0, 3, 1};
  for (Eigen::Index n = 0; n < 4; ++n) {
    perm.bs_irs.col(n) = cs.bs_irs.col(p[n]);
    perm.irs_ue.row(n) = cs.irs_ue.row(p[n]);
  }
  const double a = brute_force_phase_oracle(cs, w, kNoise, 8).min_rate;
  const double b = brute_force_phase_oracle(perm, w, kNoise, 8).min_rate;
  EXPECT_NEAR(a, b, 1e-10 * a);
}

TEST(Oracle, RejectsHugeSearch) {
  const auto cs = testing::reference_instance(2, 9, 2, 1);
  EXPECT_THROW(brute_force_phase_oracle(cs, mrt(cs.direct, 1.0), kNoise, 8), std::invalid_argument);
}

TEST(Oracle, BoundsProposedUpToQuantizationLoss) {
  // M = 2, K = 2, N = 4, 8 levels: the oracle dominates every quantized
  // configuration, so the continuous proposed phases can only beat it by what
  // rounding them to the grid costs.
  constexpr std::size_t L = 8;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto cs = testing::reference_instance(2, 4, 2, 4000 + seed);
    AlgorithmConfig cfg;
    cfg.seed = seed;
    const double P = 1.0;
    const auto res = run_alternating(cs, cfg, kNoise, P);
    const auto o = brute_force_phase_oracle(cs, res.beams, kNoise, L);

    std::vector<double> q(4);
    for (std::size_t n = 0; n < 4; ++n) {
      const double step = kTwoPi / L;
      q[n] = std::round(res.phases.theta()[n] / step) * step;
    }
    const double proposed = rates(cs, res.phases, res.beams, kNoise).min_rate;
    const double rounded = rates(cs, PhaseConfig(q), res.beams, kNoise).min_rate;
    EXPECT_GE(o.min_rate, rounded * (1 - 1e-12));
    EXPECT_LE(proposed, o.min_rate + std::max(0.0, proposed - rounded) + 1e-9 * o.min_rate);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> lev(0, L - 1);
    for (int t = 0; t < 32; ++t) {
      std::vector<double> th(4);
      for (auto& x : th) x = kTwoPi * static_cast<double>(lev(rng)) / L;
      EXPECT_GE(o.min_rate, rates(cs, PhaseConfig(th), res.beams, kNoise).min_rate * (1 - 1e-12));
    }
  }
}

TEST(Baseline, RandomIsSeededAndNoIrsMatchesEmptySurface) {
  const auto cs = testing::reference_instance(8, 100, 4, 2);
  const BeamformerKind fin = MaxMinSinr{};
  const auto a = run_baseline(cs, Baseline::RandomPhase, kNoise, 1.0, fin, 9);
  const auto b = run_baseline(cs, Baseline::RandomPhase, kNoise, 1.0, fin, 9);
  EXPECT_EQ(a.min_rate, b.min_rate);

  const auto none = run_baseline(cs, Baseline::NoIrs, kNoise, 1.0, fin);
  const auto empty = run_alternating(without_irs(cs), AlgorithmConfig{}, kNoise, 1.0);
  EXPECT_EQ(none.min_rate, empty.report.min_rate);
}

TEST(Baseline, RandomBeatsNoIrsOnAverage) {
  // 500 reference-geometry trials at 30 dBm; paired difference must be
  // positive by more than two standard errors.
  const BeamformerKind fin = MaxMinSinr{};
  std::vector<double> diff;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const auto cs = testing::reference_instance(8, 100, 4, 10000 + t);
    diff.push_back(run_baseline(cs, Baseline::RandomPhase, kNoise, 1.0, fin, t).min_rate -
                   run_baseline(cs, Baseline::NoIrs, kNoise, 1.0, fin).min_rate);
  }
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(diff.size());
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double se = std::sqrt(ss / (diff.size() - 1.0) / diff.size());
  EXPECT_GT(mean, 2.0 * se);
}

}  // namespace
}  // namespace irsbeam
