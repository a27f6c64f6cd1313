#include "irsbeam/metrics.hpp"
#include "irsbeam/phase_update.hpp"
#include "irsbeam/allocation.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace irsbeam {
namespace {

TEST(NoisePower, ConvertsDbmPerHz) {
  EXPECT_NEAR(noise_power({-174.0, 1e7}), 3.9811e-14, 1e-18);
  EXPECT_NEAR(noise_power({-174.0, 1e7}), dbm_to_watts(-104.0), 1e-27);
  EXPECT_NEAR(noise_power({-174.0, 1.0}), 3.9811e-21, 1e-25);  // -174 dBm
  EXPECT_NEAR(noise_power({0.0, 10.0}), 1e-2, 1e-17);
  EXPECT_THROW(noise_power({-174.0, 0.0}), std::invalid_argument);
}

TEST(Sinr, SingleUserNoInterference) {
  const CMat h = CMat::Ones(1, 1);
  const BeamformerSet w{CMat::Constant(1, 1, cplx{2.0, 0.0}), 4.0};
  EXPECT_DOUBLE_EQ(sinr_from_effective(h, w, 1.0, 0), 4.0);
}

TEST(Sinr, OrthogonalBeamGivesZero) {
  CMat h(2, 1);
  h << 1.0, 0.0;
  CMat W(2, 1);
  W << 0.0, 1.0;
  EXPECT_EQ(sinr_from_effective(h, {W, 1.0}, 1e-3, 0), 0.0);
}

TEST(Sinr, MatchesElementwiseExpansion) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto cs = testing::unit_instance(3, 6, 2, seed);
    std::mt19937_64 rng(seed * 7 + 1);
    const auto phi = random_phases(cs.elements(), rng);
    const BeamformerSet w{testing::random_cmat(3, 2, rng), 1.0};
    const NoiseModel nm{0.0, 100.0};  // 0.1 W
    for (std::size_t k = 0; k < 2; ++k) {
      const double direct = sinr(cs, phi, w, nm, k);
      const double expanded = testing::expanded_sinr(cs, phi, w.W, noise_power(nm), k);
      EXPECT_NEAR(direct, expanded, 1e-10 * expanded);
    }
  }
}

TEST(Sinr, InvariantToBeamPhaseRotation) {
  const auto cs = testing::unit_instance(4, 5, 3, 11);
  std::mt19937_64 rng(5);
  const auto phi = random_phases(cs.elements(), rng);
  BeamformerSet w{testing::random_cmat(4, 3, rng), 1.0};
  const NoiseModel nm{0.0, 1000.0};
  std::vector<double> before;
  for (std::size_t k = 0; k < 3; ++k) before.push_back(sinr(cs, phi, w, nm, k));
  w.W.col(1) *= std::polar(1.0, 1.234);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(sinr(cs, phi, w, nm, k), before[k], 1e-12 * before[k]);
}

TEST(Rates, ZeroSinrGivesZeroRates) {
  const CMat h = CMat::Identity(2, 2);
  const BeamformerSet w{CMat::Zero(2, 2), 1.0};
  const auto r = rates_from_effective(h, w, 1.0, 1e7);
  EXPECT_EQ(r.per_user_rate[0], 0.0);
  EXPECT_EQ(r.per_user_rate[1], 0.0);
  EXPECT_EQ(r.min_rate, 0.0);
}

TEST(Rates, Log2OfOnePlusSinr) {
  const CMat h = CMat::Identity(2, 2);
  CMat W = CMat::Zero(2, 2);
  W(0, 0) = 1.0;
  W(1, 1) = std::sqrt(3.0);
  const auto r = rates_from_effective(h, {W, 4.0}, 1.0, 1.0);
  EXPECT_NEAR(r.per_user_sinr[0], 1.0, 1e-15);
  EXPECT_NEAR(r.per_user_sinr[1], 3.0, 1e-14);
  EXPECT_NEAR(r.per_user_rate[0], 1.0, 1e-14);
  EXPECT_NEAR(r.per_user_rate[1], 2.0, 1e-14);
  EXPECT_NEAR(r.min_rate, 1.0, 1e-14);
}

TEST(Rates, MonotoneInSinr) {
  const CMat h = CMat::Identity(1, 1);
  double last = -1.0;
  for (double a = 0.0; a < 10.0; a += 0.5) {
    const auto r = rates_from_effective(h, {CMat::Constant(1, 1, a), 100.0}, 1.0, 1e6);
    EXPECT_GE(r.per_user_rate[0], last);
    last = r.per_user_rate[0];
  }
}

TEST(Rates, ReferenceGeometryRandomPhasesPositive) {
  const NoiseModel nm;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto cs = testing::reference_instance(8, 100, 4, 1000 + t);
    std::mt19937_64 rng(t);
    const auto phi = random_phases(100, rng);
    const CMat h = effective_channels(cs, phi);
    BeamformerSet w{h, 1.0};
    w.W.colwise().normalize();
    w.W *= 0.5;  // 1 W split equally over 4 users
    EXPECT_GT(rates(cs, phi, w, nm).min_rate, 0.0);
  }
}

TEST(DirectGain, Cases) {
  ChannelSet cs;
  cs.direct = CMat::Zero(2, 1);
  cs.direct(0, 0) = 1.0;
  cs.bs_irs.resize(2, 0);
  cs.irs_ue.resize(0, 1);
  CMat W(2, 1);
  W << 0.0, 1.0;
  EXPECT_EQ(direct_gain(cs, {W, 1.0}, 0), 0.0);
  W << 1.0, 0.0;
  EXPECT_EQ(direct_gain(cs, {W, 1.0}, 0), 1.0);

  const auto r = testing::unit_instance(4, 3, 2, 9);
  std::mt19937_64 rng(2);
  const BeamformerSet w{testing::random_cmat(4, 2, rng), 1.0};
  for (std::size_t k = 0; k < 2; ++k) {
    cplx ip{0.0, 0.0};
    for (Eigen::Index m = 0; m < 4; ++m) ip += std::conj(r.direct(m, k)) * w.W(m, k);
    EXPECT_NEAR(direct_gain(r, w, k), std::abs(ip), 1e-14);
  }
}

TEST(LeakageTerm, EmptyWhenUserOwnsEverything) {
  const auto cs = testing::unit_instance(3, 5, 2, 4);
  std::mt19937_64 rng(1);
  const auto phi = random_phases(5, rng);
  const BeamformerSet w{testing::random_cmat(3, 2, rng), 1.0};
  AllocationMap a;
  a.assigned = {{0, 1, 2, 3, 4}, {}};
  EXPECT_EQ(leakage_term(cs, phi, w, a, 0), cplx(0.0, 0.0));
}

TEST(LeakageTerm, SingleUserIsZero) {
  const auto cs = testing::unit_instance(3, 5, 1, 4);
  std::mt19937_64 rng(1);
  const auto phi = random_phases(5, rng);
  const BeamformerSet w{testing::random_cmat(3, 1, rng), 1.0};
  AllocationMap a;
  a.assigned = {{4, 2, 0, 1, 3}};
  EXPECT_EQ(leakage_term(cs, phi, w, a, 0), cplx(0.0, 0.0));
}

TEST(LeakageTerm, NumeratorDecompositionAfterPhaseUpdate) {
  // After the closed-form update, h_eff,k^H w_k splits into the aligned own
  // part plus the leakage from the other users' elements.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto cs = testing::unit_instance(4, 12, 3, seed);
    std::mt19937_64 rng(seed + 77);
    const BeamformerSet w{testing::random_cmat(4, 3, rng), 1.0};
    std::vector<double> p(3);
    for (std::size_t k = 0; k < 3; ++k) p[k] = direct_gain(cs, w, k);
    const auto counts = assignment_counts(p, 12);
    const auto order = order_users(counts.alpha);
    const auto alloc = allocate_elements(cs, w, counts, order);
    const auto phi = update_phases(cs, w, alloc, random_phases(12, rng));
    const CMat h = effective_channels(cs, phi);
    for (std::size_t k = 0; k < 3; ++k) {
      const cplx hd_w = cs.direct.col(k).dot(w.W.col(k));
      double own = std::abs(hd_w);
      for (auto n : alloc.assigned[k]) own += std::abs(std::conj(cs.irs_ue(n, k)) * cs.bs_irs.col(n).dot(w.W.col(k)));
      const cplx predicted = own * std::polar(1.0, std::arg(hd_w)) + leakage_term(cs, phi, w, alloc, k);
      const cplx actual = h.col(k).dot(w.W.col(k));
      EXPECT_LE(std::abs(predicted - actual), 1e-10 * std::abs(actual));
      EXPECT_NEAR(std::abs(actual), std::abs(predicted), 1e-10 * std::abs(actual));
    }
  }
}

}  // namespace
}  // namespace irsbeam
