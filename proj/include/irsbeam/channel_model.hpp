#pragma once

// Rayleigh-faded link generation with distance pathloss, and the effective
// BS -> user channel seen once the reflection phases are fixed.

#include "irsbeam/core.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace irsbeam {

/// Link distances in meters and pathloss exponents for the three hops.
struct PathlossParams {
  double d_bi = 100.0;  // BS - IRS
  double d_bu = 105.0;  // BS - user
  double d_iu = 10.0;   // IRS - user
  double beta_bi = 3.6;
  double beta_bu = 4.0;
  double beta_iu = 4.0;

  void validate() const {
    if (!(d_bi > 0 && d_bu > 0 && d_iu > 0))
      throw std::domain_error("PathlossParams: distances must be > 0");
    if (!(beta_bi > 0 && beta_bu > 0 && beta_iu > 0))
      throw std::domain_error("PathlossParams: exponents must be > 0");
  }
};

/// Amplitude pathloss sqrt(d^-beta).
inline double pathloss_coefficient(double d, double beta) {
  if (!(d > 0.0) || !(beta > 0.0))
    throw std::domain_error("pathloss_coefficient: distance and exponent must be > 0");
  return std::sqrt(std::pow(d, -beta));
}

namespace detail {

// CN(0, 1) scaled by eps: real and imaginary parts i.i.d. N(0, 1/2).
template <class URBG>
void fill_cn(CMat& m, double eps, URBG& rng) {
  std::normal_distribution<double> half(0.0, std::sqrt(0.5));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double re = half(rng);
      const double im = half(rng);
      m(r, c) = eps * cplx{re, im};
    }
}

}  // namespace detail

/// Draws one independent realization of all links. Draw order is fixed
/// (bs_irs, then direct, then irs_ue, each column-major) so a given seed
/// always produces the same ChannelSet.
template <class URBG>
ChannelSet sample_channels(const SystemDims& dims, const PathlossParams& pl, URBG& rng) {
  dims.validate();
  pl.validate();
  const auto M = static_cast<Eigen::Index>(dims.M);
  const auto N = static_cast<Eigen::Index>(dims.N);
  const auto K = static_cast<Eigen::Index>(dims.K);

  ChannelSet cs;
  cs.bs_irs.resize(M, N);
  cs.direct.resize(M, K);
  cs.irs_ue.resize(N, K);
  detail::fill_cn(cs.bs_irs, pathloss_coefficient(pl.d_bi, pl.beta_bi), rng);
  detail::fill_cn(cs.direct, pathloss_coefficient(pl.d_bu, pl.beta_bu), rng);
  detail::fill_cn(cs.irs_ue, pathloss_coefficient(pl.d_iu, pl.beta_iu), rng);
  return cs;
}

inline void check_phase_dims(const ChannelSet& cs, const PhaseConfig& phi) {
  if (phi.size() != cs.elements())
    throw std::invalid_argument("phase configuration length does not match IRS element count");
}

/// All effective channels at once: H diag(phi) G + H_d, column k for user k.
inline CMat effective_channels(const ChannelSet& cs, const PhaseConfig& phi) {
  check_phase_dims(cs, phi);
  if (cs.elements() == 0) return cs.direct;
  return cs.bs_irs * phi.phi().asDiagonal() * cs.irs_ue + cs.direct;
}

/// H diag(phi) g_k + h_d,k
inline CVec effective_channel(const ChannelSet& cs, const PhaseConfig& phi, std::size_t k) {
  check_phase_dims(cs, phi);
  if (k >= cs.users()) throw std::invalid_argument("effective_channel: user index out of range");
  const auto kk = static_cast<Eigen::Index>(k);
  if (cs.elements() == 0) return cs.direct.col(kk);
  return cs.bs_irs * phi.phi().cwiseProduct(cs.irs_ue.col(kk)) + cs.direct.col(kk);
}

}  // namespace irsbeam
