#pragma once

#include "irsbeam/channel_model.hpp"
#include "irsbeam/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace irsbeam {

struct NoiseModel {
  double psd_dbm_per_hz = -174.0;
  double bandwidth_hz = 1e7;

  void validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("NoiseModel: bandwidth_hz must be > 0");
    if (!std::isfinite(psd_dbm_per_hz)) throw std::invalid_argument("NoiseModel: psd must be finite");
  }
};

struct RateReport {
  std::vector<double> per_user_sinr;
  std::vector<double> per_user_rate;  // bit/s
  double min_rate = 0.0;
};

/// sigma^2 * B in watts.
inline double noise_power(const NoiseModel& nm) {
  nm.validate();
  return dbm_to_watts(nm.psd_dbm_per_hz + 10.0 * std::log10(nm.bandwidth_hz));
}

namespace detail {

inline void check_beams(const CMat& h_eff, const BeamformerSet& w) {
  if (w.W.rows() != h_eff.rows() || w.W.cols() != h_eff.cols())
    throw std::invalid_argument("beamformer dimensions do not match the channel (expected M x K)");
}

}  // namespace detail

/// SINR of user k given the matrix of effective channels (M x K).
inline double sinr_from_effective(const CMat& h_eff, const BeamformerSet& w, double noise_w,
                                  std::size_t k) {
  detail::check_beams(h_eff, w);
  const auto kk = static_cast<Eigen::Index>(k);
  if (kk >= h_eff.cols()) throw std::invalid_argument("sinr: user index out of range");
  const Eigen::RowVectorXcd resp = h_eff.col(kk).adjoint() * w.W;
  double interference = 0.0;
  for (Eigen::Index i = 0; i < resp.size(); ++i)
    if (i != kk) interference += std::norm(resp(i));
  return std::norm(resp(kk)) / (interference + noise_w);
}

inline double sinr(const ChannelSet& cs, const PhaseConfig& phi, const BeamformerSet& w,
                   const NoiseModel& nm, std::size_t k) {
  const CMat h_eff = effective_channels(cs, phi);
  return sinr_from_effective(h_eff, w, noise_power(nm), k);
}

/// Rates B log2(1 + SINR) for every user and their minimum.
inline RateReport rates_from_effective(const CMat& h_eff, const BeamformerSet& w, double noise_w,
                                       double bandwidth_hz) {
  detail::check_beams(h_eff, w);
  const auto K = static_cast<std::size_t>(h_eff.cols());
  RateReport r;
  r.per_user_sinr.resize(K);
  r.per_user_rate.resize(K);
  const CMat resp = h_eff.adjoint() * w.W;  // (k, i) = h_eff,k^H w_i
  for (std::size_t k = 0; k < K; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    double interference = 0.0;
    for (Eigen::Index i = 0; i < resp.cols(); ++i)
      if (i != kk) interference += std::norm(resp(kk, i));
    r.per_user_sinr[k] = std::norm(resp(kk, kk)) / (interference + noise_w);
    r.per_user_rate[k] = bandwidth_hz * std::log2(1.0 + r.per_user_sinr[k]);
  }
  r.min_rate = *std::min_element(r.per_user_rate.begin(), r.per_user_rate.end());
  return r;
}

inline RateReport rates(const ChannelSet& cs, const PhaseConfig& phi, const BeamformerSet& w,
                        const NoiseModel& nm) {
  return rates_from_effective(effective_channels(cs, phi), w, noise_power(nm), nm.bandwidth_hz);
}

/// |h_d,k^H w_k|, the allocation metric.
inline double direct_gain(const ChannelSet& cs, const BeamformerSet& w, std::size_t k) {
  detail::check_beams(cs.direct, w);
  const auto kk = static_cast<Eigen::Index>(k);
  return std::abs(cs.direct.col(kk).dot(w.W.col(kk)));  // dot conjugates the left operand
}

/// Signal reaching user k through elements allocated to other users (or still
/// in the pool): sum over n not in N_k of g_{n,k}^* phi_n^* h_n^H w_k.
inline cplx leakage_term(const ChannelSet& cs, const PhaseConfig& phi, const BeamformerSet& w,
                         const AllocationMap& alloc, std::size_t k) {
  check_phase_dims(cs, phi);
  detail::check_beams(cs.direct, w);
  const std::size_t N = cs.elements();
  const auto owner = alloc.owners(N);
  const auto kk = static_cast<Eigen::Index>(k);
  const CVec hw = cs.bs_irs.adjoint() * w.W.col(kk);  // h_n^H w_k
  cplx sum{0.0, 0.0};
  for (std::size_t n = 0; n < N; ++n) {
    if (owner[n] == k) continue;
    const auto nn = static_cast<Eigen::Index>(n);
    sum += std::conj(cs.irs_ue(nn, kk)) * std::conj(phi.phi()(nn)) * hw(nn);
  }
  return sum;
}

}  // namespace irsbeam
