#pragma once

// Shared value types for the IRS-aided multi-user downlink: dimensions,
// channel realizations, reflection phases, transmit beams and element
// allocations. Operations on these live in the per-module headers.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace irsbeam {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// A beamformer construction failed because the effective channels are not
/// linearly independent (or K > M).
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the engine when a checked run observes a broken partition or
/// power constraint.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct SystemDims {
  std::size_t M = 8;    // BS antennas
  std::size_t N = 100;  // IRS elements; 0 means no IRS
  std::size_t K = 4;    // single-antenna users

  void validate() const {
    if (M < 1) throw std::invalid_argument("SystemDims: M must be >= 1");
    if (K < 1) throw std::invalid_argument("SystemDims: K must be >= 1");
  }
};

/// One realization of every link.
///   bs_irs  M x N, column n is the BS -> element n channel h_n
///   direct  M x K, column k is the BS -> user k channel h_d,k
///   irs_ue  N x K, column k is g_k, entry (n, k) is g_{n,k}
struct ChannelSet {
  CMat bs_irs;
  CMat direct;
  CMat irs_ue;

  std::size_t antennas() const { return static_cast<std::size_t>(direct.rows()); }
  std::size_t elements() const { return static_cast<std::size_t>(irs_ue.rows()); }
  std::size_t users() const { return static_cast<std::size_t>(direct.cols()); }
  SystemDims dims() const { return {antennas(), elements(), users()}; }

  void validate() const {
    const auto M = direct.rows();
    const auto K = direct.cols();
    const auto N = irs_ue.rows();
    if (M < 1 || K < 1) throw std::invalid_argument("ChannelSet: need M >= 1 and K >= 1");
    if (irs_ue.cols() != K) throw std::invalid_argument("ChannelSet: irs_ue must have K columns");
    if (bs_irs.rows() != M || bs_irs.cols() != N)
      throw std::invalid_argument("ChannelSet: bs_irs must be M x N");
    if (!direct.allFinite() || !bs_irs.allFinite() || !irs_ue.allFinite())
      throw std::invalid_argument("ChannelSet: non-finite entry");
  }
};

/// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

/// Reflection coefficients phi_n = exp(j theta_n) with theta_n in [0, 2*pi).
/// The complex form is derived from the angles, so unit modulus always holds.
class PhaseConfig {
 public:
  PhaseConfig() = default;

  explicit PhaseConfig(std::vector<double> theta) : theta_(std::move(theta)) {
    for (auto& t : theta_) {
      if (!std::isfinite(t)) throw std::invalid_argument("PhaseConfig: non-finite angle");
      t = wrap_angle(t);
    }
    rebuild();
  }

  static PhaseConfig zeros(std::size_t n) { return PhaseConfig(std::vector<double>(n, 0.0)); }

  std::size_t size() const { return theta_.size(); }
  const std::vector<double>& theta() const { return theta_; }
  const CVec& phi() const { return phi_; }

  void set(std::size_t n, double theta) {
    theta_.at(n) = wrap_angle(theta);
    phi_(static_cast<Eigen::Index>(n)) = std::polar(1.0, theta_[n]);
  }

 private:
  void rebuild() {
    phi_.resize(static_cast<Eigen::Index>(theta_.size()));
    for (std::size_t n = 0; n < theta_.size(); ++n)
      phi_(static_cast<Eigen::Index>(n)) = std::polar(1.0, theta_[n]);
  }

  std::vector<double> theta_;
  CVec phi_;
};

/// Transmit beams W (M x K, column k is w_k) under total power budget P [W].
struct BeamformerSet {
  CMat W;
  double power_budget = 0.0;

  double total_power() const { return W.squaredNorm(); }
  CVec beam(std::size_t k) const { return W.col(static_cast<Eigen::Index>(k)); }
};

/// Partition of element indices {0..N-1} into per-user sets plus the
/// unallocated pool. Indices are zero-based.
struct AllocationMap {
  std::vector<std::vector<std::size_t>> assigned;
  std::vector<std::size_t> pool;

  static AllocationMap unallocated(std::size_t N, std::size_t K) {
    AllocationMap a;
    a.assigned.resize(K);
    a.pool.resize(N);
    for (std::size_t n = 0; n < N; ++n) a.pool[n] = n;
    return a;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s;
    s.reserve(assigned.size());
    for (const auto& set : assigned) s.push_back(set.size());
    return s;
  }

  /// Owner of every element; K marks "in pool". Throws if an index is out of
  /// range or appears twice, or if some element is missing.
  std::vector<std::size_t> owners(std::size_t N) const {
    const std::size_t K = assigned.size();
    std::vector<std::size_t> owner(N, K + 1);
    auto mark = [&](std::size_t n, std::size_t who) {
      if (n >= N) throw std::invalid_argument("AllocationMap: index out of range");
      if (owner[n] != K + 1) throw std::invalid_argument("AllocationMap: element listed twice");
      owner[n] = who;
    };
    for (std::size_t k = 0; k < K; ++k)
      for (auto n : assigned[k]) mark(n, k);
    for (auto n : pool) mark(n, K);
    for (std::size_t n = 0; n < N; ++n)
      if (owner[n] == K + 1) throw std::invalid_argument("AllocationMap: element missing from partition");
    return owner;
  }

  bool is_partition_of(std::size_t N) const {
    try {
      owners(N);
      return true;
    } catch (const std::invalid_argument&) {
      return false;
    }
  }
};

/// Angle of a complex number with the convention arg(0) = 0.
inline double safe_arg(cplx z) { return (z == cplx{0.0, 0.0}) ? 0.0 : std::arg(z); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace irsbeam
