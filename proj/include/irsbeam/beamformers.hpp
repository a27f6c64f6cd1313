#pragma once

// Linear transmit beamformers on the effective downlink channel. Every
// function takes the M x K matrix whose column k is h_eff,k and returns beams
// whose total power is the budget P.

#include "irsbeam/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace irsbeam {

struct Mrt {};
struct Zf {};
struct Rzf {
  std::optional<double> delta;  // unset: K * sigma^2 B / P
};
struct MaxMinSinr {
  int max_iters = 50;
  double tol = 1e-4;
};

using BeamformerKind = std::variant<Mrt, Zf, Rzf, MaxMinSinr>;

inline std::string beamformer_name(const BeamformerKind& kind) {
  struct Visitor {
    std::string operator()(const Mrt&) const { return "mrt"; }
    std::string operator()(const Zf&) const { return "zf"; }
    std::string operator()(const Rzf&) const { return "rzf"; }
    std::string operator()(const MaxMinSinr&) const { return "maxmin"; }
  };
  return std::visit(Visitor{}, kind);
}

namespace detail {

inline void check_budget(double P) {
  if (!(P > 0.0) || !std::isfinite(P)) throw std::invalid_argument("beamformer: power budget must be > 0");
}

// Scales every column of `dirs` to norm sqrt(P/K).
inline BeamformerSet equal_power(CMat dirs, double P, const char* who) {
  const double per_user = std::sqrt(P / static_cast<double>(dirs.cols()));
  for (Eigen::Index k = 0; k < dirs.cols(); ++k) {
    const double norm = dirs.col(k).norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw RankDeficientError(std::string(who) + ": zero beam direction for user " + std::to_string(k));
    dirs.col(k) *= per_user / norm;
  }
  return {std::move(dirs), P};
}

inline void require_full_column_rank(const CMat& h_eff, const char* who) {
  if (h_eff.cols() > h_eff.rows())
    throw RankDeficientError(std::string(who) + ": K = " + std::to_string(h_eff.cols()) +
                             " users exceed M = " + std::to_string(h_eff.rows()) + " antennas");
  const Eigen::JacobiSVD<CMat> svd(h_eff);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double smin = s.size() ? s(s.size() - 1) : 0.0;
  if (!(smax > 0.0) || smin < 1e-10 * smax)
    throw RankDeficientError(std::string(who) + ": effective channel matrix is rank deficient (cond > 1e10)");
}

}  // namespace detail

/// Equal-power maximum ratio transmission, w_k = sqrt(P/K) h_k / |h_k|.
inline BeamformerSet mrt(const CMat& h_eff, double P) {
  detail::check_budget(P);
  return detail::equal_power(h_eff, P, "mrt");
}

/// Equal-power zero forcing: normalized columns of H (H^H H)^-1.
inline BeamformerSet zf(const CMat& h_eff, double P) {
  detail::check_budget(P);
  detail::require_full_column_rank(h_eff, "zf");
  const CMat gram = h_eff.adjoint() * h_eff;
  const CMat dirs = h_eff * gram.ldlt().solve(CMat::Identity(gram.rows(), gram.cols()));
  return detail::equal_power(dirs, P, "zf");
}

/// Equal-power regularized zero forcing: normalized columns of
/// (H H^H + delta I)^-1 H, evaluated as H (H^H H + delta I)^-1.
inline BeamformerSet rzf(const CMat& h_eff, double P, double delta) {
  detail::check_budget(P);
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("rzf: delta must be finite and >= 0");
  if (delta == 0.0) return zf(h_eff, P);
  const auto K = h_eff.cols();
  const CMat loaded = h_eff.adjoint() * h_eff + delta * CMat::Identity(K, K);
  const CMat dirs = h_eff * loaded.ldlt().solve(CMat::Identity(K, K));
  return detail::equal_power(dirs, P, "rzf");
}

/// Regularization used when none is configured.
inline double default_rzf_delta(std::size_t K, double noise_w, double P) {
  return static_cast<double>(K) * noise_w / P;
}

/// Solution of a SINR balancing problem with fixed directions.
struct BalancedPowers {
  RVec power;      // sums to the budget
  double sinr = 0; // common SINR of all users
};

/// Power levels that equalize every user's SINR at the largest common value
/// under sum(power) = P, for unit noise:
///
///   SINR_k = power_k gain_k / (sum_{i != k} coupling(k, i) power_i + 1)
///
/// The balanced point is the Perron eigenvector of the extended coupling
/// matrix [D C, D 1; 1^T D C / P, 1^T D 1 / P] with D = diag(1 / gain); its
/// eigenvalue is 1 / SINR.
inline BalancedPowers balance_powers(const RVec& gain, const RMat& coupling, double P) {
  const auto K = gain.size();
  if ((gain.array() <= 0.0).any()) throw RankDeficientError("balance_powers: zero useful gain");
  RMat ext = RMat::Zero(K + 1, K + 1);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index i = 0; i < K; ++i)
      if (i != k) ext(k, i) = coupling(k, i) / gain(k);
    ext(k, K) = 1.0 / gain(k);
  }
  ext.row(K) = ext.topRows(K).colwise().sum() / P;

  const Eigen::EigenSolver<RMat> es(ext);
  const auto& vals = es.eigenvalues();
  Eigen::Index top = 0;
  for (Eigen::Index i = 1; i < vals.size(); ++i)
    if (vals(i).real() > vals(top).real()) top = i;
  const RVec vec = es.eigenvectors().col(top).real();
  const double lambda = vals(top).real();
  if (!(lambda > 0.0) || vec(K) == 0.0) throw std::runtime_error("balance_powers: no positive Perron root");

  BalancedPowers out;
  out.power = (vec.head(K) / vec(K)).cwiseMax(0.0);
  const double total = out.power.sum();
  if (!(total > 0.0)) throw std::runtime_error("balance_powers: degenerate power vector");
  out.power *= P / total;
  out.sinr = 1.0 / lambda;
  return out;
}

struct MaxMinResult {
  BeamformerSet beams;
  double balanced_sinr = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Max-min SINR downlink beamforming by SINR balancing over the dual uplink.
///
/// Each round fixes the uplink powers and takes MMSE receive filters as beam
/// directions, then re-balances the uplink powers for those filters. The
/// balanced SINR is nondecreasing over rounds; iteration stops once its
/// relative change falls below `tol`. The downlink powers for the final
/// directions are balanced directly and reach the same SINR. If `max_iters`
/// is hit first the last iterate is returned with `converged = false`.
inline MaxMinResult maxmin_sinr(const CMat& h_eff, double P, double noise_w, int max_iters = 50,
                                double tol = 1e-4) {
  detail::check_budget(P);
  if (!(noise_w > 0.0)) throw std::invalid_argument("maxmin_sinr: noise power must be > 0");
  if (max_iters < 1) throw std::invalid_argument("maxmin_sinr: max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("maxmin_sinr: tol must be > 0");
  const auto M = h_eff.rows();
  const auto K = h_eff.cols();
  for (Eigen::Index k = 0; k < K; ++k)
    if (!(h_eff.col(k).norm() > 0.0)) throw RankDeficientError("maxmin_sinr: zero effective channel");

  // unit-noise scaling keeps the covariance well conditioned
  const CMat h = h_eff / std::sqrt(noise_w);

  RVec q = RVec::Constant(K, P / static_cast<double>(K));
  CMat dirs(M, K);
  RMat g(K, K);
  MaxMinResult res;
  double previous = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    CMat cov = CMat::Identity(M, M);
    for (Eigen::Index i = 0; i < K; ++i) cov.noalias() += q(i) * h.col(i) * h.col(i).adjoint();
    dirs = cov.llt().solve(h);
    dirs.colwise().normalize();

    // g(k, i) = |h_k^H u_i|^2
    g = (h.adjoint() * dirs).cwiseAbs2();
    const RVec own = g.diagonal();
    RMat uplink = g.transpose();
    uplink.diagonal().setZero();
    const BalancedPowers up = balance_powers(own, uplink, P);
    q = up.power;
    res.iterations = it;
    if (it > 1 && std::abs(up.sinr - previous) <= tol * up.sinr) {
      res.converged = true;
      break;
    }
    previous = up.sinr;
  }

  RMat downlink = g;
  downlink.diagonal().setZero();
  const BalancedPowers down = balance_powers(g.diagonal(), downlink, P);
  CMat W = dirs;
  for (Eigen::Index k = 0; k < K; ++k) W.col(k) *= std::sqrt(down.power(k));
  res.beams = {std::move(W), P};
  res.balanced_sinr = down.sinr;
  return res;
}

/// Builds the beams selected by `kind`.
inline BeamformerSet apply_beamformer(const BeamformerKind& kind, const CMat& h_eff, double P,
                                      double noise_w) {
  struct Visitor {
    const CMat& h;
    double P;
    double noise;
    BeamformerSet operator()(const Mrt&) const { return mrt(h, P); }
    BeamformerSet operator()(const Zf&) const { return zf(h, P); }
    BeamformerSet operator()(const Rzf& r) const {
      return rzf(h, P, r.delta.value_or(default_rzf_delta(static_cast<std::size_t>(h.cols()), noise, P)));
    }
    BeamformerSet operator()(const MaxMinSinr& m) const {
      return maxmin_sinr(h, P, noise, m.max_iters, m.tol).beams;
    }
  };
  return std::visit(Visitor{h_eff, P, noise_w}, kind);
}

}  // namespace irsbeam
