#pragma once

#include "irsbeam/core.hpp"

#include <random>
#include <stdexcept>

namespace irsbeam {

/// Closed-form reflection update. Every element n in N_k is rotated so that its
/// cascaded contribution g_{n,k}^* phi_n^* h_n^H w_k arrives in phase with the
/// direct term h_d,k^H w_k:
///
///   theta_n = -arg(h_d,k^H w_k) - arg(g_{n,k}) + arg(h_n^H w_k)
///
/// Vanishing factors use arg(0) = 0. Elements outside every user set keep
/// their value from `prev`; a non-empty pool is rejected since allocation
/// must run first.
inline PhaseConfig update_phases(const ChannelSet& cs, const BeamformerSet& w,
                                 const AllocationMap& alloc, const PhaseConfig& prev) {
  const std::size_t N = cs.elements();
  const std::size_t K = cs.users();
  if (prev.size() != N) throw std::invalid_argument("update_phases: previous phases have wrong length");
  if (!alloc.pool.empty()) throw std::invalid_argument("update_phases: allocation pool is not empty");
  if (alloc.assigned.size() != K) throw std::invalid_argument("update_phases: allocation must have K sets");
  if (w.W.rows() != cs.direct.rows() || static_cast<std::size_t>(w.W.cols()) != K)
    throw std::invalid_argument("update_phases: beamformer dimensions do not match the channel");
  alloc.owners(N);  // throws unless a valid partition

  PhaseConfig next = prev;
  for (std::size_t k = 0; k < K; ++k) {
    if (alloc.assigned[k].empty()) continue;
    const auto kk = static_cast<Eigen::Index>(k);
    const CVec wk = w.W.col(kk);
    const double direct_angle = safe_arg(cs.direct.col(kk).dot(wk));
    for (auto n : alloc.assigned[k]) {
      const auto nn = static_cast<Eigen::Index>(n);
      const cplx hw = cs.bs_irs.col(nn).dot(wk);
      next.set(n, -direct_angle - safe_arg(cs.irs_ue(nn, kk)) + safe_arg(hw));
    }
  }
  return next;
}

/// I.i.d. uniform phases on [0, 2*pi).
template <class URBG>
PhaseConfig random_phases(std::size_t N, URBG& rng) {
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  std::vector<double> theta(N);
  for (auto& t : theta) t = uni(rng);
  return PhaseConfig(std::move(theta));
}

}  // namespace irsbeam
