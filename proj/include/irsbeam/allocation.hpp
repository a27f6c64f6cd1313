#pragma once

// IRS element allocation. Element counts are inversely proportional to each
// user's direct beamforming gain; users are then served weakest first, each
// taking the strongest remaining elements for its cascaded BS-IRS-UE gain.

#include "irsbeam/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace irsbeam {

struct AllocationCounts {
  std::vector<double> alpha;       // 1 / p_k, +inf for p_k == 0
  std::vector<std::size_t> ell;    // elements per user, sums to N
  std::size_t remainder = 0;       // N - sum(floor shares), given to the weakest
  std::size_t remainder_recipient = 0;

  std::size_t total() const { return std::accumulate(ell.begin(), ell.end(), std::size_t{0}); }
};

/// Index of the largest value; ties go to the lowest index.
inline std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

/// Per-user element counts from the allocation metric p.
///
/// A user with p_k == 0 has alpha_k = +inf and is the weakest; with several
/// such users the lowest index takes all N elements.
inline AllocationCounts assignment_counts(std::span<const double> p, std::size_t N) {
  const std::size_t K = p.size();
  if (K == 0) throw std::invalid_argument("assignment_counts: need at least one user");
  AllocationCounts c;
  c.alpha.resize(K);
  c.ell.assign(K, 0);
  bool any_zero = false;
  for (std::size_t k = 0; k < K; ++k) {
    if (!(p[k] >= 0.0) || !std::isfinite(p[k]))
      throw std::invalid_argument("assignment_counts: metric must be finite and >= 0");
    if (p[k] == 0.0) {
      c.alpha[k] = std::numeric_limits<double>::infinity();
      any_zero = true;
    } else {
      c.alpha[k] = 1.0 / p[k];
    }
  }
  c.remainder_recipient = argmax_lowest(c.alpha);

  if (any_zero) {
    c.ell[c.remainder_recipient] = N;
    return c;
  }

  const double alpha_sum = std::accumulate(c.alpha.begin(), c.alpha.end(), 0.0);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < K; ++k) {
    // the slack absorbs rounding of shares that are exact integers
    const double share = static_cast<double>(N) * c.alpha[k] / alpha_sum;
    c.ell[k] = static_cast<std::size_t>(std::floor(share + 1e-9));
    assigned += c.ell[k];
  }
  if (assigned > N) throw std::logic_error("assignment_counts: floor shares exceed N");
  c.remainder = N - assigned;
  c.ell[c.remainder_recipient] += c.remainder;
  return c;
}

/// Users sorted by descending alpha; stable, so equal values keep index order.
inline std::vector<std::size_t> order_users(std::span<const double> alpha) {
  std::vector<std::size_t> order(alpha.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return alpha[a] > alpha[b]; });
  return order;
}

/// Cascaded gain |g_{n,k}^* h_n^H w_k| of every element for user k.
inline std::vector<double> cascaded_gains(const ChannelSet& cs, const BeamformerSet& w,
                                          std::size_t k) {
  const auto kk = static_cast<Eigen::Index>(k);
  const CVec hw = cs.bs_irs.adjoint() * w.W.col(kk);
  std::vector<double> gains(cs.elements());
  for (std::size_t n = 0; n < gains.size(); ++n) {
    const auto nn = static_cast<Eigen::Index>(n);
    gains[n] = std::abs(std::conj(cs.irs_ue(nn, kk)) * hw(nn));
  }
  return gains;
}

/// Greedy per-element allocation: users in `order` each pull their ell
/// strongest elements out of the pool, one argmax at a time.
inline AllocationMap allocate_elements(const ChannelSet& cs, const BeamformerSet& w,
                                       const AllocationCounts& counts,
                                       std::span<const std::size_t> order) {
  const std::size_t N = cs.elements();
  const std::size_t K = cs.users();
  if (counts.ell.size() != K) throw std::invalid_argument("allocate_elements: counts must have K entries");
  if (counts.total() != N)
    throw std::invalid_argument("allocate_elements: counts sum to " + std::to_string(counts.total()) +
                                " but N = " + std::to_string(N));
  if (order.size() != K) throw std::invalid_argument("allocate_elements: order must list every user");
  if (w.W.rows() != cs.bs_irs.rows() || static_cast<std::size_t>(w.W.cols()) != K)
    throw std::invalid_argument("allocate_elements: beamformer dimensions do not match the channel");

  AllocationMap alloc = AllocationMap::unallocated(N, K);
  std::vector<bool> seen(K, false);
  for (auto user : order) {
    if (user >= K || seen[user]) throw std::invalid_argument("allocate_elements: order is not a permutation");
    seen[user] = true;
    if (counts.ell[user] == 0) continue;
    const auto gains = cascaded_gains(cs, w, user);
    auto& mine = alloc.assigned[user];
    for (std::size_t taken = 0; taken < counts.ell[user]; ++taken) {
      // pool is kept in ascending index order, so strict > keeps the lowest index on ties
      std::size_t best = 0;
      for (std::size_t i = 1; i < alloc.pool.size(); ++i)
        if (gains[alloc.pool[i]] > gains[alloc.pool[best]]) best = i;
      mine.push_back(alloc.pool[best]);
      alloc.pool.erase(alloc.pool.begin() + static_cast<std::ptrdiff_t>(best));
    }
  }
  return alloc;
}

}  // namespace irsbeam
