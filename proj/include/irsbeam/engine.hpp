#pragma once

// Alternating beamforming with IRS element allocation, the two reference
// baselines, and an exhaustive quantized-phase search used as a test oracle.
//
// One iteration of the loop is
//   1. element counts from the direct gains |h_d,k^H w_k|
//   2. users ordered weakest first
//   3. greedy element allocation on the cascaded gains
//   4. closed-form phase update against the current beams
//   5. intermediate beamformer on the new effective channel
// and the final beamformer (max-min SINR by default) runs once afterwards.
//
// Cost per iteration is dominated by the M x N x K cascaded products and, for
// RZF, an O(M^3 K)-class solve; the phase update itself is O(N) per user.

#include "irsbeam/allocation.hpp"
#include "irsbeam/beamformers.hpp"
#include "irsbeam/channel_model.hpp"
#include "irsbeam/core.hpp"
#include "irsbeam/metrics.hpp"
#include "irsbeam/phase_update.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace irsbeam {

struct AlgorithmConfig {
  int V = 5;
  BeamformerKind intermediate = Rzf{};
  BeamformerKind final_beamformer = MaxMinSinr{};
  std::uint64_t seed = 0;
  // Re-check the partition and power constraints after every stage and throw
  // InvariantViolation on failure.
  bool check_invariants = false;

  void validate() const {
    if (V < 1) throw std::invalid_argument("AlgorithmConfig: V must be >= 1");
  }
};

struct IterationRecord {
  int iteration = 0;  // 1..V, or V + 1 for the final beamformer
  bool final_stage = false;
  std::vector<std::size_t> allocation_sizes;
  double min_rate = 0.0;
  std::vector<double> per_user_rate;
};

using IterationTrace = std::vector<IterationRecord>;

enum class Stage { Initialized, Allocated, PhasesUpdated, BeamformerUpdated, Final };

/// Snapshot handed to an observer. At PhasesUpdated, `beams` still holds the
/// beams the phase update was computed from.
struct StageEvent {
  Stage stage;
  int iteration;
  const AllocationCounts* counts;  // null before the first allocation
  const AllocationMap* allocation; // null before the first allocation
  const PhaseConfig& phases;
  const BeamformerSet& beams;
};

using StageObserver = std::function<void(const StageEvent&)>;

struct AlternatingResult {
  PhaseConfig phases;
  BeamformerSet beams;
  RateReport report;
  IterationTrace trace;
};

namespace detail {

inline void check_power(const BeamformerSet& w, double P, const char* where) {
  if (!(w.total_power() <= P * (1.0 + 1e-9)))
    throw InvariantViolation(std::string(where) + ": total beam power " + std::to_string(w.total_power()) +
                             " exceeds budget " + std::to_string(P));
}

inline void check_allocation(const AllocationMap& a, const AllocationCounts& c, std::size_t N) {
  if (!a.pool.empty()) throw InvariantViolation("allocation: pool not empty after allocation");
  if (!a.is_partition_of(N)) throw InvariantViolation("allocation: sets do not partition the elements");
  if (a.sizes() != c.ell) throw InvariantViolation("allocation: set sizes differ from element counts");
}

}  // namespace detail

/// Runs the alternating algorithm on one channel realization. Initial phases
/// are uniform random (seeded by cfg.seed) and the initial beams are the
/// intermediate beamformer on that initial effective channel.
inline AlternatingResult run_alternating(const ChannelSet& cs, const AlgorithmConfig& cfg,
                                         const NoiseModel& nm, double P,
                                         const StageObserver& observer = {}) {
  cs.validate();
  cfg.validate();
  const double noise_w = noise_power(nm);
  const std::size_t N = cs.elements();
  const std::size_t K = cs.users();

  std::mt19937_64 rng(cfg.seed);
  AlternatingResult out;
  out.phases = random_phases(N, rng);
  out.beams = apply_beamformer(cfg.intermediate, effective_channels(cs, out.phases), P, noise_w);
  if (cfg.check_invariants) detail::check_power(out.beams, P, "initial beamformer");

  auto notify = [&](Stage s, int v, const AllocationCounts* c, const AllocationMap* a) {
    if (observer) observer(StageEvent{s, v, c, a, out.phases, out.beams});
  };
  notify(Stage::Initialized, 0, nullptr, nullptr);

  std::vector<double> p(K);
  for (int v = 1; v <= cfg.V; ++v) {
    for (std::size_t k = 0; k < K; ++k) p[k] = direct_gain(cs, out.beams, k);
    const AllocationCounts counts = assignment_counts(p, N);
    const auto order = order_users(counts.alpha);
    const AllocationMap alloc = allocate_elements(cs, out.beams, counts, order);
    if (cfg.check_invariants) detail::check_allocation(alloc, counts, N);
    notify(Stage::Allocated, v, &counts, &alloc);

    out.phases = update_phases(cs, out.beams, alloc, out.phases);
    notify(Stage::PhasesUpdated, v, &counts, &alloc);

    const CMat h_eff = effective_channels(cs, out.phases);
    out.beams = apply_beamformer(cfg.intermediate, h_eff, P, noise_w);
    if (cfg.check_invariants) detail::check_power(out.beams, P, "intermediate beamformer");
    notify(Stage::BeamformerUpdated, v, &counts, &alloc);

    const RateReport r = rates_from_effective(h_eff, out.beams, noise_w, nm.bandwidth_hz);
    out.trace.push_back({v, false, alloc.sizes(), r.min_rate, r.per_user_rate});
  }

  const CMat h_eff = effective_channels(cs, out.phases);
  out.beams = apply_beamformer(cfg.final_beamformer, h_eff, P, noise_w);
  if (cfg.check_invariants) detail::check_power(out.beams, P, "final beamformer");
  out.report = rates_from_effective(h_eff, out.beams, noise_w, nm.bandwidth_hz);
  out.trace.push_back({cfg.V + 1, true, out.trace.back().allocation_sizes, out.report.min_rate,
                       out.report.per_user_rate});
  notify(Stage::Final, cfg.V + 1, nullptr, nullptr);
  return out;
}

/// The same links with the surface removed.
inline ChannelSet without_irs(const ChannelSet& cs) {
  ChannelSet d;
  d.direct = cs.direct;
  d.bs_irs.resize(cs.direct.rows(), 0);
  d.irs_ue.resize(0, cs.direct.cols());
  return d;
}

enum class Baseline { NoIrs, RandomPhase };

/// No-IRS: final beamformer on the direct channels only. Random: uniform
/// random phases (seeded), then the final beamformer on that channel.
inline RateReport run_baseline(const ChannelSet& cs, Baseline kind, const NoiseModel& nm, double P,
                               const BeamformerKind& final_beamformer, std::uint64_t seed = 0) {
  cs.validate();
  const double noise_w = noise_power(nm);
  ChannelSet used = kind == Baseline::NoIrs ? without_irs(cs) : cs;
  PhaseConfig phases;
  if (kind == Baseline::RandomPhase) {
    std::mt19937_64 rng(seed);
    phases = random_phases(used.elements(), rng);
  }
  const CMat h_eff = effective_channels(used, phases);
  const BeamformerSet w = apply_beamformer(final_beamformer, h_eff, P, noise_w);
  return rates_from_effective(h_eff, w, noise_w, nm.bandwidth_hz);
}

struct OracleResult {
  PhaseConfig phases;
  double min_rate = 0.0;
};

/// Largest enumeration the oracle accepts, in bits of N * log2(levels).
inline constexpr double kOracleMaxBits = 24.0;

/// Exhaustive search over theta_n in {2 pi l / levels}, beams held fixed.
/// Returns the configuration with the largest min-rate (first one found on
/// ties, enumerating element 0 fastest).
inline OracleResult brute_force_phase_oracle(const ChannelSet& cs, const BeamformerSet& w,
                                             const NoiseModel& nm, std::size_t levels) {
  cs.validate();
  const std::size_t N = cs.elements();
  if (levels < 1) throw std::invalid_argument("brute_force_phase_oracle: levels must be >= 1");
  const double bits = static_cast<double>(N) * std::log2(static_cast<double>(levels));
  if (bits > kOracleMaxBits)
    throw std::invalid_argument("brute_force_phase_oracle: " + std::to_string(levels) + "^" + std::to_string(N) +
                                " configurations exceed the 2^24 search limit");
  const double noise_w = noise_power(nm);

  // cascade(:, n, k) contributions: column n of H scaled by g_{n,k}; the
  // effective channel is direct + sum_n phi_n * H(:, n) g_{n,k}.
  const auto M = cs.direct.rows();
  const auto K = cs.direct.cols();
  std::vector<CMat> cascade(N);
  for (std::size_t n = 0; n < N; ++n) {
    const auto nn = static_cast<Eigen::Index>(n);
    cascade[n] = cs.bs_irs.col(nn) * cs.irs_ue.row(nn);  // M x K
  }
  std::vector<cplx> level_phi(levels);
  for (std::size_t l = 0; l < levels; ++l)
    level_phi[l] = std::polar(1.0, kTwoPi * static_cast<double>(l) / static_cast<double>(levels));

  std::vector<std::size_t> digits(N, 0);
  std::vector<std::size_t> best_digits = digits;
  double best = -1.0;
  CMat h_eff(M, K);
  while (true) {
    h_eff = cs.direct;
    for (std::size_t n = 0; n < N; ++n) h_eff += level_phi[digits[n]] * cascade[n];
    const double r = rates_from_effective(h_eff, w, noise_w, nm.bandwidth_hz).min_rate;
    if (r > best) {
      best = r;
      best_digits = digits;
    }
    std::size_t pos = 0;
    while (pos < N && ++digits[pos] == levels) digits[pos++] = 0;
    if (pos == N) break;
  }

  std::vector<double> theta(N);
  for (std::size_t n = 0; n < N; ++n)
    theta[n] = kTwoPi * static_cast<double>(best_digits[n]) / static_cast<double>(levels);
  return {PhaseConfig(std::move(theta)), best};
}

}  // namespace irsbeam
