#pragma once

// Paired Monte-Carlo sweeps over transmit power or IRS size. Every trial draws
// one channel realization and evaluates all configured methods on it, so
// method comparisons are paired per trial.

#include "irsbeam/core.hpp"
#include "irsbeam/engine.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace irsbeam {

enum class Method { ProposedMrt, ProposedZf, ProposedRzf, Random, NoIrs };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::ProposedMrt: return "proposed-mrt";
    case Method::ProposedZf: return "proposed-zf";
    case Method::ProposedRzf: return "proposed-rzf";
    case Method::Random: return "random";
    case Method::NoIrs: return "no-irs";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
  for (auto m : {Method::ProposedMrt, Method::ProposedZf, Method::ProposedRzf, Method::Random, Method::NoIrs})
    if (s == method_name(m)) return m;
  return std::nullopt;
}

inline std::vector<Method> all_methods() {
  return {Method::ProposedMrt, Method::ProposedZf, Method::ProposedRzf, Method::Random, Method::NoIrs};
}

enum class SweepAxis { TransmitPowerDbm, IrsElements };

inline const char* axis_name(SweepAxis a) {
  return a == SweepAxis::TransmitPowerDbm ? "power_dbm" : "irs_elements";
}

/// Algorithm knobs shared by every method of a sweep.
struct AlgorithmSettings {
  int V = 5;
  std::optional<double> rzf_delta;  // unset: K sigma^2 B / P
  int final_max_iters = 50;
  double final_tol = 1e-4;
};

/// Everything about a scenario except the swept quantity.
struct ScenarioBase {
  SystemDims dims;
  PathlossParams pathloss;
  NoiseModel noise;
  AlgorithmSettings algorithm;
  std::vector<Method> methods = all_methods();
};

struct SweepSpec {
  std::string name = "sweep";
  SweepAxis axis = SweepAxis::TransmitPowerDbm;
  std::vector<double> values{0.0, 10.0, 20.0, 30.0};
  std::size_t trials = 500;
  ScenarioBase base;
  std::uint64_t master_seed = 1;
  double fixed_power_dbm = 30.0;  // transmit power on the IRS-size axis
  bool check_invariants = false;
  unsigned threads = 0;           // 0: hardware concurrency

  void validate() const {
    if (values.empty()) throw std::invalid_argument("SweepSpec: values must be nonempty");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1])) throw std::invalid_argument("SweepSpec: values must be strictly increasing");
    if (trials < 1) throw std::invalid_argument("SweepSpec: trials must be >= 1");
    if (base.methods.empty()) throw std::invalid_argument("SweepSpec: no methods configured");
    if (axis == SweepAxis::IrsElements)
      for (double v : values)
        if (v < 0 || v != std::floor(v)) throw std::invalid_argument("SweepSpec: IRS sizes must be nonnegative integers");
    base.dims.validate();
    base.pathloss.validate();
    base.noise.validate();
    if (base.algorithm.V < 1) throw std::invalid_argument("SweepSpec: algorithm.V must be >= 1");
  }
};

struct TrialRecord {
  Method method;
  double axis_value = 0.0;
  std::size_t trial = 0;
  double min_rate = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;
};

struct Aggregate {
  std::string method;
  double axis_value = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::TransmitPowerDbm;
  std::vector<double> values;
  std::vector<Method> methods;
  std::vector<TrialRecord> records;  // canonical order: method name, axis value, trial
  std::vector<Aggregate> aggregates;

  /// Per-trial min-rates of one method at one axis value, indexed by trial
  /// (NaN where the trial failed).
  std::vector<double> trial_rates(Method m, double axis_value) const {
    std::vector<double> out;
    for (const auto& r : records)
      if (r.method == m && r.axis_value == axis_value) {
        if (out.size() <= r.trial) out.resize(r.trial + 1, std::numeric_limits<double>::quiet_NaN());
        out[r.trial] = r.ok ? r.min_rate : std::numeric_limits<double>::quiet_NaN();
      }
    return out;
  }

  const Aggregate* find(Method m, double axis_value) const {
    for (const auto& a : aggregates)
      if (a.method == method_name(m) && a.axis_value == axis_value) return &a;
    return nullptr;
  }

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.ok; }));
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Child seed of one trial; depends only on its arguments.
inline std::uint64_t derive_seed(std::uint64_t master, double axis_value, std::size_t trial) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(axis_value + 0.0));  // +0.0 folds -0 into 0
  return splitmix64(h ^ static_cast<std::uint64_t>(trial));
}

/// Mean, median and standard error of the finite entries.
inline Aggregate summarize(std::vector<double> xs) {
  std::erase_if(xs, [](double x) { return !std::isfinite(x); });
  Aggregate a;
  a.trials = xs.size();
  if (xs.empty()) return a;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  a.mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - a.mean) * (x - a.mean);
  a.std_error = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  a.median = xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
  return a;
}

/// Sorts records canonically and recomputes the per (method, value) summaries.
inline std::vector<Aggregate> aggregate_records(std::vector<TrialRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::make_tuple(std::string(method_name(a.method)), a.axis_value, a.trial) <
           std::make_tuple(std::string(method_name(b.method)), b.axis_value, b.trial);
  });
  std::vector<Aggregate> out;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    std::vector<double> xs;
    while (j < records.size() && records[j].method == records[i].method &&
           records[j].axis_value == records[i].axis_value) {
      if (records[j].ok) xs.push_back(records[j].min_rate);
      ++j;
    }
    Aggregate a = summarize(std::move(xs));
    a.method = method_name(records[i].method);
    a.axis_value = records[i].axis_value;
    out.push_back(std::move(a));
    i = j;
  }
  return out;
}

inline AlgorithmConfig algorithm_config_for(Method m, const AlgorithmSettings& s, std::uint64_t seed,
                                            bool check_invariants) {
  AlgorithmConfig cfg;
  cfg.V = s.V;
  cfg.seed = seed;
  cfg.check_invariants = check_invariants;
  cfg.final_beamformer = MaxMinSinr{s.final_max_iters, s.final_tol};
  switch (m) {
    case Method::ProposedMrt: cfg.intermediate = Mrt{}; break;
    case Method::ProposedZf: cfg.intermediate = Zf{}; break;
    default: cfg.intermediate = Rzf{s.rzf_delta}; break;
  }
  return cfg;
}

/// Min-rate of one method on one channel realization.
inline double evaluate_method(Method m, const ChannelSet& cs, const ScenarioBase& base, double P,
                              std::uint64_t phase_seed, bool check_invariants) {
  const BeamformerKind final_bf = MaxMinSinr{base.algorithm.final_max_iters, base.algorithm.final_tol};
  switch (m) {
    case Method::NoIrs: return run_baseline(cs, Baseline::NoIrs, base.noise, P, final_bf).min_rate;
    case Method::Random: return run_baseline(cs, Baseline::RandomPhase, base.noise, P, final_bf, phase_seed).min_rate;
    default: {
      const auto cfg = algorithm_config_for(m, base.algorithm, phase_seed, check_invariants);
      return run_alternating(cs, cfg, base.noise, P).report.min_rate;
    }
  }
}

/// Trial-level inputs shared by every method of one (axis value, trial) pair.
struct TrialSetup {
  ChannelSet channels;
  double power_w = 0.0;
  std::uint64_t phase_seed = 0;  // random initial phases; shared by Random and all proposed variants
};

inline TrialSetup make_trial(const SweepSpec& spec, double axis_value, std::size_t trial) {
  const std::uint64_t child = derive_seed(spec.master_seed, axis_value, trial);
  SystemDims dims = spec.base.dims;
  double power_dbm = spec.fixed_power_dbm;
  if (spec.axis == SweepAxis::IrsElements)
    dims.N = static_cast<std::size_t>(axis_value);
  else
    power_dbm = axis_value;
  std::mt19937_64 rng(child);
  TrialSetup t;
  t.channels = sample_channels(dims, spec.base.pathloss, rng);
  t.power_w = dbm_to_watts(power_dbm);
  t.phase_seed = splitmix64(child ^ 0x5EEDF00Dull);
  return t;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (axis value, trial) work item, possibly on several threads.
/// Per-method failures are recorded on the trial and never abort the sweep.
inline SweepResult run_sweep(const SweepSpec& spec, const ProgressFn& progress = {}) {
  spec.validate();
  const std::size_t n_values = spec.values.size();
  const std::size_t n_methods = spec.base.methods.size();
  const std::size_t n_items = n_values * spec.trials;

  std::vector<TrialRecord> records(n_items * n_methods);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t item = next++; item < n_items; item = next++) {
      const std::size_t vi = item / spec.trials;
      const std::size_t t = item % spec.trials;
      const double value = spec.values[vi];
      std::optional<TrialSetup> setup;
      std::string setup_error;
      try {
        setup = make_trial(spec, value, t);
      } catch (const std::exception& e) {
        setup_error = e.what();
      }
      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        TrialRecord& rec = records[item * n_methods + mi];
        rec.method = spec.base.methods[mi];
        rec.axis_value = value;
        rec.trial = t;
        if (!setup) {
          rec.error = setup_error;
          continue;
        }
        try {
          rec.min_rate = evaluate_method(rec.method, setup->channels, spec.base, setup->power_w, setup->phase_seed,
                                         spec.check_invariants);
          rec.ok = true;
        } catch (const std::exception& e) {
          rec.error = e.what();
        }
      }
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, n_items);
      }
    }
  };

  const unsigned n_threads = std::min<std::size_t>(resolve_threads(spec.threads), std::max<std::size_t>(n_items, 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  SweepResult res;
  res.axis = spec.axis;
  res.values = spec.values;
  res.methods = spec.base.methods;
  res.records = std::move(records);
  res.aggregates = aggregate_records(res.records);
  return res;
}

// ---------------------------------------------------------------------------
// CSV persistence

inline const char* kRawHeader = "method,axis,axis_value,trial,min_rate_bps";
inline const char* kAggHeader = "method,axis_value,mean,median,stderr,trials";

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct ResultPaths {
  std::filesystem::path raw;
  std::filesystem::path agg;
};

/// Writes `<name>_raw.csv` (successful trials only) and `<name>_agg.csv` into
/// `dir`, creating it if needed.
inline ResultPaths write_results(const SweepResult& res, const std::filesystem::path& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  ResultPaths paths{dir / (name + "_raw.csv"), dir / (name + "_agg.csv")};

  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    return f;
  };

  {
    auto f = open(paths.raw);
    f << kRawHeader << '\n';
    for (const auto& r : res.records) {
      if (!r.ok) continue;
      f << method_name(r.method) << ',' << axis_name(res.axis) << ',' << format_double(r.axis_value) << ','
        << r.trial << ',' << format_double(r.min_rate) << '\n';
    }
    if (!f) throw std::runtime_error("write failed: " + paths.raw.string());
  }
  {
    auto f = open(paths.agg);
    f << kAggHeader << '\n';
    for (const auto& a : res.aggregates) {
      f << a.method << ',' << format_double(a.axis_value) << ',' << format_double(a.mean) << ','
        << format_double(a.median) << ',' << format_double(a.std_error) << ',' << a.trials << '\n';
    }
    if (!f) throw std::runtime_error("write failed: " + paths.agg.string());
  }
  return paths;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, const char* header) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != header)
    throw std::runtime_error(path.string() + ": unexpected header, want '" + header + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

}  // namespace detail

inline std::vector<TrialRecord> read_raw_csv(const std::filesystem::path& path) {
  std::vector<TrialRecord> out;
  for (const auto& row : detail::read_csv(path, kRawHeader)) {
    if (row.size() != 5) throw std::runtime_error(path.string() + ": raw row must have 5 fields");
    const auto m = parse_method(row[0]);
    if (!m) throw std::runtime_error(path.string() + ": unknown method '" + row[0] + "'");
    TrialRecord r;
    r.method = *m;
    r.axis_value = std::stod(row[2]);
    r.trial = std::stoul(row[3]);
    r.min_rate = std::stod(row[4]);
    r.ok = true;
    out.push_back(r);
  }
  return out;
}

inline std::vector<Aggregate> read_agg_csv(const std::filesystem::path& path) {
  std::vector<Aggregate> out;
  for (const auto& row : detail::read_csv(path, kAggHeader)) {
    if (row.size() != 6) throw std::runtime_error(path.string() + ": aggregate row must have 6 fields");
    Aggregate a;
    a.method = row[0];
    a.axis_value = std::stod(row[1]);
    a.mean = std::stod(row[2]);
    a.median = std::stod(row[3]);
    a.std_error = std::stod(row[4]);
    a.trials = std::stoul(row[5]);
    out.push_back(a);
  }
  return out;
}

}  // namespace irsbeam
