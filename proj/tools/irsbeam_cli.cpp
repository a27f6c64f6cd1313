// irsbeam: Monte-Carlo sweeps of the alternating IRS beamforming algorithm.
//
//   irsbeam run --scenario scenario.json --out results/
//   irsbeam sweep-power [--scenario s.json] [--out dir] [--trials 200] [--seed 7]
//   irsbeam sweep-n     [--scenario s.json] [--out dir] [--trials 200] [--seed 7]
//
// IRSBEAM_THREADS caps the worker count (0 or unset: one per hardware thread).

#include "irsbeam/irsbeam.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <unistd.h>

namespace {

struct CommonOptions {
  std::string scenario;
  std::string out = ".";
  std::optional<std::string> name;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool scenario_required) {
  auto* s = cmd->add_option("--scenario", o.scenario, "scenario JSON file");
  if (scenario_required) s->required();
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--name", o.name, "file stem for <name>_raw.csv and <name>_agg.csv");
  cmd->add_option("--seed", o.seed, "master seed override");
  cmd->add_option("--trials", o.trials, "trial count override")->check(CLI::PositiveNumber);
}

unsigned threads_from_env() {
  const char* env = std::getenv("IRSBEAM_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0') throw std::invalid_argument(std::string("IRSBEAM_THREADS: not a number: ") + env);
  return static_cast<unsigned>(v);
}

void print_table(const irsbeam::SweepResult& res) {
  std::printf("%-14s %12s %16s %16s %14s %7s\n", "method", irsbeam::axis_name(res.axis), "mean_bps",
              "median_bps", "stderr_bps", "trials");
  for (const auto& a : res.aggregates)
    std::printf("%-14s %12g %16.6e %16.6e %14.4e %7zu\n", a.method.c_str(), a.axis_value, a.mean, a.median,
                a.std_error, a.trials);
}

int execute(irsbeam::SweepSpec spec, const CommonOptions& o) {
  if (o.seed) spec.master_seed = *o.seed;
  if (o.trials) spec.trials = *o.trials;
  if (o.name) spec.name = *o.name;
  spec.threads = threads_from_env();

  const bool tty = isatty(fileno(stderr));
  const auto res = irsbeam::run_sweep(spec, [&](std::size_t done, std::size_t total) {
    if (tty || done == total) std::fprintf(stderr, "\r%zu/%zu trials%s", done, total, done == total ? "\n" : "");
  });
  if (const auto failed = res.failures()) {
    std::fprintf(stderr, "warning: %zu method evaluations failed\n", failed);
    for (const auto& r : res.records)
      if (!r.ok) {
        std::fprintf(stderr, "  first failure: %s at %g trial %zu: %s\n", irsbeam::method_name(r.method),
                     r.axis_value, r.trial, r.error.c_str());
        break;
      }
  }
  const auto paths = irsbeam::write_results(res, o.out, spec.name);
  print_table(res);
  std::fprintf(stderr, "wrote %s and %s\n", paths.raw.c_str(), paths.agg.c_str());
  return 0;
}

irsbeam::Scenario scenario_or_default(const std::string& path) {
  return path.empty() ? irsbeam::parse_scenario_text("") : irsbeam::load_scenario(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alternating beamforming with IRS element allocation: Monte-Carlo sweeps"};
  app.require_subcommand(1);

  CommonOptions run_opts, power_opts, n_opts;
  auto* run = app.add_subcommand("run", "run the sweep described by a scenario file");
  add_common(run, run_opts, true);
  auto* sweep_power = app.add_subcommand("sweep-power", "min-rate versus transmit power");
  add_common(sweep_power, power_opts, false);
  auto* sweep_n = app.add_subcommand("sweep-n", "min-rate versus IRS size at a fixed transmit power");
  add_common(sweep_n, n_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return execute(irsbeam::load_scenario(run_opts.scenario).to_sweep_spec(), run_opts);
    }
    if (sweep_power->parsed()) {
      auto sc = scenario_or_default(power_opts.scenario);
      if (sc.axis != irsbeam::SweepAxis::TransmitPowerDbm) {
        sc.axis = irsbeam::SweepAxis::TransmitPowerDbm;
        sc.power_dbm = {0.0, 10.0, 20.0, 30.0};
        sc.axis_values = sc.power_dbm;
      }
      auto spec = sc.to_sweep_spec();
      if (power_opts.scenario.empty()) spec.name = "sweep_power";
      return execute(spec, power_opts);
    }
    if (sweep_n->parsed()) {
      auto sc = scenario_or_default(n_opts.scenario);
      if (sc.axis != irsbeam::SweepAxis::IrsElements) {
        sc.axis = irsbeam::SweepAxis::IrsElements;
        sc.power_dbm = {30.0};
        sc.axis_values = {20.0, 60.0, 100.0};
      }
      auto spec = sc.to_sweep_spec();
      if (n_opts.scenario.empty()) spec.name = "sweep_n";
      return execute(spec, n_opts);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "irsbeam: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
