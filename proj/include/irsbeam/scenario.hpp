#pragma once

// JSON scenario documents. Every section and key is optional; omitted values
// take the reference defaults (M = 8, N = 100, K = 4, 100/105/10 m links with
// exponents 3.6/4/4, -174 dBm/Hz over 10 MHz, V = 5, powers 0..30 dBm).
// Unknown keys are rejected.
//
//   {
//     "dims":      {"M": 8, "N": 100, "K": 4},
//     "pathloss":  {"distances": {"bs_irs": 100, "bs_ue": 105, "irs_ue": 10},
//                   "exponents": {"bs_irs": 3.6, "bs_ue": 4, "irs_ue": 4}},
//     "noise":     {"psd_dbm_per_hz": -174, "bandwidth_hz": 1e7},
//     "power":     {"values_dbm": [0, 10, 20, 30]},
//     "algorithm": {"V": 5, "intermediate": "rzf", "rzf_delta": 1e-13,
//                   "final": {"max_iters": 50, "tol": 1e-4}},
//     "sweep":     {"name": "sweep", "axis": "power", "values": [...],
//                   "trials": 500, "master_seed": 1},
//     "methods":   ["proposed-mrt", "proposed-zf", "proposed-rzf", "random", "no-irs"]
//   }
//
// On the "power" axis the swept values are power.values_dbm and sweep.values
// must be absent. On the "irs_elements" axis sweep.values lists the IRS sizes
// (default 20, 60, 100) and power.values_dbm holds the single fixed transmit
// power (default 30 dBm). The method "proposed" stands for the proposed
// algorithm with algorithm.intermediate as its intermediate beamformer.

#include "irsbeam/montecarlo.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace irsbeam {

/// Invalid scenario; the message starts with the dotted field path.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  ScenarioBase base;
  std::vector<double> power_dbm{0.0, 10.0, 20.0, 30.0};
  std::string intermediate = "rzf";
  std::string name = "sweep";
  SweepAxis axis = SweepAxis::TransmitPowerDbm;
  std::vector<double> axis_values{0.0, 10.0, 20.0, 30.0};
  std::size_t trials = 500;
  std::uint64_t master_seed = 1;

  SweepSpec to_sweep_spec() const {
    SweepSpec s;
    s.name = name;
    s.axis = axis;
    s.values = axis_values;
    s.trials = trials;
    s.base = base;
    s.master_seed = master_seed;
    s.fixed_power_dbm = power_dbm.front();
    return s;
  }
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void scenario_fail(const std::string& field, const std::string& what) {
  throw ScenarioError(field + ": " + what);
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) scenario_fail(path.empty() ? "<document>" : path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) scenario_fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

inline double get_number(const json& obj, const char* key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) scenario_fail(path + "." + key, "expected a number");
  return v.get<double>();
}

inline long long get_integer(const json& obj, const char* key, const std::string& path, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) scenario_fail(path + "." + key, "expected an integer");
  return v.get<long long>();
}

inline std::string get_string(const json& obj, const char* key, const std::string& path, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) scenario_fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> get_numbers(const json& obj, const char* key, const std::string& path) {
  const auto& v = obj.at(key);
  const std::string field = path + "." + key;
  if (!v.is_array() || v.empty()) scenario_fail(field, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) scenario_fail(field, "expected a nonempty array of numbers");
    out.push_back(x.get<double>());
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] > out[i - 1])) scenario_fail(field, "values must be strictly increasing");
  return out;
}

inline const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  return doc.contains(key) ? doc.at(key) : empty;
}

}  // namespace detail

/// Validates a parsed JSON document and fills in defaults.
inline Scenario parse_scenario(const nlohmann::json& doc) {
  using namespace detail;
  reject_unknown(doc, "", {"dims", "pathloss", "noise", "power", "algorithm", "sweep", "methods"});
  Scenario sc;

  {
    const auto& d = section(doc, "dims");
    reject_unknown(d, "dims", {"M", "N", "K"});
    const long long M = get_integer(d, "M", "dims", 8);
    const long long N = get_integer(d, "N", "dims", 100);
    const long long K = get_integer(d, "K", "dims", 4);
    if (M < 1) scenario_fail("dims.M", "must be >= 1");
    if (N < 0) scenario_fail("dims.N", "must be >= 0");
    if (K < 1) scenario_fail("dims.K", "must be >= 1");
    sc.base.dims = {static_cast<std::size_t>(M), static_cast<std::size_t>(N), static_cast<std::size_t>(K)};
  }
  {
    const auto& p = section(doc, "pathloss");
    reject_unknown(p, "pathloss", {"distances", "exponents"});
    const auto& dist = section(p, "distances");
    const auto& expo = section(p, "exponents");
    reject_unknown(dist, "pathloss.distances", {"bs_irs", "bs_ue", "irs_ue"});
    reject_unknown(expo, "pathloss.exponents", {"bs_irs", "bs_ue", "irs_ue"});
    auto& pl = sc.base.pathloss;
    pl.d_bi = get_number(dist, "bs_irs", "pathloss.distances", pl.d_bi);
    pl.d_bu = get_number(dist, "bs_ue", "pathloss.distances", pl.d_bu);
    pl.d_iu = get_number(dist, "irs_ue", "pathloss.distances", pl.d_iu);
    pl.beta_bi = get_number(expo, "bs_irs", "pathloss.exponents", pl.beta_bi);
    pl.beta_bu = get_number(expo, "bs_ue", "pathloss.exponents", pl.beta_bu);
    pl.beta_iu = get_number(expo, "irs_ue", "pathloss.exponents", pl.beta_iu);
    for (auto [v, f] : {std::pair{pl.d_bi, "bs_irs"}, {pl.d_bu, "bs_ue"}, {pl.d_iu, "irs_ue"}})
      if (!(v > 0)) scenario_fail(std::string("pathloss.distances.") + f, "must be > 0");
    for (auto [v, f] : {std::pair{pl.beta_bi, "bs_irs"}, {pl.beta_bu, "bs_ue"}, {pl.beta_iu, "irs_ue"}})
      if (!(v > 0)) scenario_fail(std::string("pathloss.exponents.") + f, "must be > 0");
  }
  {
    const auto& n = section(doc, "noise");
    reject_unknown(n, "noise", {"psd_dbm_per_hz", "bandwidth_hz"});
    sc.base.noise.psd_dbm_per_hz = get_number(n, "psd_dbm_per_hz", "noise", -174.0);
    sc.base.noise.bandwidth_hz = get_number(n, "bandwidth_hz", "noise", 1e7);
    if (!(sc.base.noise.bandwidth_hz > 0)) scenario_fail("noise.bandwidth_hz", "must be > 0");
  }
  {
    const auto& a = section(doc, "algorithm");
    reject_unknown(a, "algorithm", {"V", "intermediate", "rzf_delta", "final"});
    auto& alg = sc.base.algorithm;
    alg.V = static_cast<int>(get_integer(a, "V", "algorithm", 5));
    if (alg.V < 1) scenario_fail("algorithm.V", "must be >= 1");
    sc.intermediate = get_string(a, "intermediate", "algorithm", "rzf");
    if (sc.intermediate != "mrt" && sc.intermediate != "zf" && sc.intermediate != "rzf")
      scenario_fail("algorithm.intermediate", "must be one of mrt, zf, rzf");
    if (a.contains("rzf_delta")) {
      const double delta = get_number(a, "rzf_delta", "algorithm", 0.0);
      if (!(delta >= 0)) scenario_fail("algorithm.rzf_delta", "must be >= 0");
      alg.rzf_delta = delta;
    }
    const auto& f = section(a, "final");
    reject_unknown(f, "algorithm.final", {"max_iters", "tol"});
    alg.final_max_iters = static_cast<int>(get_integer(f, "max_iters", "algorithm.final", 50));
    alg.final_tol = get_number(f, "tol", "algorithm.final", 1e-4);
    if (alg.final_max_iters < 1) scenario_fail("algorithm.final.max_iters", "must be >= 1");
    if (!(alg.final_tol > 0)) scenario_fail("algorithm.final.tol", "must be > 0");
  }
  {
    const auto& s = section(doc, "sweep");
    reject_unknown(s, "sweep", {"name", "axis", "values", "trials", "master_seed"});
    sc.name = get_string(s, "name", "sweep", "sweep");
    if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos)
      scenario_fail("sweep.name", "must be a nonempty file stem");
    const std::string axis = get_string(s, "axis", "sweep", "power");
    const auto& p = section(doc, "power");
    reject_unknown(p, "power", {"values_dbm"});
    if (axis == "power") {
      sc.axis = SweepAxis::TransmitPowerDbm;
      if (s.contains("values")) scenario_fail("sweep.values", "not used on the power axis; set power.values_dbm");
      if (p.contains("values_dbm")) sc.power_dbm = get_numbers(p, "values_dbm", "power");
      sc.axis_values = sc.power_dbm;
    } else if (axis == "irs_elements") {
      sc.axis = SweepAxis::IrsElements;
      sc.power_dbm = {30.0};
      if (p.contains("values_dbm")) {
        sc.power_dbm = get_numbers(p, "values_dbm", "power");
        if (sc.power_dbm.size() != 1)
          scenario_fail("power.values_dbm", "the irs_elements axis needs exactly one fixed power");
      }
      sc.axis_values = {20.0, 60.0, 100.0};
      if (s.contains("values")) sc.axis_values = get_numbers(s, "values", "sweep");
      for (double v : sc.axis_values)
        if (v < 0 || v != std::floor(v)) scenario_fail("sweep.values", "IRS sizes must be nonnegative integers");
    } else {
      scenario_fail("sweep.axis", "must be 'power' or 'irs_elements'");
    }
    const long long trials = get_integer(s, "trials", "sweep", 500);
    if (trials < 1) scenario_fail("sweep.trials", "must be >= 1");
    sc.trials = static_cast<std::size_t>(trials);
    if (s.contains("master_seed")) {
      const auto& v = s.at("master_seed");
      if (!v.is_number_unsigned()) scenario_fail("sweep.master_seed", "expected a nonnegative integer");
      sc.master_seed = v.get<std::uint64_t>();
    }
  }
  if (doc.contains("methods")) {
    const auto& m = doc.at("methods");
    if (!m.is_array() || m.empty()) scenario_fail("methods", "expected a nonempty array of method names");
    sc.base.methods.clear();
    for (const auto& entry : m) {
      if (!entry.is_string()) scenario_fail("methods", "expected method names");
      std::string name = entry.get<std::string>();
      if (name == "proposed") name = "proposed-" + sc.intermediate;
      const auto method = parse_method(name);
      if (!method) scenario_fail("methods", "unknown method '" + name + "'");
      if (std::find(sc.base.methods.begin(), sc.base.methods.end(), *method) != sc.base.methods.end())
        scenario_fail("methods", "duplicate method '" + name + "'");
      sc.base.methods.push_back(*method);
    }
  }
  return sc;
}

/// Parses scenario text; an empty or whitespace-only document is the default scenario.
inline Scenario parse_scenario_text(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return parse_scenario(nlohmann::json::object());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("<document>: malformed JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError(path.string() + ": cannot open scenario file");
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_scenario_text(ss.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

}  // namespace irsbeam
