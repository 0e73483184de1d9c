#pragma once

// Run configuration documents.
//
// A configuration is a JSON object. Keys are checked strictly: anything not
// listed below is rejected with an error naming the key.
//
//   {
//     "schema": 1,                         required, must equal kConfigSchema
//     "g1": 3e9, "g2": 3e9,                rad/s, required
//     "omega": 3e10,                       rad/s, required
//     "n_max": 2,                          cavity truncation, default 2
//     "mode": "idealized",                 idealized | full | open
//     "noise": {                           optional; per channel give a rate
//       "gamma_3r" | "t1_3": ...,          (rad/s) or a lifetime (s), not both
//       "gamma_3p" | "tphi_3": ...,
//       "kappa"    | "t_cavity": ...,
//       "gamma_2r" | "t1_2": ...,
//       "gamma_1r" | "t1_1": ...,
//       "branch_3_to_1": 0, "branch_3_to_0": 0
//     },
//     "budget": { "q_factor": 2e4, "nu_c": 3e9 },
//     "inputs": ["0", "+", {"label": "psi", "alpha": 0.6, "beta": [0, 0.8]}],
//     "integrator": { "dt": 1e-13 },
//     "spectators": [{"qubit": 1, "transition": [1, 3],
//                     "strength": 3e9, "detuning": 1.5e11}],
//     "grid": { "omega_over_g": [5, 10, 20, 40] }   sweep only, axes in order
//   }
//
// Complex amplitudes are a number (real) or a [re, im] pair.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluxqit/analysis.hpp"
#include "fluxqit/dynamics.hpp"
#include "fluxqit/errors.hpp"
#include "fluxqit/protocol.hpp"

namespace fluxqit {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigSchema = 1;

struct RunConfig {
  double g1 = 0.0;
  double g2 = 0.0;
  double omega = 0.0;
  int n_max = 2;
  Mode mode = Mode::idealized;
  std::optional<NoiseModel> noise;
  std::optional<double> q_factor;
  std::optional<double> nu_c;
  std::vector<InputState> inputs = cardinal_inputs();
  std::optional<double> dt;
  std::vector<SpectatorCoupling> spectators;
  std::vector<SweepAxis> grid;

  TransferParams transfer_params() const {
    TransferParams p;
    p.g1 = g1;
    p.g2 = g2;
    p.omega = omega;
    p.n_max = n_max;
    p.execution.mode = mode;
    p.execution.noise = noise.value_or(NoiseModel{});
    p.execution.spectators = spectators;
    p.execution.dt = dt;
    return p;
  }

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    auto same_grid = [](const std::vector<SweepAxis>& x, const std::vector<SweepAxis>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k].axis != y[k].axis || x[k].values != y[k].values) return false;
      }
      return true;
    };
    return a.g1 == b.g1 && a.g2 == b.g2 && a.omega == b.omega && a.n_max == b.n_max && a.mode == b.mode &&
           a.noise == b.noise && a.q_factor == b.q_factor && a.nu_c == b.nu_c && a.inputs == b.inputs &&
           a.dt == b.dt && a.spectators == b.spectators && same_grid(a.grid, b.grid);
  }
};

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::idealized: return "idealized";
    case Mode::full_coupling: return "full";
    case Mode::open_system: return "open";
  }
  return "";
}

namespace detail {

inline void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

inline double number_at(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' in " + where + " must be a number");
  return v.get<double>();
}

inline std::optional<double> optional_number(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  return number_at(obj, key, where);
}

inline double positive(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing required key '" + key + "' in " + where);
  const double v = number_at(obj, key, where);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("'" + key + "' in " + where + " must be > 0");
  return v;
}

inline complex parse_complex(const Json& v, const std::string& what) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError("'" + what + "' must be a number or a [re, im] pair");
}

inline Json complex_to_json(complex z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

/// One noise channel given either as a rate or as a lifetime.
inline double channel(const Json& noise, const char* rate_key, const char* lifetime_key) {
  const bool has_rate = noise.contains(rate_key);
  const bool has_life = noise.contains(lifetime_key);
  if (has_rate && has_life) {
    throw ConfigError(std::string("noise: give either '") + rate_key + "' or '" + lifetime_key +
                      "', not both (lifetimes and rates are mutually exclusive per channel)");
  }
  if (has_rate) {
    const double r = number_at(noise, rate_key, "noise");
    if (!(r >= 0.0)) throw ConfigError(std::string("noise: '") + rate_key + "' must be >= 0");
    return r;
  }
  if (has_life) {
    const double t = number_at(noise, lifetime_key, "noise");
    if (!(t > 0.0)) throw ConfigError(std::string("noise: '") + lifetime_key + "' must be > 0");
    return 1.0 / t;
  }
  return 0.0;
}

inline Qubit parse_qubit(const Json& v) {
  if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != 2)) {
    throw ConfigError("spectator 'qubit' must be 1 or 2");
  }
  return v.get<int>() == 1 ? Qubit::first : Qubit::second;
}

}  // namespace detail

inline RunConfig parse_config(const Json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown_keys(doc,
                      {"schema", "g1", "g2", "omega", "n_max", "mode", "noise", "budget", "inputs", "integrator",
                       "spectators", "grid"},
                      "configuration");
  if (!doc.contains("schema")) throw ConfigError("missing required key 'schema' (schema version)");
  if (!doc["schema"].is_number_integer() || doc["schema"].get<int>() != kConfigSchema) {
    throw ConfigError("unsupported schema version (expected " + std::to_string(kConfigSchema) + ")");
  }

  RunConfig cfg;
  cfg.g1 = positive(doc, "g1", "configuration");
  cfg.g2 = positive(doc, "g2", "configuration");
  cfg.omega = positive(doc, "omega", "configuration");

  if (doc.contains("n_max")) {
    if (!doc["n_max"].is_number_integer() || doc["n_max"].get<int>() < 1) {
      throw ConfigError("'n_max' must be an integer >= 1");
    }
    cfg.n_max = doc["n_max"].get<int>();
  }

  if (doc.contains("mode")) {
    const std::string m = doc["mode"].is_string() ? doc["mode"].get<std::string>() : "";
    if (m == "idealized") {
      cfg.mode = Mode::idealized;
    } else if (m == "full") {
      cfg.mode = Mode::full_coupling;
    } else if (m == "open") {
      cfg.mode = Mode::open_system;
    } else {
      throw ConfigError("'mode' must be one of idealized, full, open");
    }
  }

  if (doc.contains("noise")) {
    const Json& n = doc["noise"];
    if (!n.is_object()) throw ConfigError("'noise' must be an object");
    reject_unknown_keys(n,
                        {"gamma_3r", "t1_3", "gamma_3p", "tphi_3", "kappa", "t_cavity", "gamma_2r", "t1_2",
                         "gamma_1r", "t1_1", "branch_3_to_1", "branch_3_to_0"},
                        "noise");
    NoiseModel nm;
    nm.gamma_3r = channel(n, "gamma_3r", "t1_3");
    nm.gamma_3p = channel(n, "gamma_3p", "tphi_3");
    nm.kappa = channel(n, "kappa", "t_cavity");
    nm.gamma_2r = channel(n, "gamma_2r", "t1_2");
    nm.gamma_1r = channel(n, "gamma_1r", "t1_1");
    nm.branch_3_to_1 = optional_number(n, "branch_3_to_1", "noise").value_or(0.0);
    nm.branch_3_to_0 = optional_number(n, "branch_3_to_0", "noise").value_or(0.0);
    try {
      nm.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    cfg.noise = nm;
  }

  if (doc.contains("budget")) {
    const Json& b = doc["budget"];
    if (!b.is_object()) throw ConfigError("'budget' must be an object");
    reject_unknown_keys(b, {"q_factor", "nu_c"}, "budget");
    if (b.contains("q_factor")) cfg.q_factor = positive(b, "q_factor", "budget");
    if (b.contains("nu_c")) cfg.nu_c = positive(b, "nu_c", "budget");
  }

  if (doc.contains("inputs")) {
    const Json& list = doc["inputs"];
    if (!list.is_array() || list.empty()) throw ConfigError("'inputs' must be a non-empty array");
    cfg.inputs.clear();
    for (const Json& item : list) {
      if (item.is_string()) {
        auto in = cardinal_input(item.get<std::string>());
        if (!in) throw ConfigError("unknown input state label '" + item.get<std::string>() + "'");
        cfg.inputs.push_back(*in);
        continue;
      }
      if (!item.is_object()) throw ConfigError("each input must be a label or an {alpha, beta} object");
      reject_unknown_keys(item, {"label", "alpha", "beta"}, "inputs");
      if (!item.contains("alpha") || !item.contains("beta")) {
        throw ConfigError("explicit input needs both 'alpha' and 'beta'");
      }
      InputState in;
      in.alpha = parse_complex(item["alpha"], "alpha");
      in.beta = parse_complex(item["beta"], "beta");
      const double norm = std::norm(in.alpha) + std::norm(in.beta);
      if (std::abs(norm - 1.0) > 1e-9) {
        throw ConfigError("input amplitudes violate |alpha|^2 + |beta|^2 = 1 (got " + std::to_string(norm) + ")");
      }
      if (item.contains("label")) {
        if (!item["label"].is_string()) throw ConfigError("input 'label' must be a string");
        in.label = item["label"].get<std::string>();
      } else {
        in.label = "input" + std::to_string(cfg.inputs.size());
      }
      cfg.inputs.push_back(in);
    }
  }

  if (doc.contains("integrator")) {
    const Json& it = doc["integrator"];
    if (!it.is_object()) throw ConfigError("'integrator' must be an object");
    reject_unknown_keys(it, {"dt"}, "integrator");
    if (it.contains("dt")) cfg.dt = positive(it, "dt", "integrator");
  }

  if (doc.contains("spectators")) {
    const Json& list = doc["spectators"];
    if (!list.is_array()) throw ConfigError("'spectators' must be an array");
    for (const Json& item : list) {
      if (!item.is_object()) throw ConfigError("each spectator must be an object");
      reject_unknown_keys(item, {"qubit", "transition", "strength", "detuning"}, "spectators");
      for (const char* k : {"qubit", "transition", "strength", "detuning"}) {
        if (!item.contains(k)) throw ConfigError(std::string("missing required key '") + k + "' in spectators");
      }
      SpectatorCoupling s;
      s.qubit = parse_qubit(item["qubit"]);
      const Json& tr = item["transition"];
      if (!tr.is_array() || tr.size() != 2 || !tr[0].is_number_integer() || !tr[1].is_number_integer()) {
        throw ConfigError("spectator 'transition' must be a [lower, upper] pair of levels");
      }
      s.transition = {tr[0].get<int>(), tr[1].get<int>()};
      s.strength = number_at(item, "strength", "spectators");
      s.detuning = number_at(item, "detuning", "spectators");
      try {
        s.validate();
      } catch (const DomainError& e) {
        throw ConfigError(e.what());
      }
      cfg.spectators.push_back(s);
    }
  }

  if (doc.contains("grid")) {
    const Json& g = doc["grid"];
    if (!g.is_object()) throw ConfigError("'grid' must be an object of axis -> values");
    for (const auto& [name, values] : g.items()) {
      SweepAxis axis{parse_axis(name), {}};
      if (!values.is_array() || values.empty()) throw ConfigError("grid axis '" + name + "' must be a non-empty array");
      for (const Json& v : values) {
        if (!v.is_number()) throw ConfigError("grid axis '" + name + "' must contain numbers");
        const double x = v.get<double>();
        const bool ratio = axis.axis == Axis::omega_over_g || axis.axis == Axis::g2_over_g1;
        if (ratio ? !(x > 0.0) : !(x >= 0.0)) throw ConfigError("grid axis '" + name + "' has an invalid value");
        axis.values.push_back(x);
      }
      cfg.grid.push_back(std::move(axis));
    }
  }

  if (cfg.mode == Mode::open_system && !cfg.spectators.empty()) {
    throw ConfigError("spectator couplings are not supported in open mode");
  }
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig parse_config(const char* text) { return parse_config(std::string(text)); }

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

/// Canonical document for `cfg`; noise is written as rates.
inline Json to_json(const RunConfig& cfg) {
  Json doc;
  doc["schema"] = kConfigSchema;
  doc["g1"] = cfg.g1;
  doc["g2"] = cfg.g2;
  doc["omega"] = cfg.omega;
  doc["n_max"] = cfg.n_max;
  doc["mode"] = mode_name(cfg.mode);
  if (cfg.noise) {
    const NoiseModel& n = *cfg.noise;
    doc["noise"] = {{"gamma_3r", n.gamma_3r},           {"gamma_3p", n.gamma_3p},
                    {"kappa", n.kappa},                 {"gamma_2r", n.gamma_2r},
                    {"gamma_1r", n.gamma_1r},           {"branch_3_to_1", n.branch_3_to_1},
                    {"branch_3_to_0", n.branch_3_to_0}};
  }
  if (cfg.q_factor || cfg.nu_c) {
    Json b = Json::object();
    if (cfg.q_factor) b["q_factor"] = *cfg.q_factor;
    if (cfg.nu_c) b["nu_c"] = *cfg.nu_c;
    doc["budget"] = b;
  }
  Json inputs = Json::array();
  for (const auto& in : cfg.inputs) {
    inputs.push_back({{"label", in.label},
                      {"alpha", detail::complex_to_json(in.alpha)},
                      {"beta", detail::complex_to_json(in.beta)}});
  }
  doc["inputs"] = inputs;
  if (cfg.dt) doc["integrator"] = {{"dt", *cfg.dt}};
  if (!cfg.spectators.empty()) {
    Json list = Json::array();
    for (const auto& s : cfg.spectators) {
      list.push_back({{"qubit", qubit_number(s.qubit)},
                      {"transition", {s.transition.lower, s.transition.upper}},
                      {"strength", s.strength},
                      {"detuning", s.detuning}});
    }
    doc["spectators"] = list;
  }
  if (!cfg.grid.empty()) {
    Json g = Json::object();
    for (const auto& axis : cfg.grid) g[std::string(axis_name(axis.axis))] = axis.values;
    doc["grid"] = g;
  }
  return doc;
}

}  // namespace fluxqit
