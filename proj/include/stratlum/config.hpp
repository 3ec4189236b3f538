#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratlum/design.hpp"
#include "stratlum/emission.hpp"
#include "stratlum/photophysics.hpp"
#include "stratlum/presets.hpp"
#include "stratlum/stack_io.hpp"
#include "stratlum/version.hpp"

namespace stratlum {

// Fully resolved description of one CLI run.  Parsed from JSON with unknown
// keys rejected; serialized back (with every default materialized) into the
// run manifest, which can itself be loaded as a config to repeat the run.
struct RunConfig {
  std::string command;
  nlohmann::json stack;
  DipoleSource dipole;
  double na = 0.7;
  double loss_floor = 0.0;
  QuadratureSettings quadrature;
  double farfield_theta_step_deg = 1.0;

  struct SweptStack {
    std::string label;
    nlohmann::json stack;
  };
  struct Sweep {
    std::string kind = "thickness";
    std::size_t layer_index = 0;
    double start_nm = 10.0;
    double stop_nm = 400.0;
    double step_nm = 5.0;
    std::string metric = "power_na";
    double min_prominence = -1.0;
    std::string reference_label = "none";
    std::vector<SweptStack> stacks;
  };
  std::optional<Sweep> sweep;

  struct Fit {
    std::string kind;
    std::string data_path;
    double rho = 1.0;
    double resolution_floor_ghz = 30.0;
  };
  std::optional<Fit> fit;

  std::optional<PhotonStreamSpec> synth;
};

namespace cfg_detail {

using nlohmann::json;
using detail::reject_unknown_keys;
using detail::require_key;

inline double number_at(const json& j, const char* key, const std::string& where,
                        double fallback, bool required = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required)
      throw InputError("missing key '" + std::string(key) + "' in " + where);
    return fallback;
  }
  if (!it->is_number())
    throw InputError("'" + std::string(key) + "' in " + where +
                     " must be a number");
  return it->get<double>();
}

inline std::string string_at(const json& j, const char* key,
                             const std::string& where,
                             const std::string& fallback,
                             bool required = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required)
      throw InputError("missing key '" + std::string(key) + "' in " + where);
    return fallback;
  }
  if (!it->is_string())
    throw InputError("'" + std::string(key) + "' in " + where +
                     " must be a string");
  return it->get<std::string>();
}

inline DipoleSource dipole_from_json(const json& j) {
  if (!j.is_object()) throw InputError("'dipole' must be a JSON object");
  reject_unknown_keys(
      j, {"wavelength_nm", "layer_index", "z_up_nm", "z_down_nm", "orientation"},
      "dipole");
  DipoleSource d;
  d.wavelength_nm = number_at(j, "wavelength_nm", "dipole", d.wavelength_nm);
  const double idx = number_at(j, "layer_index", "dipole", 0.0);
  if (idx < 0.0 || idx != std::floor(idx))
    throw InputError("'layer_index' in dipole must be a non-negative integer");
  d.layer_index = std::size_t(idx);
  d.z_up_nm = number_at(j, "z_up_nm", "dipole", 0.0, true);
  d.z_down_nm = number_at(j, "z_down_nm", "dipole", 0.0, true);
  d.orientation = orientation_from_string(
      string_at(j, "orientation", "dipole", "isotropic_average"));
  return d;
}

inline json dipole_to_json(const DipoleSource& d) {
  return {{"wavelength_nm", d.wavelength_nm},
          {"layer_index", d.layer_index},
          {"z_up_nm", d.z_up_nm},
          {"z_down_nm", d.z_down_nm},
          {"orientation", to_string(d.orientation)}};
}

inline QuadratureSettings quadrature_from_json(const json& j) {
  if (!j.is_object()) throw InputError("'quadrature' must be a JSON object");
  reject_unknown_keys(j, {"rel_tol", "abs_tol", "u_max", "max_panels"},
                      "quadrature");
  QuadratureSettings q;
  q.rel_tol = number_at(j, "rel_tol", "quadrature", q.rel_tol);
  q.abs_tol = number_at(j, "abs_tol", "quadrature", q.abs_tol);
  q.u_max = number_at(j, "u_max", "quadrature", q.u_max);
  const double panels = number_at(j, "max_panels", "quadrature",
                                  double(q.max_panels));
  if (panels < 1.0 || panels != std::floor(panels))
    throw InputError("'max_panels' in quadrature must be a positive integer");
  q.max_panels = std::size_t(panels);
  return q;
}

inline json quadrature_to_json(const QuadratureSettings& q) {
  return {{"rel_tol", q.rel_tol},
          {"abs_tol", q.abs_tol},
          {"u_max", q.u_max},
          {"max_panels", q.max_panels}};
}

inline RunConfig::Sweep sweep_from_json(const json& j,
                                        const nlohmann::json& base_stack) {
  if (!j.is_object()) throw InputError("'sweep' must be a JSON object");
  reject_unknown_keys(j,
                      {"kind", "layer_index", "start_nm", "stop_nm", "step_nm",
                       "metric", "min_prominence", "reference_label", "stacks"},
                      "sweep");
  RunConfig::Sweep s;
  s.kind = string_at(j, "kind", "sweep", s.kind);
  if (s.kind != "thickness" && s.kind != "wavelength")
    throw InputError("sweep 'kind' must be 'thickness' or 'wavelength'");
  const double idx = number_at(j, "layer_index", "sweep", 0.0);
  if (idx < 0.0 || idx != std::floor(idx))
    throw InputError("'layer_index' in sweep must be a non-negative integer");
  s.layer_index = std::size_t(idx);
  s.start_nm = number_at(j, "start_nm", "sweep", s.start_nm);
  s.stop_nm = number_at(j, "stop_nm", "sweep", s.stop_nm);
  s.step_nm = number_at(j, "step_nm", "sweep", s.step_nm);
  s.metric = string_at(j, "metric", "sweep", s.metric);
  metric_from_string(s.metric);
  s.min_prominence = number_at(j, "min_prominence", "sweep", s.min_prominence);
  s.reference_label = string_at(j, "reference_label", "sweep", s.reference_label);
  if (auto it = j.find("stacks"); it != j.end()) {
    if (!it->is_array()) throw InputError("sweep 'stacks' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& entry = (*it)[i];
      const std::string where = "sweep.stacks[" + std::to_string(i) + "]";
      if (!entry.is_object()) throw InputError(where + " must be an object");
      reject_unknown_keys(entry, {"label", "stack"}, where);
      RunConfig::SweptStack ss;
      ss.label = string_at(entry, "label", where, "", true);
      ss.stack = require_key(entry, "stack", where);
      s.stacks.push_back(std::move(ss));
    }
  }
  if (s.stacks.empty()) {
    if (base_stack.is_null())
      throw InputError("sweep needs a 'stack' or a 'sweep.stacks' list");
    s.stacks.push_back({"stack", base_stack});
  }
  return s;
}

inline json sweep_to_json(const RunConfig::Sweep& s) {
  json j{{"kind", s.kind},          {"layer_index", s.layer_index},
         {"start_nm", s.start_nm},  {"stop_nm", s.stop_nm},
         {"step_nm", s.step_nm},    {"metric", s.metric},
         {"min_prominence", s.min_prominence},
         {"reference_label", s.reference_label}};
  j["stacks"] = json::array();
  for (const auto& ss : s.stacks)
    j["stacks"].push_back({{"label", ss.label}, {"stack", ss.stack}});
  return j;
}

inline RunConfig::Fit fit_from_json(const json& j) {
  if (!j.is_object()) throw InputError("'fit' must be a JSON object");
  reject_unknown_keys(j, {"kind", "data", "rho", "resolution_floor_ghz"}, "fit");
  RunConfig::Fit f;
  f.kind = string_at(j, "kind", "fit", "", true);
  if (f.kind == "lorentzian") f.kind = "spectrum";
  if (f.kind != "saturation" && f.kind != "spectrum" && f.kind != "g2")
    throw InputError("fit 'kind' must be 'saturation', 'spectrum' or 'g2'");
  f.data_path = string_at(j, "data", "fit", "", true);
  f.rho = number_at(j, "rho", "fit", f.rho);
  f.resolution_floor_ghz =
      number_at(j, "resolution_floor_ghz", "fit", f.resolution_floor_ghz);
  return f;
}

inline json fit_to_json(const RunConfig::Fit& f) {
  return {{"kind", f.kind},
          {"data", f.data_path},
          {"rho", f.rho},
          {"resolution_floor_ghz", f.resolution_floor_ghz}};
}

inline PhotonStreamSpec synth_from_json(const json& j) {
  if (!j.is_object()) throw InputError("'synth' must be a JSON object");
  reject_unknown_keys(j,
                      {"excitation_rate_per_ns", "decay_rate_per_ns",
                       "shelve_rate_per_ns", "deshelve_rate_per_ns",
                       "signal_rate_cps", "background_rate_cps", "duration_s",
                       "bin_width_ns", "window_ns", "seed"},
                      "synth");
  PhotonStreamSpec s;
  s.excitation_rate_per_ns =
      number_at(j, "excitation_rate_per_ns", "synth", s.excitation_rate_per_ns);
  s.decay_rate_per_ns =
      number_at(j, "decay_rate_per_ns", "synth", s.decay_rate_per_ns);
  s.shelve_rate_per_ns =
      number_at(j, "shelve_rate_per_ns", "synth", s.shelve_rate_per_ns);
  s.deshelve_rate_per_ns =
      number_at(j, "deshelve_rate_per_ns", "synth", s.deshelve_rate_per_ns);
  s.signal_rate_cps = number_at(j, "signal_rate_cps", "synth", s.signal_rate_cps);
  s.background_rate_cps =
      number_at(j, "background_rate_cps", "synth", s.background_rate_cps);
  s.duration_s = number_at(j, "duration_s", "synth", s.duration_s);
  s.bin_width_ns = number_at(j, "bin_width_ns", "synth", s.bin_width_ns);
  s.window_ns = number_at(j, "window_ns", "synth", s.window_ns);
  const double seed = number_at(j, "seed", "synth", double(s.seed));
  if (seed < 0.0 || seed != std::floor(seed))
    throw InputError("'seed' in synth must be a non-negative integer");
  s.seed = std::uint64_t(seed);
  s.validate();
  return s;
}

inline json synth_to_json(const PhotonStreamSpec& s) {
  return {{"excitation_rate_per_ns", s.excitation_rate_per_ns},
          {"decay_rate_per_ns", s.decay_rate_per_ns},
          {"shelve_rate_per_ns", s.shelve_rate_per_ns},
          {"deshelve_rate_per_ns", s.deshelve_rate_per_ns},
          {"signal_rate_cps", s.signal_rate_cps},
          {"background_rate_cps", s.background_rate_cps},
          {"duration_s", s.duration_s},
          {"bin_width_ns", s.bin_width_ns},
          {"window_ns", s.window_ns},
          {"seed", s.seed}};
}

} // namespace cfg_detail

// Built-in run configurations reproducing the reflector study.
inline nlohmann::json preset_config(const std::string& name,
                                    const MaterialSet& materials) {
  using nlohmann::json;
  auto solve_preset = [&](const LayerStack& stack) {
    json j;
    j["command"] = "solve";
    j["stack"] = stack_to_json(stack);
    j["dipole"] = cfg_detail::dipole_to_json(presets::dipole());
    j["na"] = presets::kNumericalAperture;
    j["loss_floor"] = presets::kLossFloor;
    return j;
  };
  if (name == "paper_65nm")
    return solve_preset(
        presets::device_stack(materials, "ag", presets::kSpacerFirstOrderNm));
  if (name == "paper_265nm")
    return solve_preset(
        presets::device_stack(materials, "ag", presets::kSpacerSecondOrderNm));
  if (name == "paper_nometal")
    return solve_preset(
        presets::no_metal_stack(materials, presets::kSpacerFirstOrderNm));
  if (name == "paper_fig1c") {
    json j;
    j["command"] = "sweep";
    j["dipole"] = cfg_detail::dipole_to_json(presets::dipole());
    j["na"] = presets::kNumericalAperture;
    j["loss_floor"] = presets::kLossFloor;
    json stacks = json::array();
    for (const char* metal : {"ag", "au", "al", "none"})
      stacks.push_back(
          {{"label", metal},
           {"stack", stack_to_json(presets::stack_for(
                         materials, metal, presets::kSpacerFirstOrderNm))}});
    j["sweep"] = {{"kind", "thickness"},
                  {"layer_index", presets::kSpacerLayer},
                  {"start_nm", 10.0},
                  {"stop_nm", 400.0},
                  {"step_nm", 5.0},
                  {"metric", "power_na"},
                  {"reference_label", "none"},
                  {"stacks", stacks}};
    return j;
  }
  throw InputError("unknown preset '" + name +
                   "' (expected paper_fig1c, paper_65nm, paper_265nm or "
                   "paper_nometal)");
}

// Parses a config object (or a manifest wrapping one), expanding a "preset"
// key first; explicit top-level keys override the preset's values.
inline RunConfig parse_config(nlohmann::json j, const MaterialSet& materials) {
  using nlohmann::json;
  if (!j.is_object()) throw InputError("config must be a JSON object");
  if (j.contains("config")) {
    cfg_detail::reject_unknown_keys(
        j, {"tool", "version", "command", "timestamp", "config", "outputs"},
        "manifest");
    json inner = j.at("config");
    if (!inner.is_object())
      throw InputError("'config' in manifest must be a JSON object");
    if (j.contains("command") && !inner.contains("command"))
      inner["command"] = j.at("command");
    j = std::move(inner);
  }
  if (j.contains("preset")) {
    json expanded = preset_config(
        cfg_detail::string_at(j, "preset", "config", "", true), materials);
    for (const auto& item : j.items())
      if (item.key() != "preset") expanded[item.key()] = item.value();
    j = std::move(expanded);
  }
  cfg_detail::reject_unknown_keys(
      j,
      {"command", "stack", "stack_file", "dipole", "na", "loss_floor",
       "quadrature", "farfield_theta_step_deg", "sweep", "fit", "synth"},
      "config");

  RunConfig c;
  c.command = cfg_detail::string_at(j, "command", "config", "");
  if (j.contains("stack") && j.contains("stack_file"))
    throw InputError("config has both 'stack' and 'stack_file'");
  if (j.contains("stack_file")) {
    std::ifstream in(j.at("stack_file").get<std::string>());
    if (!in)
      throw InputError("cannot open stack file '" +
                       j.at("stack_file").get<std::string>() + "'");
    try {
      in >> c.stack;
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON in stack file: ") + e.what());
    }
  } else if (j.contains("stack")) {
    c.stack = j.at("stack");
  }
  if (!c.stack.is_null()) stack_from_json(c.stack, materials);

  if (j.contains("dipole")) c.dipole = cfg_detail::dipole_from_json(j.at("dipole"));
  c.na = cfg_detail::number_at(j, "na", "config", c.na);
  c.loss_floor = cfg_detail::number_at(j, "loss_floor", "config", c.loss_floor);
  if (c.loss_floor < 0.0) throw InputError("'loss_floor' must be non-negative");
  if (j.contains("quadrature"))
    c.quadrature = cfg_detail::quadrature_from_json(j.at("quadrature"));
  c.farfield_theta_step_deg = cfg_detail::number_at(
      j, "farfield_theta_step_deg", "config", c.farfield_theta_step_deg);
  if (!(c.farfield_theta_step_deg > 0.0))
    throw InputError("'farfield_theta_step_deg' must be positive");

  if (j.contains("sweep"))
    c.sweep = cfg_detail::sweep_from_json(j.at("sweep"), c.stack);
  if (j.contains("fit")) c.fit = cfg_detail::fit_from_json(j.at("fit"));
  if (j.contains("synth")) c.synth = cfg_detail::synth_from_json(j.at("synth"));
  return c;
}

inline RunConfig load_config_file(const std::string& path,
                                  const MaterialSet& materials) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("invalid JSON in '" + path + "': " + e.what());
  }
  return parse_config(std::move(j), materials);
}

// Serializes the fully resolved configuration; loading this JSON again
// reproduces the run exactly.
inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  if (!c.stack.is_null()) j["stack"] = c.stack;
  j["dipole"] = cfg_detail::dipole_to_json(c.dipole);
  j["na"] = c.na;
  j["loss_floor"] = c.loss_floor;
  j["quadrature"] = cfg_detail::quadrature_to_json(c.quadrature);
  j["farfield_theta_step_deg"] = c.farfield_theta_step_deg;
  if (c.sweep) j["sweep"] = cfg_detail::sweep_to_json(*c.sweep);
  if (c.fit) j["fit"] = cfg_detail::fit_to_json(*c.fit);
  if (c.synth) j["synth"] = cfg_detail::synth_to_json(*c.synth);
  return j;
}

} // namespace stratlum
