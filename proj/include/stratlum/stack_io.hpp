#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratlum/errors.hpp"
#include "stratlum/material.hpp"
#include "stratlum/stratified.hpp"

// JSON description of a layer stack:
//   {
//     "superstrate": "air",
//     "substrate": "si",
//     "layers": [ {"material": "sio2", "thickness_nm": 65.0}, ... ]
//   }
// Material names are resolved against a MaterialSet; unknown keys are
// rejected so typos do not silently change the model.

namespace stratlum {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) ok = true;
    if (!ok)
      throw InputError("unknown key '" + item.key() + "' in " + where);
  }
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                         const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw InputError("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

} // namespace detail

inline LayerStack stack_from_json(const nlohmann::json& j,
                                  const MaterialSet& materials) {
  if (!j.is_object()) throw InputError("stack description must be a JSON object");
  detail::reject_unknown_keys(j, {"superstrate", "substrate", "layers"},
                              "stack description");

  const auto& sup = detail::require_key(j, "superstrate", "stack description");
  const auto& sub = detail::require_key(j, "substrate", "stack description");
  const auto& layers = detail::require_key(j, "layers", "stack description");
  if (!sup.is_string()) throw InputError("'superstrate' must be a material name");
  if (!sub.is_string()) throw InputError("'substrate' must be a material name");
  if (!layers.is_array()) throw InputError("'layers' must be an array");

  std::vector<Layer> parsed;
  parsed.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& entry = layers[i];
    const std::string where = "layers[" + std::to_string(i) + "]";
    if (!entry.is_object()) throw InputError(where + " must be an object");
    detail::reject_unknown_keys(entry, {"material", "thickness_nm"}, where);
    const auto& mat = detail::require_key(entry, "material", where);
    const auto& d = detail::require_key(entry, "thickness_nm", where);
    if (!mat.is_string()) throw InputError(where + ".material must be a material name");
    if (!d.is_number()) throw InputError(where + ".thickness_nm must be a number");
    parsed.push_back({materials.get(mat.get<std::string>()), d.get<double>()});
  }

  return LayerStack(materials.get(sup.get<std::string>()), std::move(parsed),
                    materials.get(sub.get<std::string>()));
}

inline nlohmann::json stack_to_json(const LayerStack& stack) {
  nlohmann::json j;
  j["superstrate"] = stack.superstrate().name();
  j["substrate"] = stack.substrate().name();
  j["layers"] = nlohmann::json::array();
  for (const auto& l : stack.layers())
    j["layers"].push_back({{"material", l.material.name()},
                           {"thickness_nm", l.thickness_nm}});
  return j;
}

inline LayerStack load_stack_file(const std::string& path,
                                  const MaterialSet& materials) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open stack file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what(), 0);
  }
  return stack_from_json(j, materials);
}

} // namespace stratlum
