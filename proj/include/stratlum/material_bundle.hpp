#pragma once

#include "stratlum/material.hpp"
#include "stratlum/material_tables.hpp"

namespace stratlum {

// The dispersion set shipped with the tool (silver/gold from Johnson &
// Christy, aluminium from a Rakic Lorentz-Drude fit, fused silica from
// Malitson, silicon from Aspnes & Studna, constant-index diamond, air,
// vacuum).  Tables live in data/materials/ and are embedded at build time.
inline const MaterialSet& bundled_materials() {
  static const MaterialSet set = [] {
    MaterialSet s;
    for (const char* text : data::dispersion_tables)
      s.add(parse_dispersion_text(text, "<bundled>"));
    return s;
  }();
  return set;
}

} // namespace stratlum
