#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stratlum/errors.hpp"

// Optical materials: complex refractive index n + ik versus vacuum wavelength,
// backed by tabulated dispersion data with piecewise-linear interpolation.
// No extrapolation: queries outside the tabulated span throw.

namespace stratlum {

enum class MaterialKind { metal, dielectric, semiconductor, vacuum };

inline const char* to_string(MaterialKind k) {
  switch (k) {
    case MaterialKind::metal: return "metal";
    case MaterialKind::dielectric: return "dielectric";
    case MaterialKind::semiconductor: return "semiconductor";
    case MaterialKind::vacuum: return "vacuum";
  }
  return "?";
}

inline MaterialKind material_kind_from_string(const std::string& s) {
  if (s == "metal") return MaterialKind::metal;
  if (s == "dielectric") return MaterialKind::dielectric;
  if (s == "semiconductor") return MaterialKind::semiconductor;
  if (s == "vacuum") return MaterialKind::vacuum;
  throw InputError("unknown material kind '" + s + "'");
}

struct DispersionSample {
  double wavelength_nm;
  double n;
  double k;
};

class OpticalMaterial {
public:
  OpticalMaterial(std::string name, MaterialKind kind,
                  std::vector<DispersionSample> samples)
      : name_(std::move(name)), kind_(kind), samples_(std::move(samples)) {
    validate();
  }

  // Two identical synthetic nodes spanning [lo, hi]; handy in tests.
  static OpticalMaterial constant(std::string name, double n, double k,
                                  double lo_nm = 200.0, double hi_nm = 2000.0,
                                  MaterialKind kind = MaterialKind::dielectric) {
    return OpticalMaterial(std::move(name), kind,
                           {{lo_nm, n, k}, {hi_nm, n, k}});
  }

  const std::string& name() const { return name_; }
  MaterialKind kind() const { return kind_; }
  const std::vector<DispersionSample>& samples() const { return samples_; }
  double min_wavelength_nm() const { return samples_.front().wavelength_nm; }
  double max_wavelength_nm() const { return samples_.back().wavelength_nm; }

  bool covers(double wavelength_nm) const {
    if (kind_ == MaterialKind::vacuum) return true;
    return wavelength_nm >= min_wavelength_nm() &&
           wavelength_nm <= max_wavelength_nm();
  }

  // n + ik at the given vacuum wavelength.  Exact at table nodes.
  std::complex<double> refractive_index(double wavelength_nm) const {
    if (kind_ == MaterialKind::vacuum) return {1.0, 0.0};
    if (!covers(wavelength_nm))
      throw MaterialRangeError(
          "wavelength " + format_nm(wavelength_nm) + " nm outside the tabulated span of '" +
          name_ + "' [" + format_nm(min_wavelength_nm()) + ", " +
          format_nm(max_wavelength_nm()) + "] nm");
    auto hi = std::lower_bound(samples_.begin(), samples_.end(), wavelength_nm,
                               [](const DispersionSample& s, double w) {
                                 return s.wavelength_nm < w;
                               });
    if (hi->wavelength_nm == wavelength_nm) return {hi->n, hi->k};
    auto lo = hi - 1;
    const double t = (wavelength_nm - lo->wavelength_nm) /
                     (hi->wavelength_nm - lo->wavelength_nm);
    return {lo->n + t * (hi->n - lo->n), lo->k + t * (hi->k - lo->k)};
  }

  std::complex<double> permittivity(double wavelength_nm) const {
    const std::complex<double> nk = refractive_index(wavelength_nm);
    return nk * nk;
  }

  bool lossless_at(double wavelength_nm) const {
    return refractive_index(wavelength_nm).imag() == 0.0;
  }

private:
  void validate() const {
    if (samples_.empty())
      throw InputError("material '" + name_ + "' has no dispersion samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& s = samples_[i];
      if (!(s.wavelength_nm > 0.0))
        throw InputError("material '" + name_ + "': wavelength must be positive");
      if (s.k < 0.0)
        throw InputError("material '" + name_ + "': negative extinction (gain media unsupported)");
      if (i > 0 && !(s.wavelength_nm > samples_[i - 1].wavelength_nm))
        throw InputError("material '" + name_ + "': wavelengths must be strictly increasing");
    }
  }

  static std::string format_nm(double w) {
    std::ostringstream os;
    os << w;
    return os.str();
  }

  std::string name_;
  MaterialKind kind_;
  std::vector<DispersionSample> samples_;
};

inline std::complex<double> refractive_index(const OpticalMaterial& m, double wavelength_nm) {
  return m.refractive_index(wavelength_nm);
}

inline std::complex<double> permittivity(const OpticalMaterial& m, double wavelength_nm) {
  return m.permittivity(wavelength_nm);
}

// Dispersion file format: UTF-8 text.  First line is a header `# name kind`;
// later lines starting with '#' are comments; data rows are
// `wavelength_nm n k` separated by whitespace, wavelengths ascending.
inline OpticalMaterial parse_dispersion_text(const std::string& text,
                                             const std::string& source = "<string>") {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string name;
  MaterialKind kind = MaterialKind::dielectric;
  bool have_header = false;
  std::vector<DispersionSample> samples;

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream row(line);
    if (!have_header) {
      std::string hash;
      row >> hash >> name;
      std::string kind_str;
      row >> kind_str;
      if (hash != "#" || name.empty() || kind_str.empty())
        throw ParseError(source + ": expected header '# name kind'", lineno);
      kind = material_kind_from_string(kind_str);
      have_header = true;
      continue;
    }
    std::string first;
    if (!(row >> first)) continue;           // blank line
    if (first[0] == '#') continue;           // comment
    double w, n, k;
    std::istringstream fields(line);
    std::string trailing;
    if (!(fields >> w >> n >> k))
      throw ParseError(source + ": malformed dispersion row '" + line + "'", lineno);
    if (fields >> trailing)
      throw ParseError(source + ": trailing fields in dispersion row", lineno);
    if (!samples.empty() && w <= samples.back().wavelength_nm)
      throw ParseError(source + ": wavelengths must be strictly ascending", lineno);
    if (w <= 0.0) throw ParseError(source + ": wavelength must be positive", lineno);
    if (k < 0.0) throw ParseError(source + ": negative k not allowed", lineno);
    samples.push_back({w, n, k});
  }
  if (!have_header) throw ParseError(source + ": empty dispersion file", 0);
  if (samples.empty()) throw ParseError(source + ": no dispersion rows", lineno);
  return OpticalMaterial(name, kind, std::move(samples));
}

inline OpticalMaterial load_dispersion_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open dispersion file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_dispersion_text(buf.str(), path);
}

// Registry of materials addressed by name.
class MaterialSet {
public:
  MaterialSet() = default;

  void add(OpticalMaterial m) {
    const std::string key = m.name();
    materials_.insert_or_assign(key, std::move(m));
  }

  bool contains(const std::string& name) const { return materials_.count(name) != 0; }

  const OpticalMaterial& get(const std::string& name) const {
    auto it = materials_.find(name);
    if (it == materials_.end()) {
      std::string known;
      for (const auto& [k, v] : materials_) known += (known.empty() ? "" : ", ") + k;
      throw InputError("unknown material '" + name + "' (known: " + known + ")");
    }
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : materials_) out.push_back(k);
    return out;
  }

private:
  std::map<std::string, OpticalMaterial> materials_;
};

} // namespace stratlum
