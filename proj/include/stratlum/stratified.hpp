#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stratlum/errors.hpp"
#include "stratlum/material.hpp"

// Planar multilayer geometry and transfer-matrix machinery: Fresnel
// amplitudes at a single interface and generalized reflection/transmission
// of arbitrary layer sequences at real transverse wavevector.
//
// Conventions (fixed; the emission formulas depend on them):
//   * time dependence exp(-i w t); absorbing media have Im(eps) >= 0
//   * k_z = sqrt(eps k0^2 - kpar^2) on the branch Im(k_z) >= 0,
//     with Re(k_z) >= 0 when Im(k_z) = 0
//   * r_s is an E-field amplitude, r_p an H-field amplitude, so that
//     a perfect conductor gives r_s = -1, r_p = +1
//   * t = 1 + r for both polarizations in these field conventions.

namespace stratlum {

using Complex = std::complex<double>;

enum class Polarization { s, p };

enum class Side { from_above, from_below };

struct TransverseMode {
  double wavelength_nm;
  double u; // in-plane wavevector over the incidence-medium wavenumber

  void validate() const {
    if (!(wavelength_nm > 0.0)) throw InputError("wavelength must be positive");
    if (!(u >= 0.0)) throw InputError("transverse order u must be >= 0");
  }
};

struct Layer {
  OpticalMaterial material;
  double thickness_nm;
};

// Semi-infinite superstrate on top, finite layers listed top to bottom,
// semi-infinite substrate below.
class LayerStack {
public:
  LayerStack(OpticalMaterial superstrate, std::vector<Layer> layers,
             OpticalMaterial substrate)
      : superstrate_(std::move(superstrate)), layers_(std::move(layers)),
        substrate_(std::move(substrate)) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const double d = layers_[i].thickness_nm;
      if (!(d > 0.0) || !std::isfinite(d))
        throw InputError("layer " + std::to_string(i) + " ('" +
                         layers_[i].material.name() +
                         "'): thickness must be positive and finite");
    }
  }

  const OpticalMaterial& superstrate() const { return superstrate_; }
  const OpticalMaterial& substrate() const { return substrate_; }
  const std::vector<Layer>& layers() const { return layers_; }

  LayerStack with_thickness(std::size_t layer_index, double thickness_nm) const {
    if (layer_index >= layers_.size())
      throw InputError("layer index " + std::to_string(layer_index) + " out of range");
    if (!(thickness_nm > 0.0)) throw InputError("thickness must be positive");
    LayerStack copy = *this;
    copy.layers_[layer_index].thickness_nm = thickness_nm;
    return copy;
  }

  LayerStack flipped() const {
    std::vector<Layer> rev(layers_.rbegin(), layers_.rend());
    return LayerStack(substrate_, std::move(rev), superstrate_);
  }

  bool covers(double wavelength_nm) const {
    if (!superstrate_.covers(wavelength_nm) || !substrate_.covers(wavelength_nm))
      return false;
    for (const auto& l : layers_)
      if (!l.material.covers(wavelength_nm)) return false;
    return true;
  }

private:
  OpticalMaterial superstrate_;
  std::vector<Layer> layers_;
  OpticalMaterial substrate_;
};

// k_z for a medium of permittivity eps.  Branch: Im >= 0, and Re >= 0 on the
// real axis, so passive media always decay away from their sources.
inline Complex normal_wavevector(Complex eps, double kpar, double k0) {
  Complex kz = std::sqrt(eps * k0 * k0 - kpar * kpar);
  if (kz.imag() < 0.0) kz = -kz;
  if (kz.imag() == 0.0 && kz.real() < 0.0) kz = -kz;
  return kz;
}

struct FresnelAmplitudes {
  Complex r;
  Complex t;
};

// Single-interface amplitudes from medium i into medium j.
inline FresnelAmplitudes fresnel(Complex eps_i, Complex eps_j, double kpar,
                                 double k0, Polarization pol) {
  const Complex kzi = normal_wavevector(eps_i, kpar, k0);
  const Complex kzj = normal_wavevector(eps_j, kpar, k0);
  Complex num, den;
  if (pol == Polarization::s) {
    num = kzi - kzj;
    den = kzi + kzj;
  } else {
    num = eps_j * kzi - eps_i * kzj;
    den = eps_j * kzi + eps_i * kzj;
  }
  if (std::abs(den) < 1e-300)
    throw DegeneracyError("degenerate Fresnel denominator (both normal wavevectors vanish)");
  const Complex r = num / den;
  return {r, 1.0 + r};
}

// One interior slice of a media sequence.
struct MediumSlice {
  Complex eps;
  double thickness_nm;
};

namespace detail {

// Media chain for the sequence eps_in | slices... | eps_out: permittivity,
// thickness (zero for the half-spaces) and k_z per medium.  One chain serves
// both polarizations.
struct MediaChain {
  std::vector<Complex> eps;
  std::vector<double> d;
  std::vector<Complex> kz;

  std::size_t interfaces() const { return eps.size() - 1; }
};

inline MediaChain make_chain(Complex eps_in, std::span<const MediumSlice> slices,
                             Complex eps_out, double kpar, double k0) {
  MediaChain c;
  const std::size_t n = slices.size();
  c.eps.reserve(n + 2);
  c.d.reserve(n + 2);
  c.eps.push_back(eps_in);
  c.d.push_back(0.0);
  for (const auto& s : slices) {
    c.eps.push_back(s.eps);
    c.d.push_back(s.thickness_nm);
  }
  c.eps.push_back(eps_out);
  c.d.push_back(0.0);

  c.kz.reserve(n + 2);
  for (const Complex& e : c.eps) c.kz.push_back(normal_wavevector(e, kpar, k0));
  return c;
}

// Fresnel reflection at interface i of a chain (media i and i+1).
inline Complex interface_reflection(const MediaChain& c, std::size_t i,
                                    Polarization pol) {
  Complex num, den;
  if (pol == Polarization::s) {
    num = c.kz[i] - c.kz[i + 1];
    den = c.kz[i] + c.kz[i + 1];
  } else {
    num = c.eps[i + 1] * c.kz[i] - c.eps[i] * c.kz[i + 1];
    den = c.eps[i + 1] * c.kz[i] + c.eps[i] * c.kz[i + 1];
  }
  if (std::abs(den) < 1e-300)
    throw DegeneracyError("degenerate Fresnel denominator (both normal wavevectors vanish)");
  return num / den;
}

// Generalized reflection at every interface, recursing upward from the exit
// half-space:
//   R_last = r_last,
//   R_i = (r_i + R_{i+1} phi_{i+1}) / (1 + r_i R_{i+1} phi_{i+1}),
// with phi_{i+1} = exp(2 i k_z d) the round trip in the medium between the
// two interfaces.  Im(k_z) >= 0 keeps |phi| <= 1, so the recursion is stable.
inline std::vector<Complex> generalized_reflections(const MediaChain& c,
                                                    Polarization pol) {
  const std::size_t ni = c.interfaces();
  std::vector<Complex> R(ni);
  R[ni - 1] = interface_reflection(c, ni - 1, pol);
  for (std::size_t i = ni - 1; i-- > 0;) {
    const Complex r = interface_reflection(c, i, pol);
    const Complex phi = std::exp(Complex(0.0, 2.0) * c.kz[i + 1] * c.d[i + 1]);
    const Complex den = 1.0 + r * R[i + 1] * phi;
    if (std::abs(den) < 1e-14)
      throw DegeneracyError("guided-mode pole in layer recursion");
    R[i] = (r + R[i + 1] * phi) / den;
  }
  return R;
}

inline Complex chain_reflection(const MediaChain& c, Polarization pol) {
  return generalized_reflections(c, pol).front();
}

// Companion generalized transmission amplitude in the same field conventions:
//   T = prod_i t_i e^{i k_z d} / (1 + r_i R_{i+1} e^{2 i k_z d}),
// with the propagation and cavity factors taken in the medium below each
// interface and R the generalized reflection of everything beneath it.
inline Complex chain_transmission(const MediaChain& c, Polarization pol) {
  const auto genR = generalized_reflections(c, pol);
  const std::size_t ni = c.interfaces();

  Complex T = 1.0;
  for (std::size_t i = 0; i < ni; ++i) {
    const Complex r = interface_reflection(c, i, pol);
    Complex phase = 1.0;
    Complex cavity = 1.0;
    if (i + 1 < ni) {
      phase = std::exp(Complex(0.0, 1.0) * c.kz[i + 1] * c.d[i + 1]);
      cavity = 1.0 + r * genR[i + 1] * phase * phase;
      if (std::abs(cavity) < 1e-14)
        throw DegeneracyError("guided-mode pole in layer recursion");
    }
    T *= (1.0 + r) * phase / cavity;
  }
  return T;
}

} // namespace detail

// Generalized reflection seen from the incidence half-space of the sequence
// eps_in | slices... | eps_out.
inline Complex sequence_reflection(Complex eps_in, std::span<const MediumSlice> slices,
                                   Complex eps_out, double kpar, double k0,
                                   Polarization pol) {
  return detail::chain_reflection(
      detail::make_chain(eps_in, slices, eps_out, kpar, k0), pol);
}

inline Complex sequence_transmission(Complex eps_in, std::span<const MediumSlice> slices,
                                     Complex eps_out, double kpar, double k0,
                                     Polarization pol) {
  return detail::chain_transmission(
      detail::make_chain(eps_in, slices, eps_out, kpar, k0), pol);
}

namespace detail {

struct SequenceView {
  Complex eps_in;
  std::vector<MediumSlice> slices;
  Complex eps_out;
};

inline SequenceView stack_sequence(const LayerStack& stack, Side side,
                                   double wavelength_nm) {
  SequenceView v;
  v.slices.reserve(stack.layers().size());
  if (side == Side::from_above) {
    v.eps_in = stack.superstrate().permittivity(wavelength_nm);
    for (const auto& l : stack.layers())
      v.slices.push_back({l.material.permittivity(wavelength_nm), l.thickness_nm});
    v.eps_out = stack.substrate().permittivity(wavelength_nm);
  } else {
    v.eps_in = stack.substrate().permittivity(wavelength_nm);
    for (auto it = stack.layers().rbegin(); it != stack.layers().rend(); ++it)
      v.slices.push_back({it->material.permittivity(wavelength_nm), it->thickness_nm});
    v.eps_out = stack.superstrate().permittivity(wavelength_nm);
  }
  return v;
}

inline double incidence_kpar(const SequenceView& v, const TransverseMode& mode) {
  const double k0 = 2.0 * std::numbers::pi / mode.wavelength_nm;
  const double n_inc = std::sqrt(v.eps_in).real();
  return mode.u * n_inc * k0;
}

} // namespace detail

// Reflection amplitude of the whole stack seen from one half-space.
// mode.u is normalized to the incidence half-space wavenumber.
inline Complex stack_reflection(const LayerStack& stack, Side side,
                                const TransverseMode& mode, Polarization pol) {
  mode.validate();
  const auto v = detail::stack_sequence(stack, side, mode.wavelength_nm);
  const double k0 = 2.0 * std::numbers::pi / mode.wavelength_nm;
  return sequence_reflection(v.eps_in, v.slices, v.eps_out,
                             detail::incidence_kpar(v, mode), k0, pol);
}

inline Complex stack_transmission(const LayerStack& stack, Side side,
                                  const TransverseMode& mode, Polarization pol) {
  mode.validate();
  const auto v = detail::stack_sequence(stack, side, mode.wavelength_nm);
  const double k0 = 2.0 * std::numbers::pi / mode.wavelength_nm;
  return sequence_transmission(v.eps_in, v.slices, v.eps_out,
                               detail::incidence_kpar(v, mode), k0, pol);
}

// Power flux normal to the layers carried by a unit amplitude in a medium:
// Re(kz) for s amplitudes (E-field), Re(kz/eps) for p amplitudes (H-field).
inline double flux_factor(Complex eps, double kpar, double k0, Polarization pol) {
  const Complex kz = normal_wavevector(eps, kpar, k0);
  return pol == Polarization::s ? kz.real() : (kz / eps).real();
}

} // namespace stratlum
