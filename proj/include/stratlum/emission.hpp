#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "stratlum/errors.hpp"
#include "stratlum/quadrature.hpp"
#include "stratlum/stratified.hpp"

// Dipole emission inside a planar multilayer.  All powers are normalized to
// the power the same dipole would radiate in an unbounded host medium, so a
// value of 1 means "unchanged by the environment".
//
// The emission rate is an integral over the normalized in-plane wavevector
// u = k_par / k_host: u < 1 are plane waves in the host, u > 1 the
// evanescent near field, which deposits power only into absorbing layers.
// Integrands carry a 1/sqrt(1 - u^2) endpoint singularity at u = 1, removed
// by integrating over u = sin(phi) below it and u = cosh(psi) above it.

namespace stratlum {

enum class Orientation { vertical, horizontal, isotropic_average };

inline std::string to_string(Orientation o) {
  switch (o) {
    case Orientation::vertical: return "vertical";
    case Orientation::horizontal: return "horizontal";
    default: return "isotropic_average";
  }
}

inline Orientation orientation_from_string(const std::string& s) {
  if (s == "vertical") return Orientation::vertical;
  if (s == "horizontal") return Orientation::horizontal;
  if (s == "isotropic_average") return Orientation::isotropic_average;
  throw InputError("unknown dipole orientation '" + s +
                   "' (expected vertical, horizontal or isotropic_average)");
}

enum class Direction { up, down };

// Point dipole embedded in one layer of a stack.  z_up_nm / z_down_nm are
// the distances to the top and bottom boundary of the host layer and must
// sum to its thickness.
struct DipoleSource {
  double wavelength_nm = 637.0;
  std::size_t layer_index = 0;
  double z_up_nm = 0.0;
  double z_down_nm = 0.0;
  Orientation orientation = Orientation::isotropic_average;
};

struct QuadratureSettings {
  double rel_tol = 1e-9;
  double abs_tol = 1e-13;
  double u_max = 8.0; // evanescent cutoff; contributions beyond are estimated
  int max_panels = 4000;

  quad::Options quad_options() const {
    quad::Options o;
    o.rel_tol = rel_tol;
    o.abs_tol = abs_tol;
    o.max_panels = max_panels;
    return o;
  }
};

struct PowerIntegral {
  double value = 0.0;
  double error_bound = 0.0;
  double tail_estimate = 0.0;
  long evaluations = 0;
};

struct PowerSplit {
  double radiated_up = 0.0;
  double down_or_absorbed = 0.0;
};

struct FarFieldSample {
  double theta_rad = 0.0;
  double vertical = 0.0;
  double horizontal = 0.0;
  double average = 0.0;
};

// Half-space view of a stack as seen from the dipole layer: generalized
// reflection and transmission toward either boundary at normalized in-plane
// wavevector u (relative to the host wavenumber).
class StackEnvironment {
public:
  StackEnvironment(const LayerStack& stack, const DipoleSource& dipole,
                   double loss_floor = 0.0) {
    const double lambda = dipole.wavelength_nm;
    if (!(lambda > 0.0)) throw InputError("emission wavelength must be positive");
    if (loss_floor < 0.0) throw InputError("loss floor must be non-negative");
    const auto& layers = stack.layers();
    if (dipole.layer_index >= layers.size())
      throw InputError("dipole layer index " + std::to_string(dipole.layer_index) +
                       " out of range (stack has " + std::to_string(layers.size()) +
                       " layers)");
    const Layer& host = layers[dipole.layer_index];
    if (!(dipole.z_up_nm > 0.0) || !(dipole.z_down_nm > 0.0))
      throw InputError("dipole must sit strictly inside its host layer");
    const double d = host.thickness_nm;
    if (std::abs(dipole.z_up_nm + dipole.z_down_nm - d) > 1e-9 * d)
      throw InputError("dipole offsets must sum to the host layer thickness (" +
                       std::to_string(dipole.z_up_nm) + " + " +
                       std::to_string(dipole.z_down_nm) + " != " +
                       std::to_string(d) + " nm)");
    if (!host.material.lossless_at(lambda))
      throw UnsupportedError("host layer '" + host.material.name() +
                             "' absorbs at " + std::to_string(lambda) +
                             " nm; the emitter must sit in a lossless medium");

    z_up_ = dipole.z_up_nm;
    z_down_ = dipole.z_down_nm;
    k0_ = 2.0 * std::numbers::pi / lambda;
    eps_host_ = host.material.permittivity(lambda).real();
    n_host_ = std::sqrt(eps_host_);
    k1_ = n_host_ * k0_;

    auto floored = [loss_floor](Complex eps) {
      return eps.imag() < loss_floor ? Complex(eps.real(), loss_floor) : eps;
    };
    for (std::size_t j = dipole.layer_index; j-- > 0;)
      above_.push_back({floored(layers[j].material.permittivity(lambda)),
                        layers[j].thickness_nm});
    eps_sup_ = stack.superstrate().permittivity(lambda);
    for (std::size_t j = dipole.layer_index + 1; j < layers.size(); ++j)
      below_.push_back({floored(layers[j].material.permittivity(lambda)),
                        layers[j].thickness_nm});
    eps_sub_ = stack.substrate().permittivity(lambda);

    critical_us_.push_back(1.0);
    auto add = [this](Complex eps) {
      const double u = std::sqrt(eps).real() / n_host_;
      if (u > 0.0) critical_us_.push_back(u);
    };
    add(eps_sup_);
    add(eps_sub_);
    for (const auto& s : above_) add(s.eps);
    for (const auto& s : below_) add(s.eps);
    std::sort(critical_us_.begin(), critical_us_.end());
    critical_us_.erase(std::unique(critical_us_.begin(), critical_us_.end()),
                       critical_us_.end());
  }

  double k1() const { return k1_; }
  double n_host() const { return n_host_; }
  double z_up() const { return z_up_; }
  double z_down() const { return z_down_; }
  Complex eps_superstrate() const { return eps_sup_; }
  Complex eps_substrate() const { return eps_sub_; }
  double eps_host() const { return eps_host_; }

  Complex reflection_up(double u, Polarization pol) const {
    return detail::chain_reflection(chain_up(u), pol);
  }
  Complex reflection_down(double u, Polarization pol) const {
    return detail::chain_reflection(chain_down(u), pol);
  }
  Complex transmission_up(double u, Polarization pol) const {
    return detail::chain_transmission(chain_up(u), pol);
  }
  Complex transmission_down(double u, Polarization pol) const {
    return detail::chain_transmission(chain_down(u), pol);
  }

  // u values where an integrand can have a kink (light line of some medium)
  const std::vector<double>& critical_us() const { return critical_us_; }

private:
  detail::MediaChain chain_up(double u) const {
    return detail::make_chain(eps_host_, above_, eps_sup_, u * k1_, k0_);
  }
  detail::MediaChain chain_down(double u) const {
    return detail::make_chain(eps_host_, below_, eps_sub_, u * k1_, k0_);
  }

  double z_up_ = 0.0, z_down_ = 0.0;
  double k0_ = 0.0, k1_ = 0.0, n_host_ = 0.0, eps_host_ = 1.0;
  Complex eps_sup_, eps_sub_;
  std::vector<MediumSlice> above_, below_;
  std::vector<double> critical_us_;
};

namespace detail {

struct CavityFields {
  Complex rs_up, rs_dn, rp_up, rp_dn;
  Complex a_up, a_dn; // round-trip phases exp(2 i k1 l z) to each boundary
  Complex Ds, Dp;     // multiple-reflection denominators
};

template <class Env>
CavityFields cavity_fields(const Env& env, double u, Complex l) {
  CavityFields f;
  f.rs_up = env.reflection_up(u, Polarization::s);
  f.rp_up = env.reflection_up(u, Polarization::p);
  f.rs_dn = env.reflection_down(u, Polarization::s);
  f.rp_dn = env.reflection_down(u, Polarization::p);
  const Complex phase = Complex(0.0, 2.0) * env.k1() * l;
  f.a_up = std::exp(phase * env.z_up());
  f.a_dn = std::exp(phase * env.z_down());
  f.Ds = 1.0 - f.rs_up * f.rs_dn * f.a_up * f.a_dn;
  f.Dp = 1.0 - f.rp_up * f.rp_dn * f.a_up * f.a_dn;
  if (std::abs(f.Ds) < 1e-14 || std::abs(f.Dp) < 1e-14) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "guided mode degenerates the cavity denominator at u = %.12g", u);
    throw DegeneracyError(buf);
  }
  return f;
}

// Normalized emission density dF/du.  l = sqrt(1 - u^2) is passed in by the
// caller so substituted integrators can supply it without cancellation.
template <class Env>
double spectral_density_at(const Env& env, double u, Complex l, Orientation o) {
  const CavityFields f = cavity_fields<Env>(env, u, l);
  double vert = 0.0, hor = 0.0;
  if (o != Orientation::horizontal) {
    const Complex num = (1.0 + f.rp_up * f.a_up) * (1.0 + f.rp_dn * f.a_dn);
    vert = 1.5 * (u * u * u / l * num / f.Dp).real();
  }
  if (o != Orientation::vertical) {
    const Complex s_term = (1.0 + f.rs_up * f.a_up) * (1.0 + f.rs_dn * f.a_dn) / f.Ds;
    const Complex p_term = (1.0 - f.rp_up * f.a_up) * (1.0 - f.rp_dn * f.a_dn) / f.Dp;
    hor = 0.75 * (u / l * (s_term + l * l * p_term)).real();
  }
  switch (o) {
    case Orientation::vertical: return vert;
    case Orientation::horizontal: return hor;
    default: return (vert + 2.0 * hor) / 3.0;
  }
}

inline Complex branch_l(double u) {
  return u <= 1.0 ? Complex(std::sqrt(1.0 - u * u), 0.0)
                  : Complex(0.0, std::sqrt(u * u - 1.0));
}

} // namespace detail

// dF/du at a single u (diverges like 1/sqrt(1-u^2) toward u = 1).
template <class Env>
double spectral_density(const Env& env, double u, Orientation o) {
  if (!(u >= 0.0)) throw InputError("spectral density requires u >= 0");
  return detail::spectral_density_at(env, u, detail::branch_l(u), o);
}

// Total emitted power (Purcell factor) relative to the unbounded host:
// propagating and evanescent parts integrated separately in singularity-free
// variables, plus an estimate of the tail beyond u_max.
template <class Env>
PowerIntegral total_power(const Env& env, Orientation o,
                          const QuadratureSettings& qs = {}) {
  const double half_pi = std::numbers::pi / 2.0;
  const auto opts = qs.quad_options();

  std::vector<double> phi_interior, psi_interior;
  for (double uc : env.critical_us()) {
    if (uc > 0.0 && uc < 1.0) phi_interior.push_back(std::asin(uc));
    if (uc > 1.0 && uc < qs.u_max) psi_interior.push_back(std::acosh(uc));
  }
  const auto phi_breaks = quad::make_breakpoints(0.0, half_pi, phi_interior);
  const auto psi_breaks =
      quad::make_breakpoints(0.0, std::acosh(qs.u_max), psi_interior);

  const auto prop = quad::integrate_segments(
      [&](double phi) {
        const double u = std::sin(phi);
        const double c = std::cos(phi);
        return detail::spectral_density_at(env, u, Complex(c, 0.0), o) * c;
      },
      phi_breaks, opts);

  const auto evan = quad::integrate_segments(
      [&](double psi) {
        const double u = std::cosh(psi);
        const double sh = std::sinh(psi);
        return detail::spectral_density_at(env, u, Complex(0.0, sh), o) * sh;
      },
      psi_breaks, opts);

  PowerIntegral out;
  out.value = prop.value + evan.value;
  out.error_bound = prop.error_bound + evan.error_bound;
  out.evaluations = prop.evaluations + evan.evaluations;
  const double zmin = std::min(env.z_up(), env.z_down());
  const double decay = 2.0 * env.k1() * zmin;
  out.tail_estimate =
      std::abs(spectral_density(env, qs.u_max, o)) / std::max(decay, 1e-30);
  return out;
}

namespace detail {

// Radiated power per solid angle at polar angle theta in the exit half-space
// (normalized like everything else to the unbounded-host total).  Requires a
// transparent exit medium.  Returned per orientation, in the order
// {vertical, horizontal, average}.
template <class Env>
std::array<double, 3> radiated_density(const Env& env, Direction dir,
                                       double theta) {
  const Complex eps_exit = dir == Direction::up ? env.eps_superstrate()
                                                : env.eps_substrate();
  const double ns = std::sqrt(eps_exit).real();
  const double n1 = env.n_host();
  const double ratio = ns / n1;
  const double s = std::sin(theta), c = std::cos(theta);
  const double u = ratio * s;

  // 1 - u^2 without cancellation when the exit medium matches the host
  const double one_minus_u2 = (1.0 - ratio * ratio) + ratio * ratio * c * c;
  const Complex l1 = std::sqrt(Complex(one_minus_u2, 0.0));
  const double abs_l1_sq = std::abs(one_minus_u2);

  const CavityFields f = cavity_fields(env, u, l1);
  const double z_exit = dir == Direction::up ? env.z_up() : env.z_down();
  const Complex a_opp = dir == Direction::up ? f.a_dn : f.a_up;
  const Complex rs_opp = dir == Direction::up ? f.rs_dn : f.rs_up;
  const Complex rp_opp = dir == Direction::up ? f.rp_dn : f.rp_up;
  const Complex ts = dir == Direction::up ? env.transmission_up(u, Polarization::s)
                                          : env.transmission_down(u, Polarization::s);
  const Complex tp = dir == Direction::up ? env.transmission_up(u, Polarization::p)
                                          : env.transmission_down(u, Polarization::p);

  const Complex reach = std::exp(Complex(0.0, 1.0) * env.k1() * l1 * z_exit);
  const Complex s_par = reach * (1.0 + rs_opp * a_opp) / f.Ds;
  const Complex p_par = reach * (1.0 - rp_opp * a_opp) / f.Dp;
  const Complex p_perp = reach * (1.0 + rp_opp * a_opp) / f.Dp;

  const double eps_ratio = env.eps_host() / eps_exit.real();
  const double inv_pi = 1.0 / std::numbers::pi;
  const double cc = c * c;

  const double ratio3 = ratio * ratio * ratio;
  const double vert = 0.375 * inv_pi * eps_ratio * ratio3 * cc *
                      (u * u / std::max(abs_l1_sq, 1e-300)) *
                      std::norm(tp * p_perp);
  const double hor = 0.1875 * inv_pi * ratio3 * cc *
                     (std::norm(ts * s_par) / std::max(abs_l1_sq, 1e-300) +
                      eps_ratio * std::norm(tp * p_par));
  return {vert, hor, (vert + 2.0 * hor) / 3.0};
}

template <class Env>
void require_transparent_exit(const Env& env, Direction dir) {
  const Complex eps = dir == Direction::up ? env.eps_superstrate()
                                           : env.eps_substrate();
  if (std::abs(eps.imag()) > 0.0 || eps.real() <= 0.0)
    throw UnsupportedError(
        std::string("far field undefined: the ") +
        (dir == Direction::up ? "superstrate" : "substrate") +
        " absorbs at the emission wavelength");
}

template <class Env>
std::vector<double> theta_breakpoints(const Env& env, double ratio,
                                      double theta_lo, double theta_hi) {
  std::vector<double> interior;
  for (double uc : env.critical_us()) {
    const double s = uc / ratio;
    if (s > 0.0 && s < 1.0) interior.push_back(std::asin(s));
  }
  return quad::make_breakpoints(theta_lo, theta_hi, interior);
}

inline std::size_t orientation_slot(Orientation o) {
  switch (o) {
    case Orientation::vertical: return 0;
    case Orientation::horizontal: return 1;
    default: return 2;
  }
}

} // namespace detail

// Far-field power per solid angle at theta in the exit half-space.
template <class Env>
double radiated_density(const Env& env, Direction dir, double theta,
                        Orientation o) {
  detail::require_transparent_exit(env, dir);
  if (!(theta >= 0.0) || theta > std::numbers::pi / 2.0 + 1e-12)
    throw InputError("polar angle must lie in [0, pi/2]");
  return detail::radiated_density(env, dir, theta)[detail::orientation_slot(o)];
}

// Power radiated into the cone [0, theta_max] of the exit half-space.
template <class Env>
PowerIntegral radiated_power_cone(const Env& env, Direction dir, double theta_max,
                                  Orientation o, const QuadratureSettings& qs = {}) {
  detail::require_transparent_exit(env, dir);
  const Complex eps_exit = dir == Direction::up ? env.eps_superstrate()
                                                : env.eps_substrate();
  const double ratio = std::sqrt(eps_exit).real() / env.n_host();
  const auto slot = detail::orientation_slot(o);
  const auto breaks = detail::theta_breakpoints(env, ratio, 0.0, theta_max);
  const auto r = quad::integrate_segments(
      [&](double theta) {
        return detail::radiated_density(env, dir, theta)[slot] * 2.0 *
               std::numbers::pi * std::sin(theta);
      },
      breaks, qs.quad_options());
  PowerIntegral out;
  out.value = r.value;
  out.error_bound = r.error_bound;
  out.evaluations = r.evaluations;
  return out;
}

// Power radiated into the full exit hemisphere.
template <class Env>
PowerIntegral radiated_power(const Env& env, Direction dir, Orientation o,
                             const QuadratureSettings& qs = {}) {
  return radiated_power_cone(env, dir, std::numbers::pi / 2.0, o, qs);
}

// Power radiated into the acceptance cone of an objective of the given
// numerical aperture looking down from the superstrate.
template <class Env>
PowerIntegral collected_power(const Env& env, double na, Orientation o,
                              const QuadratureSettings& qs = {}) {
  detail::require_transparent_exit(env, Direction::up);
  const double ns = std::sqrt(env.eps_superstrate()).real();
  if (!(na > 0.0) || na > 1.0)
    throw InputError("numerical aperture must lie in (0, 1]");
  if (na > ns + 1e-12)
    throw InputError("numerical aperture exceeds the superstrate index");
  const double theta_max = std::asin(std::min(na / ns, 1.0));
  return radiated_power_cone(env, Direction::up, theta_max, o, qs);
}

// Fraction of the total emission collected by that objective.
template <class Env>
double collection_efficiency(const Env& env, double na, Orientation o,
                             const QuadratureSettings& qs = {}) {
  const double collected = collected_power(env, na, o, qs).value;
  const double total = total_power(env, o, qs).value;
  return collected / total;
}

// ---- stack-level interface ----

inline PowerIntegral total_power(const LayerStack& stack, const DipoleSource& dip,
                                 const QuadratureSettings& qs = {}) {
  return total_power(StackEnvironment(stack, dip), dip.orientation, qs);
}

inline double spectral_density(const LayerStack& stack, const DipoleSource& dip,
                               double u) {
  return spectral_density(StackEnvironment(stack, dip), u, dip.orientation);
}

inline PowerSplit power_split(const LayerStack& stack, const DipoleSource& dip,
                              const QuadratureSettings& qs = {}) {
  const StackEnvironment env(stack, dip);
  const double total = total_power(env, dip.orientation, qs).value;
  const double up = radiated_power(env, Direction::up, dip.orientation, qs).value;
  return {up, total - up};
}

template <typename Env>
std::vector<FarFieldSample> far_field(const Env& env, Direction dir,
                                      const std::vector<double>& thetas) {
  detail::require_transparent_exit(env, dir);
  std::vector<FarFieldSample> out;
  out.reserve(thetas.size());
  for (double th : thetas) {
    if (!(th >= 0.0) || th > std::numbers::pi / 2.0 + 1e-12)
      throw InputError("far-field angles must lie in [0, pi/2]");
    const auto d = detail::radiated_density(env, dir, th);
    out.push_back({th, d[0], d[1], d[2]});
  }
  return out;
}

inline std::vector<FarFieldSample> far_field(const LayerStack& stack,
                                             const DipoleSource& dip,
                                             const std::vector<double>& thetas) {
  return far_field(StackEnvironment(stack, dip), Direction::up, thetas);
}

inline double collection_efficiency(const LayerStack& stack, const DipoleSource& dip,
                                    double na, const QuadratureSettings& qs = {}) {
  return collection_efficiency(StackEnvironment(stack, dip), na, dip.orientation, qs);
}

} // namespace stratlum
