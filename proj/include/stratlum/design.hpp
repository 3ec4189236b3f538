#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "stratlum/emission.hpp"
#include "stratlum/errors.hpp"
#include "stratlum/stratified.hpp"

namespace stratlum {

// Scalar figure of merit evaluated at each sweep point.
enum class SweepMetric { power_up, power_na, eta_na, purcell_total };

inline std::string to_string(SweepMetric m) {
  switch (m) {
    case SweepMetric::power_up: return "power_up";
    case SweepMetric::power_na: return "power_na";
    case SweepMetric::eta_na: return "eta_na";
    case SweepMetric::purcell_total: return "purcell_total";
  }
  return "?";
}

inline SweepMetric metric_from_string(const std::string& s) {
  if (s == "power_up") return SweepMetric::power_up;
  if (s == "power_na") return SweepMetric::power_na;
  if (s == "eta_na") return SweepMetric::eta_na;
  if (s == "purcell_total") return SweepMetric::purcell_total;
  throw InputError("unknown sweep metric '" + s +
                   "' (expected power_up, power_na, eta_na or purcell_total)");
}

// One thickness sweep: vary one layer of the base stack over a grid and
// evaluate the chosen metric for a fixed dipole.
struct SweepSpec {
  LayerStack base_stack;
  std::size_t swept_layer = 0;
  double start_nm = 10.0;
  double stop_nm = 400.0;
  double step_nm = 5.0;
  SweepMetric metric = SweepMetric::power_na;
  double na = 0.7;
  DipoleSource dipole;
  double loss_floor = 0.0;
  QuadratureSettings quadrature;
  std::string label;
};

struct SweepCurve {
  std::vector<double> abscissa;
  std::vector<double> values;
  std::string abscissa_name;
  std::string metric_name;
  std::string label;
  double wavelength_nm = 0.0;
  double na = 0.0;
};

struct Peak {
  double position_nm = 0.0;
  double value = 0.0;
  int order = 0;
};

struct PeakReport {
  std::vector<Peak> peaks;
  double enhancement_vs_reference = 0.0;
};

// Evaluate one metric for one stack/dipole configuration.
inline double metric_value(const LayerStack& stack, const DipoleSource& dipole,
                           SweepMetric metric, double na, double loss_floor,
                           const QuadratureSettings& qs) {
  const StackEnvironment env(stack, dipole, loss_floor);
  switch (metric) {
    case SweepMetric::power_up:
      return radiated_power(env, Direction::up, dipole.orientation, qs).value;
    case SweepMetric::power_na:
      return collected_power(env, na, dipole.orientation, qs).value;
    case SweepMetric::eta_na:
      return collection_efficiency(env, na, dipole.orientation, qs);
    case SweepMetric::purcell_total:
      return total_power(env, dipole.orientation, qs).value;
  }
  throw InputError("unknown sweep metric");
}

namespace detail {

inline std::vector<double> sweep_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw InputError("sweep step must be positive");
  if (!(stop >= start)) throw InputError("sweep stop must not precede start");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  grid.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(start + double(i) * step);
  return grid;
}

// Evaluate point_fn over the grid, optionally on several threads.  Values are
// stored by index, so the result does not depend on scheduling.
template <class Fn>
std::vector<double> map_grid(const std::vector<double>& grid, unsigned threads,
                             Fn&& point_fn) {
  std::vector<double> values(grid.size());
  if (threads <= 1 || grid.size() < 2) {
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = point_fn(grid[i]);
    return values;
  }
  threads = std::min<unsigned>(threads, unsigned(grid.size()));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < grid.size(); i += threads)
          values[i] = point_fn(grid[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return values;
}

} // namespace detail

// Metric versus the thickness of one layer of the stack.
inline SweepCurve thickness_sweep(const SweepSpec& spec, unsigned threads = 1) {
  if (spec.swept_layer >= spec.base_stack.layers().size())
    throw InputError("swept layer index " + std::to_string(spec.swept_layer) +
                     " out of range (stack has " +
                     std::to_string(spec.base_stack.layers().size()) + " layers)");
  SweepCurve curve;
  curve.abscissa = detail::sweep_grid(spec.start_nm, spec.stop_nm, spec.step_nm);
  curve.abscissa_name = "thickness_nm";
  curve.metric_name = to_string(spec.metric);
  curve.label = spec.label;
  curve.wavelength_nm = spec.dipole.wavelength_nm;
  curve.na = spec.na;
  curve.values = detail::map_grid(curve.abscissa, threads, [&](double t) {
    try {
      return metric_value(spec.base_stack.with_thickness(spec.swept_layer, t),
                          spec.dipole, spec.metric, spec.na, spec.loss_floor,
                          spec.quadrature);
    } catch (const Error& e) {
      throw SolverError(std::string(e.what()) + " (swept thickness " +
                        std::to_string(t) + " nm)");
    }
  });
  return curve;
}

// Metric versus vacuum wavelength at fixed geometry.
inline SweepCurve wavelength_sweep(const LayerStack& stack, const DipoleSource& dipole,
                                   double start_nm, double stop_nm, double step_nm,
                                   SweepMetric metric, double na = 0.7,
                                   double loss_floor = 0.0,
                                   const QuadratureSettings& qs = {},
                                   const std::string& label = {},
                                   unsigned threads = 1) {
  SweepCurve curve;
  curve.abscissa = detail::sweep_grid(start_nm, stop_nm, step_nm);
  curve.abscissa_name = "wavelength_nm";
  curve.metric_name = to_string(metric);
  curve.label = label;
  curve.wavelength_nm = 0.0;
  curve.na = na;
  curve.values = detail::map_grid(curve.abscissa, threads, [&](double lambda) {
    DipoleSource d = dipole;
    d.wavelength_nm = lambda;
    try {
      return metric_value(stack, d, metric, na, loss_floor, qs);
    } catch (const Error& e) {
      throw SolverError(std::string(e.what()) + " (swept wavelength " +
                        std::to_string(lambda) + " nm)");
    }
  });
  return curve;
}

// Interior local maxima with at least the requested topographic prominence,
// refined by a parabola through the three nearest samples and labeled by
// ascending position.  min_prominence < 0 selects the default, 2% of the
// curve maximum.  The three-point refinement is exact for a parabolic peak;
// for a smooth peak with curvature f'' and third derivative bounded by M3
// near the maximum, the position error is at most M3 step^2 / (6 |f''|).
inline PeakReport find_peaks(const SweepCurve& curve, double min_prominence = -1.0) {
  const auto& v = curve.values;
  const auto& x = curve.abscissa;
  if (v.size() < 5) throw InputError("peak finding needs at least 5 samples");
  if (min_prominence < 0.0)
    min_prominence = 0.02 * *std::max_element(v.begin(), v.end());

  PeakReport report;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
    double floor_left = v[i], floor_right = v[i];
    for (std::size_t j = i; j-- > 0;) {
      floor_left = std::min(floor_left, v[j]);
      if (v[j] > v[i]) break;
    }
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      floor_right = std::min(floor_right, v[j]);
      if (v[j] > v[i]) break;
    }
    const double prominence = v[i] - std::max(floor_left, floor_right);
    if (prominence < min_prominence) continue;

    Peak peak;
    const double d1 = v[i + 1] - v[i - 1];
    const double d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
    if (d2 < 0.0) {
      const double shift = -0.5 * d1 / d2;
      peak.position_nm = x[i] + shift * (x[i + 1] - x[i]);
      peak.value = v[i] - d1 * d1 / (8.0 * d2);
    } else {
      peak.position_nm = x[i];
      peak.value = v[i];
    }
    peak.order = int(report.peaks.size()) + 1;
    report.peaks.push_back(peak);
  }
  return report;
}

// Ratio of the curve's maximum to the reference value at the same abscissa.
inline double enhancement(const SweepCurve& curve, const SweepCurve& reference) {
  if (curve.values.empty() || reference.values.empty())
    throw InputError("enhancement needs non-empty curves");
  if (curve.metric_name != reference.metric_name)
    throw InputError("enhancement reference uses metric '" +
                     reference.metric_name + "' but the curve uses '" +
                     curve.metric_name + "'");
  const auto it = std::max_element(curve.values.begin(), curve.values.end());
  const double at = curve.abscissa[std::size_t(it - curve.values.begin())];
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < reference.abscissa.size(); ++i)
    if (std::abs(reference.abscissa[i] - at) <
        std::abs(reference.abscissa[nearest] - at))
      nearest = i;
  const double ref = reference.values[nearest];
  if (!(ref > 0.0))
    throw InputError("enhancement reference is not positive at the peak");
  return *it / ref;
}

} // namespace stratlum
