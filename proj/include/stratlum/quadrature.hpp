#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stratlum/errors.hpp"

// Adaptive Gauss-Kronrod (G7/K15) quadrature.  Panels are bisected worst
// error first; the final sum is accumulated in ascending interval order so
// results do not depend on refinement history.

namespace stratlum::quad {

struct Options {
  double rel_tol = 1e-9;
  double abs_tol = 1e-13;
  int max_panels = 4000;
  bool throw_on_failure = true;
};

struct Result {
  double value = 0.0;
  double error_bound = 0.0;
  long evaluations = 0;
  bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule, abscissae >= 0.
// wg == 0 marks Kronrod-only points.
inline constexpr double gk_x[8] = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};
inline constexpr double gk_wk[8] = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};
inline constexpr double gk_wg[8] = {
    4.179591836734693877551020408163265e-01,
    0.0,
    3.818300505051189449503697754889751e-01,
    0.0,
    2.797053914892766679014677714237796e-01,
    0.0,
    1.294849661688696932706114326790820e-01,
    0.0};

struct Panel {
  double a, b;
  double value;
  double error;
};

template <class F>
Panel evaluate_panel(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double f0 = f(c);
  double k15 = gk_wk[0] * f0;
  double g7 = gk_wg[0] * f0;
  for (int i = 1; i < 8; ++i) {
    const double dx = h * gk_x[i];
    const double fi = f(c + dx) + f(c - dx);
    k15 += gk_wk[i] * fi;
    g7 += gk_wg[i] * fi;
  }
  return Panel{a, b, k15 * h, std::abs((k15 - g7) * h)};
}

} // namespace detail

// Integrate f over [a, b].
template <class F>
Result integrate(F&& f, double a, double b, const Options& opts = {}) {
  Result res;
  if (a == b) {
    res.converged = true;
    return res;
  }

  std::vector<detail::Panel> panels;
  panels.push_back(detail::evaluate_panel(f, a, b));
  res.evaluations = 15;

  auto total = [&panels] {
    double v = 0.0, e = 0.0;
    for (const auto& p : panels) {
      v += p.value;
      e += p.error;
    }
    return std::pair{v, e};
  };

  while (true) {
    auto [value, error] = total();
    const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(value));
    if (error <= target) {
      res.value = 0.0;
      res.error_bound = 0.0;
      std::sort(panels.begin(), panels.end(),
                [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
      for (const auto& p : panels) {
        res.value += p.value;
        res.error_bound += p.error;
      }
      res.converged = true;
      return res;
    }
    if (static_cast<int>(panels.size()) >= opts.max_panels) {
      res.value = value;
      res.error_bound = error;
      res.converged = false;
      if (opts.throw_on_failure)
        throw QuadratureError("adaptive quadrature did not converge: estimate " +
                                  std::to_string(value) + ", error bound " +
                                  std::to_string(error),
                              value, error);
      return res;
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i)
      if (panels[i].error > panels[worst].error) worst = i;
    const detail::Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    panels[worst] = detail::evaluate_panel(f, p.a, mid);
    panels.push_back(detail::evaluate_panel(f, mid, p.b));
    res.evaluations += 30;
  }
}

// Integrate over consecutive segments defined by an ascending breakpoint list.
// Each segment gets its own adaptive budget; errors and values add.
template <class F>
Result integrate_segments(F&& f, const std::vector<double>& breaks,
                          const Options& opts = {}) {
  Result res;
  res.converged = true;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    Result part = integrate(f, breaks[i], breaks[i + 1], opts);
    res.value += part.value;
    res.error_bound += part.error_bound;
    res.evaluations += part.evaluations;
    res.converged = res.converged && part.converged;
  }
  return res;
}

// Deduplicates, sorts and clips interior breakpoints into [a, b].
inline std::vector<double> make_breakpoints(double a, double b,
                                            std::vector<double> interior) {
  std::vector<double> out{a};
  std::sort(interior.begin(), interior.end());
  for (double x : interior)
    if (x > a && x < b && std::abs(x - out.back()) > 1e-12) out.push_back(x);
  out.push_back(b);
  return out;
}

} // namespace stratlum::quad
