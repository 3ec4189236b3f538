#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "stratlum/errors.hpp"

namespace stratlum::fitting {

struct FitOptions {
  int max_iterations = 200;
  double rel_step_tol = 1e-10;
  double grad_tol = 1e-12;
  double lambda_init = 1e-3;
};

struct FitResult {
  std::vector<double> params;
  std::vector<double> sigma;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Dense Cholesky solve of (A)x = b for small symmetric matrices; returns
// false when A is not positive definite.
inline bool cholesky_solve(std::vector<double> a, std::vector<double> b,
                           std::size_t n, std::vector<double>& x) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * x[k];
    x[i] = s / a[i * n + i];
  }
  return true;
}

// Inverse of a symmetric positive definite matrix via Cholesky; returns false
// when the matrix is numerically singular.
inline bool spd_inverse(const std::vector<double>& a, std::size_t n,
                        std::vector<double>& inv) {
  inv.assign(n * n, 0.0);
  std::vector<double> col(n), x;
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    if (!cholesky_solve(a, col, n, x)) return false;
    for (std::size_t i = 0; i < n; ++i) inv[i * n + j] = x[i];
  }
  return true;
}

} // namespace detail

// Damped least squares on weighted residuals.  The callback fills the
// residual vector r (length n_residuals) and the row-major Jacobian
// dr_i/dp_j for the given parameter vector.  Throws FitError with an
// iteration trace when no acceptable step can be found.
template <class Eval>
FitResult levenberg_marquardt(std::size_t n_residuals, std::vector<double> p,
                              Eval&& eval, const FitOptions& opt = {}) {
  const std::size_t np = p.size();
  if (n_residuals < np)
    throw FitError("fit has fewer residuals (" + std::to_string(n_residuals) +
                   ") than parameters (" + std::to_string(np) + ")");
  std::vector<double> r(n_residuals), jac(n_residuals * np);
  std::vector<double> a(np * np), g(np), step, trial(np), rt(n_residuals),
      jt(n_residuals * np);

  auto chi2_of = [&](const std::vector<double>& rr) {
    double s = 0.0;
    for (double v : rr) s += v * v;
    return s;
  };

  eval(p, r, jac);
  double chi2 = chi2_of(r);
  double lambda = opt.lambda_init;
  std::string trace;
  char line[128];

  // Damping scales are the largest diagonal each column has shown so far;
  // a direction that degenerates mid-run (a parameter pushed onto a flat
  // ridge where its Jacobian column underflows) stays regularized, so the
  // step along it shrinks with lambda instead of blowing up.
  std::vector<double> dscale(np, 0.0);

  FitResult out;
  for (out.iterations = 1; out.iterations <= opt.max_iterations;
       ++out.iterations) {
    for (std::size_t i = 0; i < np; ++i) {
      g[i] = 0.0;
      for (std::size_t j = i; j < np; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n_residuals; ++k)
          s += jac[k * np + i] * jac[k * np + j];
        a[i * np + j] = a[j * np + i] = s;
      }
      for (std::size_t k = 0; k < n_residuals; ++k)
        g[i] += jac[k * np + i] * r[k];
      dscale[i] = std::max(dscale[i], a[i * np + i]);
    }

    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax < opt.grad_tol) {
      out.converged = true;
      break;
    }

    bool stepped = false;
    while (lambda < 1e14) {
      std::vector<double> damped = a;
      for (std::size_t i = 0; i < np; ++i) {
        const double d = a[i * np + i];
        damped[i * np + i] = d + lambda * (d > 0.0 ? d : 1.0);
      }
      std::vector<double> negg(np);
      for (std::size_t i = 0; i < np; ++i) negg[i] = -g[i];
      if (!detail::cholesky_solve(damped, negg, np, step)) {
        lambda *= 10.0;
        continue;
      }
      for (std::size_t i = 0; i < np; ++i) trial[i] = p[i] + step[i];
      eval(trial, rt, jt);
      const double chi2_trial = chi2_of(rt);
      std::snprintf(line, sizeof line, "iter %d: chi2 %.6e -> %.6e lambda %.1e\n",
                    out.iterations, chi2, chi2_trial, lambda);
      trace += line;
      if (chi2_trial <= chi2) {
        double pnorm = 0.0, snorm = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
          pnorm += p[i] * p[i];
          snorm += step[i] * step[i];
        }
        p = trial;
        r = rt;
        jac = jt;
        const bool small_step =
            std::sqrt(snorm) < opt.rel_step_tol * (std::sqrt(pnorm) + 1.0);
        const bool small_gain = chi2 - chi2_trial <= 1e-16 * (chi2 + 1e-300);
        chi2 = chi2_trial;
        lambda = std::max(lambda * 0.1, 1e-12);
        stepped = true;
        if (small_step || small_gain) out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (out.converged) break;
    if (!stepped)
      throw FitError("fit did not converge: no acceptable step at iteration " +
                         std::to_string(out.iterations),
                     trace);
  }
  if (!out.converged)
    throw FitError("fit did not converge within " +
                       std::to_string(opt.max_iterations) + " iterations",
                   trace);

  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = i; j < np; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n_residuals; ++k)
        s += jac[k * np + i] * jac[k * np + j];
      a[i * np + j] = a[j * np + i] = s;
    }
  out.params = p;
  out.residual_norm = std::sqrt(chi2);
  out.sigma.assign(np, std::numeric_limits<double>::infinity());
  std::vector<double> cov;
  if (detail::spd_inverse(a, np, cov)) {
    const double dof = double(n_residuals) - double(np);
    const double scale = dof > 0.0 ? std::max(chi2 / dof, 1.0) : 1.0;
    for (std::size_t i = 0; i < np; ++i)
      out.sigma[i] = std::sqrt(std::max(cov[i * np + i], 0.0) * scale);
  }
  return out;
}

} // namespace stratlum::fitting
