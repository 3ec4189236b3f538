#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stratlum/errors.hpp"
#include "stratlum/levmar.hpp"

namespace stratlum {

// ---- saturation curve ----

// I(P) = R*P/(P_sat + P) + n*P + m.
struct SaturationParams {
  double rate_sat_cps = 0.0;
  double p_sat_mw = 1.0;
  double background_slope_cps_per_mw = 0.0;
  double dark_counts_cps = 0.0;
};

inline double eval_saturation(const SaturationParams& p, double power_mw) {
  if (power_mw < 0.0) throw InputError("excitation power must be non-negative");
  return p.rate_sat_cps * power_mw / (p.p_sat_mw + power_mw) +
         p.background_slope_cps_per_mw * power_mw + p.dark_counts_cps;
}

struct SaturationFit {
  SaturationParams params;
  SaturationParams sigma;
  double residual_norm = 0.0;
  int iterations = 0;
};

inline SaturationFit fit_saturation(
    const std::vector<std::pair<double, double>>& points,
    const fitting::FitOptions& options = {}) {
  if (points.size() < 6)
    throw InputError("saturation fit needs at least 6 points");
  double pmin = points[0].first, pmax = points[0].first;
  double imin = points[0].second, imax = points[0].second;
  for (const auto& [pw, cts] : points) {
    if (pw < 0.0) throw InputError("excitation power must be non-negative");
    pmin = std::min(pmin, pw);
    pmax = std::max(pmax, pw);
    imin = std::min(imin, cts);
    imax = std::max(imax, cts);
  }
  if (pmax - pmin < 1e-12 * std::max(pmax, 1.0))
    throw FitError("rank-deficient saturation data: all powers are equal");

  // Internal: log R, log P_sat, linear n, linear m.  The background terms
  // stay linear because clean data drives them against zero, where a log
  // parameter would run off to -inf and leave every uncertainty undefined;
  // small negative excursions are clipped on output.
  const double r0 = std::max(imax - imin, 1e-6 * std::max(imax, 1.0));
  std::vector<double> p0{std::log(r0),
                         std::log(std::max(0.5 * (pmin + pmax), 1e-6)), 0.0,
                         std::max(imin, 0.0)};
  // Count data gets Poisson weights, otherwise the bright saturated tail
  // drowns the knee that localizes P_sat.
  std::vector<double> weights(points.size());
  for (std::size_t k = 0; k < points.size(); ++k)
    weights[k] = 1.0 / std::sqrt(std::max(points[k].second, 1.0));
  auto eval = [&](const std::vector<double>& q, std::vector<double>& r,
                  std::vector<double>& jac) {
    const double R = std::exp(q[0]), Ps = std::exp(q[1]), n = q[2], m = q[3];
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double P = points[k].first;
      const double den = Ps + P;
      const double w = weights[k];
      r[k] = (R * P / den + n * P + m - points[k].second) * w;
      jac[k * 4 + 0] = (P / den) * R * w;
      jac[k * 4 + 1] = -(R * P / (den * den)) * Ps * w;
      jac[k * 4 + 2] = P * w;
      jac[k * 4 + 3] = w;
    }
  };
  const auto res = fitting::levenberg_marquardt(points.size(), p0, eval, options);

  SaturationFit out;
  out.params = {std::exp(res.params[0]), std::exp(res.params[1]),
                std::max(res.params[2], 0.0), std::max(res.params[3], 0.0)};
  out.sigma = {out.params.rate_sat_cps * res.sigma[0],
               out.params.p_sat_mw * res.sigma[1], res.sigma[2], res.sigma[3]};
  out.residual_norm = res.residual_norm;
  out.iterations = res.iterations;
  return out;
}

// ---- Lorentzian line ----

struct SpectrumFit {
  double center = 0.0;
  double fwhm_ghz = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double sigma_center = 0.0;
  double sigma_fwhm_ghz = 0.0;
  double sigma_amplitude = 0.0;
  double sigma_baseline = 0.0;
  double residual_norm = 0.0;
  double resolution_floor_ghz = 30.0;
  bool resolution_limited = false;
  bool no_peak = false;
};

inline double eval_lorentzian(double amplitude, double fwhm, double center,
                              double baseline, double x) {
  const double h = 0.5 * fwhm;
  const double dx = x - center;
  return amplitude * h * h / (dx * dx + h * h) + baseline;
}

inline SpectrumFit fit_lorentzian(
    const std::vector<std::pair<double, double>>& spectrum,
    double resolution_floor_ghz = 30.0,
    const fitting::FitOptions& options = {}) {
  if (spectrum.size() < 7)
    throw InputError("Lorentzian fit needs at least 7 points");
  double xmin = spectrum[0].first, xmax = spectrum[0].first;
  double ymin = spectrum[0].second, ymax = spectrum[0].second;
  double xpk = spectrum[0].first;
  for (const auto& [x, y] : spectrum) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    if (y > ymax) {
      ymax = y;
      xpk = x;
    }
  }
  if (xmax - xmin < 1e-12)
    throw FitError("rank-deficient spectrum: all abscissae are equal");

  const double a0 = std::max(ymax - ymin, 1e-9 * std::max(std::abs(ymax), 1.0));
  // Internal: log A, log Gamma, x0, linear b.  The baseline stays linear so
  // a background-free line (b at the zero boundary) keeps finite
  // uncertainties; negative excursions are clipped on output.
  std::vector<double> p0{std::log(a0), std::log(0.2 * (xmax - xmin)), xpk,
                         std::max(ymin, 0.0)};
  std::vector<double> weights(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k)
    weights[k] = 1.0 / std::sqrt(std::max(spectrum[k].second, 1.0));
  auto eval = [&](const std::vector<double>& q, std::vector<double>& r,
                  std::vector<double>& jac) {
    const double A = std::exp(q[0]), G = std::exp(q[1]), x0 = q[2], b = q[3];
    const double h = 0.5 * G;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const double dx = spectrum[k].first - x0;
      const double den = dx * dx + h * h;
      const double lor = h * h / den;
      const double w = weights[k];
      r[k] = (A * lor + b - spectrum[k].second) * w;
      jac[k * 4 + 0] = A * lor * w;
      jac[k * 4 + 1] = A * (h * dx * dx / (den * den)) * G * w;
      jac[k * 4 + 2] = A * 2.0 * h * h * dx / (den * den) * w;
      jac[k * 4 + 3] = w;
    }
  };
  const auto res =
      fitting::levenberg_marquardt(spectrum.size(), p0, eval, options);

  SpectrumFit out;
  out.amplitude = std::exp(res.params[0]);
  out.fwhm_ghz = std::exp(res.params[1]);
  out.center = res.params[2];
  out.baseline = std::max(res.params[3], 0.0);
  out.sigma_amplitude = out.amplitude * res.sigma[0];
  out.sigma_fwhm_ghz = out.fwhm_ghz * res.sigma[1];
  out.sigma_center = res.sigma[2];
  out.sigma_baseline = res.sigma[3];
  out.residual_norm = res.residual_norm;
  out.resolution_floor_ghz = resolution_floor_ghz;
  out.resolution_limited = out.fwhm_ghz < resolution_floor_ghz;
  out.no_peak = !(out.amplitude > 2.0 * out.sigma_amplitude);
  return out;
}

// ---- photon autocorrelation ----

enum class EmitterClass { single_emitter, not_single, inconclusive };

inline std::string to_string(EmitterClass c) {
  switch (c) {
    case EmitterClass::single_emitter: return "single_emitter";
    case EmitterClass::not_single: return "not_single";
    case EmitterClass::inconclusive: return "inconclusive";
  }
  return "?";
}

struct G2Fit {
  double g2_zero = 0.0;
  double sigma_g2_zero = 0.0;
  double g2_zero_raw = 0.0;
  double sigma_g2_zero_raw = 0.0;
  double tau1_ns = 0.0;
  double sigma_tau1_ns = 0.0;
  double bunching_a = 0.0;
  double tau2_ns = 0.0;
  double rho = 1.0;
  double plateau = 0.0;
  double residual_norm = 0.0;
  bool corrected_clipped = false;
  EmitterClass classification = EmitterClass::inconclusive;
};

// g2(tau) = 1 - (1 - g2_zero + a) exp(-|tau|/tau1) + a exp(-|tau|/tau2).
inline double g2_model(double g2_zero, double tau1_ns, double tau_ns,
                       double bunching_a = 0.0, double tau2_ns = 0.0) {
  const double at = std::abs(tau_ns);
  double v = 1.0 - (1.0 - g2_zero + bunching_a) * std::exp(-at / tau1_ns);
  if (bunching_a > 0.0) v += bunching_a * std::exp(-at / tau2_ns);
  return v;
}

inline double g2_model(const G2Fit& fit, double tau_ns) {
  return g2_model(fit.g2_zero, fit.tau1_ns, tau_ns, fit.bunching_a,
                  fit.tau2_ns);
}

struct CorrectedG2 {
  double value = 0.0;
  bool clipped = false;
};

// Uncorrelated-background correction: with signal fraction rho = S/(S+B),
// the measured dip shrinks as g2_meas = 1 - rho^2 (1 - g2_true).
inline CorrectedG2 correct_g2_background(double g2_measured_zero, double rho) {
  if (!(rho > 0.0) || rho > 1.0)
    throw InputError("signal fraction rho must lie in (0, 1]");
  const double corrected = (g2_measured_zero - (1.0 - rho * rho)) / (rho * rho);
  if (corrected < 0.0) return {0.0, true};
  return {corrected, false};
}

struct G2Histogram {
  std::vector<double> tau_ns;
  std::vector<std::uint64_t> counts;
  std::uint64_t total_pairs = 0;
};

inline G2Fit fit_g2(const std::vector<std::pair<double, double>>& histogram,
                    double rho = 1.0, const fitting::FitOptions& options = {}) {
  if (!(rho > 0.0) || rho > 1.0)
    throw InputError("signal fraction rho must lie in (0, 1]");
  if (histogram.size() < 20)
    throw InputError("g2 fit needs at least 20 histogram bins");
  double tau_abs_max = 0.0, cmax = 0.0;
  double c_center = 0.0, tau_center = std::numeric_limits<double>::max();
  for (const auto& [tau, c] : histogram) {
    if (c < 0.0) throw InputError("coincidence counts must be non-negative");
    tau_abs_max = std::max(tau_abs_max, std::abs(tau));
    cmax = std::max(cmax, c);
    if (std::abs(tau) < tau_center) {
      tau_center = std::abs(tau);
      c_center = c;
    }
  }
  G2Fit out;
  out.rho = rho;
  if (!(cmax > 0.0) || !(tau_abs_max > 0.0)) return out;

  // Plateau and antibunching-time starting guesses from the outer and inner
  // thirds of the histogram.
  double plateau0 = 0.0;
  std::size_t n_outer = 0;
  for (const auto& [tau, c] : histogram)
    if (std::abs(tau) > 0.6 * tau_abs_max) {
      plateau0 += c;
      ++n_outer;
    }
  if (n_outer < 5) return out;
  plateau0 /= double(n_outer);
  if (!(plateau0 > 0.0)) return out;

  double tau10 = 0.0;
  {
    const double target = c_center + 0.632 * (plateau0 - c_center);
    double best = tau_abs_max;
    for (const auto& [tau, c] : histogram)
      if (c >= target) best = std::min(best, std::abs(tau));
    tau10 = std::clamp(best, 1e-3 * tau_abs_max, 0.5 * tau_abs_max);
  }
  // The plateau guess must rest on bins beyond the antibunching recovery.
  if (tau_abs_max < 5.0 * tau10) return out;

  const double g20 =
      std::clamp(c_center / plateau0, 1e-4, 1.0 - 1e-9);
  // Counts in a bin average the model over the bin, and near tau = 0 the
  // kink of exp(-|tau|/tau1) makes the bin mean sit well above the center
  // value, so the model is integrated across each bin:
  //   E_k = (F(b) - F(a)) / width with F(x) = sign(x) tau1 (1 - e^(-|x|/tau1))
  // over [a, b] = tau_k -/+ width/2, which keeps the fitted intercept free of
  // bin-width bias.
  double bin_width = 0.0;
  {
    std::vector<double> taus;
    taus.reserve(histogram.size());
    for (const auto& [tau, c] : histogram) taus.push_back(tau);
    std::sort(taus.begin(), taus.end());
    std::vector<double> diffs;
    for (std::size_t k = 1; k < taus.size(); ++k)
      diffs.push_back(taus[k] - taus[k - 1]);
    std::sort(diffs.begin(), diffs.end());
    bin_width = diffs[diffs.size() / 2];
  }
  const auto bin_mean = [bin_width](double tau, double tau1, double& dd_tau1) {
    const auto F = [tau1](double x) {
      return (x >= 0.0 ? -1.0 : 1.0) * tau1 * std::expm1(-std::abs(x) / tau1);
    };
    const auto G = [tau1](double x) {
      const double ax = std::abs(x) / tau1;
      return (x >= 0.0 ? -1.0 : 1.0) * (std::expm1(-ax) + ax * std::exp(-ax));
    };
    const double a = tau - 0.5 * bin_width, b = tau + 0.5 * bin_width;
    dd_tau1 = (G(b) - G(a)) / bin_width;
    return (F(b) - F(a)) / bin_width;
  };

  // Internal: g2_raw linear, log tau1, log scale.  The intercept stays
  // linear because a clean single emitter drives it against the g2 = 0
  // boundary, where a log parameter would run off to -inf and leave the
  // uncertainty undefined; small negative excursions are clipped on output.
  // Poisson weights come from the observed counts on the first pass and
  // from the fitted model on the second, which removes the low-count
  // weighting bias.
  std::vector<double> p0{g20, std::log(tau10), std::log(plateau0)};
  std::vector<double> weights(histogram.size());
  for (std::size_t k = 0; k < histogram.size(); ++k)
    weights[k] = 1.0 / std::sqrt(std::max(histogram[k].second, 1.0));
  auto eval = [&](const std::vector<double>& q, std::vector<double>& r,
                  std::vector<double>& jac) {
    const double g2 = q[0], tau1 = std::exp(q[1]), s = std::exp(q[2]);
    for (std::size_t k = 0; k < histogram.size(); ++k) {
      const double w = weights[k];
      double de_dtau1 = 0.0;
      const double e = bin_mean(histogram[k].first, tau1, de_dtau1);
      const double model = s * (1.0 - (1.0 - g2) * e);
      r[k] = (model - histogram[k].second) * w;
      jac[k * 3 + 0] = s * e * w;
      jac[k * 3 + 1] = -s * (1.0 - g2) * de_dtau1 * tau1 * w;
      jac[k * 3 + 2] = model * w;
    }
  };
  auto res = fitting::levenberg_marquardt(histogram.size(), p0, eval, options);
  {
    const double g2 = res.params[0], tau1 = std::exp(res.params[1]),
                 s = std::exp(res.params[2]);
    for (std::size_t k = 0; k < histogram.size(); ++k) {
      double de = 0.0;
      const double model = s * (1.0 - (1.0 - g2) * bin_mean(histogram[k].first, tau1, de));
      weights[k] = 1.0 / std::sqrt(std::max(model, 1.0));
    }
    res = fitting::levenberg_marquardt(histogram.size(), res.params, eval, options);
  }

  out.g2_zero_raw = std::max(res.params[0], 0.0);
  out.tau1_ns = std::exp(res.params[1]);
  out.plateau = std::exp(res.params[2]);
  out.sigma_g2_zero_raw = res.sigma[0];
  out.sigma_tau1_ns = out.tau1_ns * res.sigma[1];
  out.residual_norm = res.residual_norm;

  const auto corr = correct_g2_background(out.g2_zero_raw, rho);
  out.g2_zero = corr.value;
  out.corrected_clipped = corr.clipped;
  out.sigma_g2_zero = out.sigma_g2_zero_raw / (rho * rho);

  if (!std::isfinite(out.sigma_g2_zero))
    out.classification = EmitterClass::inconclusive;
  else if (out.g2_zero + out.sigma_g2_zero < 0.5)
    out.classification = EmitterClass::single_emitter;
  else if (out.g2_zero - out.sigma_g2_zero >= 0.5)
    out.classification = EmitterClass::not_single;
  else
    out.classification = EmitterClass::inconclusive;
  return out;
}

inline G2Fit fit_g2(const G2Histogram& histogram, double rho = 1.0,
                    const fitting::FitOptions& options = {}) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(histogram.tau_ns.size());
  for (std::size_t i = 0; i < histogram.tau_ns.size(); ++i)
    pts.emplace_back(histogram.tau_ns[i], double(histogram.counts[i]));
  return fit_g2(pts, rho, options);
}

// ---- Monte Carlo HBT generator ----

// Continuous-time model of a driven emitter: ground -> excited at the
// excitation rate, excited -> ground at the decay rate (emitting a photon),
// with an optional shelving state (excited -> shelf -> ground).  Detected
// emitter counts are thinned to signal_rate_cps, merged with a Poisson
// background of background_rate_cps, and split 50/50 onto two detectors.
struct PhotonStreamSpec {
  double excitation_rate_per_ns = 0.0;
  double decay_rate_per_ns = 0.05;
  double shelve_rate_per_ns = 0.0;
  double deshelve_rate_per_ns = 0.0;
  double signal_rate_cps = 0.0;
  double background_rate_cps = 0.0;
  double duration_s = 1.0;
  double bin_width_ns = 1.0;
  double window_ns = 200.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (excitation_rate_per_ns < 0.0 || decay_rate_per_ns < 0.0 ||
        shelve_rate_per_ns < 0.0 || deshelve_rate_per_ns < 0.0 ||
        signal_rate_cps < 0.0 || background_rate_cps < 0.0)
      throw InputError("photon stream rates must be non-negative");
    if (!(duration_s > 0.0)) throw InputError("stream duration must be positive");
    if (!(bin_width_ns > 0.0)) throw InputError("bin width must be positive");
    if (window_ns < bin_width_ns)
      throw InputError("correlation window must cover at least one bin");
    if (signal_rate_cps > 0.0 &&
        (excitation_rate_per_ns <= 0.0 || decay_rate_per_ns <= 0.0))
      throw InputError("emitter signal requires positive excitation and decay rates");
    if (shelve_rate_per_ns > 0.0 && deshelve_rate_per_ns <= 0.0)
      throw InputError("shelving requires a positive deshelve rate");
  }
};

inline G2Histogram simulate_hbt(const PhotonStreamSpec& spec) {
  spec.validate();
  const double t_end_ns = spec.duration_s * 1e9;
  const double det_rate_ns = (spec.signal_rate_cps + spec.background_rate_cps) * 1e-9;
  const double expected_photons = det_rate_ns * t_end_ns;
  if (expected_photons > 4e8)
    throw InputError("photon stream too large (" +
                     std::to_string(std::uint64_t(expected_photons)) +
                     " expected detections); shorten duration_s or lower rates");
  const double expected_pairs =
      0.5 * det_rate_ns * det_rate_ns * spec.window_ns * t_end_ns;
  if (expected_pairs > 4e9)
    throw InputError("expected coincidence count overflows the correlator "
                     "budget; shorten duration_s or lower rates");

  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng]() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  };
  auto exp_wait = [&](double rate) {
    return -std::log1p(-uniform()) / rate;
  };

  // Emitter photon arrival times, thinned to the requested detected rate.
  std::vector<double> signal;
  if (spec.signal_rate_cps > 0.0) {
    const double k_exc = spec.excitation_rate_per_ns;
    const double k_dec = spec.decay_rate_per_ns;
    const double k_shv = spec.shelve_rate_per_ns;
    const double k_dsh = spec.deshelve_rate_per_ns;
    // Steady-state emission rate of the pump cycle: time per cycle is
    // pumping + excited-state dwell + (shelving probability) * shelf dwell,
    // and a fraction k_dec/(k_dec + k_shv) of cycles end radiatively.
    const double branch_rad = k_dec / (k_dec + k_shv);
    const double t_cycle =
        1.0 / k_exc + 1.0 / (k_dec + k_shv) +
        (k_shv > 0.0 ? (k_shv / (k_dec + k_shv)) / k_dsh : 0.0);
    const double emit_rate = branch_rad / t_cycle;
    const double p_detect = spec.signal_rate_cps * 1e-9 / emit_rate;
    if (p_detect > 1.0)
      throw InputError("signal_rate_cps exceeds the emitter photon rate (" +
                       std::to_string(emit_rate * 1e9) + " counts/s)");
    signal.reserve(std::size_t(spec.signal_rate_cps * 1e-9 * t_end_ns * 1.1) + 16);
    enum { ground, excited, shelf } state = ground;
    double t = 0.0;
    while (true) {
      switch (state) {
        case ground:
          t += exp_wait(k_exc);
          state = excited;
          break;
        case excited: {
          t += exp_wait(k_dec + k_shv);
          if (uniform() * (k_dec + k_shv) < k_dec) {
            state = ground;
            if (t < t_end_ns && uniform() < p_detect) signal.push_back(t);
          } else {
            state = shelf;
          }
          break;
        }
        case shelf:
          t += exp_wait(k_dsh);
          state = ground;
          break;
      }
      if (t >= t_end_ns) break;
    }
  }

  // Independent Poisson background, merged in time order.
  std::vector<double> photons;
  photons.reserve(signal.size() +
                  std::size_t(spec.background_rate_cps * 1e-9 * t_end_ns * 1.1) + 16);
  {
    const double k_bg = spec.background_rate_cps * 1e-9;
    double t_bg = k_bg > 0.0 ? exp_wait(k_bg) : t_end_ns;
    std::size_t i_sig = 0;
    while (true) {
      const double t_sig = i_sig < signal.size()
                               ? signal[i_sig]
                               : std::numeric_limits<double>::infinity();
      if (t_bg < t_sig) {
        if (t_bg >= t_end_ns) break;
        photons.push_back(t_bg);
        t_bg += exp_wait(k_bg);
      } else {
        if (!std::isfinite(t_sig)) break;
        photons.push_back(t_sig);
        ++i_sig;
      }
    }
  }

  // 50/50 beamsplitter, then a full (start-stop-free) cross correlation over
  // +/- window: every A-B pair within the window fills one bin of
  // tau = t_B - t_A.
  const auto n_side = std::uint64_t(std::floor(spec.window_ns / spec.bin_width_ns));
  G2Histogram hist;
  hist.tau_ns.resize(2 * n_side + 1);
  hist.counts.assign(2 * n_side + 1, 0);
  for (std::size_t i = 0; i < hist.tau_ns.size(); ++i)
    hist.tau_ns[i] = (double(i) - double(n_side)) * spec.bin_width_ns;
  const double tau_cut = (double(n_side) + 0.5) * spec.bin_width_ns;

  std::deque<double> recent_a, recent_b;
  for (double t : photons) {
    const bool to_a = uniform() < 0.5;
    auto& mine = to_a ? recent_a : recent_b;
    auto& other = to_a ? recent_b : recent_a;
    while (!other.empty() && t - other.front() >= tau_cut) other.pop_front();
    for (double s : other) {
      const double tau = to_a ? s - t : t - s;
      const auto bin = std::llround(tau / spec.bin_width_ns) + std::int64_t(n_side);
      ++hist.counts[std::size_t(bin)];
      ++hist.total_pairs;
    }
    mine.push_back(t);
    while (!mine.empty() && t - mine.front() >= tau_cut) mine.pop_front();
  }
  return hist;
}

} // namespace stratlum
