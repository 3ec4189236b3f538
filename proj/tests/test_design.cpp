#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "stratlum/design.hpp"
#include "stratlum/material_bundle.hpp"
#include "stratlum/presets.hpp"

using namespace stratlum;

namespace {

constexpr double kPi = std::numbers::pi;

// Hand-built curve for exercising the peak finder without running the solver.
SweepCurve synthetic_curve(double start, double stop, double step,
                           double (*f)(double)) {
  SweepCurve c;
  for (double t = start; t <= stop + 1e-9; t += step) {
    c.abscissa.push_back(t);
    c.values.push_back(f(t));
  }
  c.abscissa_name = "thickness_nm";
  c.metric_name = "power_na";
  return c;
}

double half_wave_peak(double t) {
  const double u = std::cos(kPi * (t - 203.1) / 200.0);
  return u * u;
}

double offset_parabola(double t) {
  return 5.0 - 0.002 * (t - 61.3) * (t - 61.3);
}

} // namespace

TEST_CASE("sweep grid construction and validation") {
  const auto grid = detail::sweep_grid(10.0, 400.0, 5.0);
  REQUIRE(grid.size() == 79);
  CHECK(grid.front() == 10.0);
  CHECK(grid.back() == 400.0);

  CHECK_THROWS_AS(detail::sweep_grid(10.0, 400.0, 0.0), InputError);
  CHECK_THROWS_AS(detail::sweep_grid(10.0, 400.0, -5.0), InputError);
  CHECK_THROWS_AS(detail::sweep_grid(400.0, 10.0, 5.0), InputError);

  CHECK(metric_from_string("power_up") == SweepMetric::power_up);
  CHECK(metric_from_string(to_string(SweepMetric::eta_na)) == SweepMetric::eta_na);
  CHECK_THROWS_AS(metric_from_string("net_flux"), InputError);
}

TEST_CASE("free-space thickness sweep is flat at unity") {
  const auto& mats = bundled_materials();
  const LayerStack fs(mats.get("vacuum"),
                      {{mats.get("vacuum"), 100.0}, {mats.get("vacuum"), 50.0}},
                      mats.get("vacuum"));
  DipoleSource dip;
  dip.layer_index = 0;
  dip.z_up_nm = 50.0;
  dip.z_down_nm = 50.0;
  dip.orientation = Orientation::isotropic_average;

  SweepSpec spec{fs,  1,   20.0, 120.0, 10.0, SweepMetric::purcell_total,
                 0.7, dip, 0.0,  {},    "vacuum"};
  const auto curve = thickness_sweep(spec);
  REQUIRE(curve.values.size() == 11);
  for (double v : curve.values) CHECK(v == Catch::Approx(1.0).epsilon(1e-6));

  CHECK(find_peaks(curve).peaks.empty());
}

TEST_CASE("parabolic peak refinement is exact on a parabola") {
  for (double h : {7.0, 3.5, 1.75}) {
    const auto curve = synthetic_curve(0.0, 140.0, h, offset_parabola);
    const auto report = find_peaks(curve);
    REQUIRE(report.peaks.size() == 1);
    CHECK(report.peaks[0].position_nm == Catch::Approx(61.3).margin(1e-9));
    CHECK(report.peaks[0].value == Catch::Approx(5.0).margin(1e-12));
  }
}

TEST_CASE("peak refinement error stays below the three-point bound") {
  // For f(t) = cos^2(pi (t - t0) / P): |f''| = 2 pi^2 / P^2 at the peak and
  // M3 = 4 pi^3 / P^3, so the documented bound M3 h^2 / (6 |f''|) becomes
  // pi h^2 / (3 P).
  const double period = 200.0;
  for (double h : {5.0, 2.5, 1.25}) {
    const auto curve = synthetic_curve(100.0, 300.0, h, half_wave_peak);
    const auto report = find_peaks(curve);
    REQUIRE(report.peaks.size() == 1);
    const double bound = kPi * h * h / (3.0 * period);
    CHECK(std::abs(report.peaks[0].position_nm - 203.1) <= bound);
  }
}

TEST_CASE("prominence filter separates ripple from peaks") {
  // Tall bump at 100 plus a 1% ripple bump at 300: the default threshold
  // (2% of max) keeps only the tall one.
  const auto curve = synthetic_curve(0.0, 400.0, 5.0, [](double t) {
    const double a = (t - 100.0) / 40.0;
    const double b = (t - 300.0) / 25.0;
    return std::exp(-a * a) + 0.01 * std::exp(-b * b);
  });

  const auto strict = find_peaks(curve);
  REQUIRE(strict.peaks.size() == 1);
  CHECK(strict.peaks[0].position_nm == Catch::Approx(100.0).margin(1.0));

  const auto all = find_peaks(curve, 0.0);
  REQUIRE(all.peaks.size() == 2);
  CHECK(all.peaks[1].position_nm == Catch::Approx(300.0).margin(1.0));
  CHECK(all.peaks[0].order == 1);
  CHECK(all.peaks[1].order == 2);

  CHECK(find_peaks(curve, 10.0).peaks.empty());

  SweepCurve tiny;
  tiny.abscissa = {1.0, 2.0, 3.0, 4.0};
  tiny.values = {0.0, 1.0, 0.5, 0.2};
  CHECK_THROWS_AS(find_peaks(tiny), InputError);
}

TEST_CASE("spacer sweep resolves both interference orders") {
  const auto& mats = bundled_materials();
  const auto curve = thickness_sweep(presets::spacer_sweep(mats, "ag"), 2);
  REQUIRE(curve.values.size() == 79);
  CHECK(curve.abscissa_name == "thickness_nm");
  CHECK(curve.metric_name == "power_na");

  const auto report = find_peaks(curve);
  REQUIRE(report.peaks.size() == 2);
  const auto& first = report.peaks[0];
  const auto& second = report.peaks[1];

  CHECK(first.position_nm == Catch::Approx(52.940800).epsilon(1e-5));
  CHECK(second.position_nm == Catch::Approx(281.895551).epsilon(1e-5));
  CHECK(first.value == Catch::Approx(0.128003420).epsilon(1e-6));
  CHECK(second.value == Catch::Approx(0.126494228).epsilon(1e-6));

  // Peak spacing tracks the half-wave optical thickness of the silica
  // spacer.
  const double n_sio2 =
      std::sqrt(mats.get("sio2").permittivity(presets::kWavelengthNm)).real();
  const double half_wave = presets::kWavelengthNm / (2.0 * n_sio2);
  CHECK(std::abs((second.position_nm - first.position_nm) / half_wave - 1.0) <
        0.15);
}

TEST_CASE("threaded sweep matches the sequential result exactly") {
  const auto& mats = bundled_materials();
  auto spec = presets::spacer_sweep(mats, "ag");
  spec.start_nm = 40.0;
  spec.stop_nm = 90.0;
  const auto seq = thickness_sweep(spec, 1);
  const auto par = thickness_sweep(spec, 4);
  REQUIRE(seq.values.size() == par.values.size());
  for (std::size_t i = 0; i < seq.values.size(); ++i)
    CHECK(seq.values[i] == par.values[i]);
}

TEST_CASE("halving the sweep step moves the reported peaks by under 2 nm") {
  const auto& mats = bundled_materials();
  auto spec = presets::spacer_sweep(mats, "ag");
  const auto coarse = find_peaks(thickness_sweep(spec, 2));
  spec.step_nm = 2.5;
  const auto fine = find_peaks(thickness_sweep(spec, 2));
  REQUIRE(coarse.peaks.size() == 2);
  REQUIRE(fine.peaks.size() >= 2);
  CHECK(std::abs(coarse.peaks[0].position_nm - fine.peaks[0].position_nm) <= 2.0);
  CHECK(std::abs(coarse.peaks[1].position_nm - fine.peaks[1].position_nm) <= 2.0);
}

TEST_CASE("enhancement ratio properties") {
  const auto& mats = bundled_materials();
  const auto ag = thickness_sweep(presets::spacer_sweep(mats, "ag"), 2);
  const auto none = thickness_sweep(presets::spacer_sweep(mats, ""), 2);

  CHECK(enhancement(ag, ag) == Catch::Approx(1.0).epsilon(1e-12));

  const double ratio = enhancement(ag, none);
  CHECK(ratio == Catch::Approx(2.318486528133).epsilon(1e-6));
  CHECK(ratio >= 2.0);
  CHECK(ratio <= 4.0);

  SweepCurve scaled_ag = ag;
  SweepCurve scaled_none = none;
  for (auto& v : scaled_ag.values) v *= 7.25;
  for (auto& v : scaled_none.values) v *= 7.25;
  CHECK(enhancement(scaled_ag, scaled_none) == Catch::Approx(ratio).epsilon(1e-12));

  SweepCurve other = none;
  other.metric_name = "power_up";
  CHECK_THROWS_AS(enhancement(ag, other), InputError);
  CHECK_THROWS_AS(enhancement(SweepCurve{}, none), InputError);

  SweepCurve dead = none;
  std::fill(dead.values.begin(), dead.values.end(), 0.0);
  CHECK_THROWS_AS(enhancement(ag, dead), InputError);
}

TEST_CASE("upward-power enhancement lands in the same window") {
  const auto& mats = bundled_materials();
  const auto ag =
      thickness_sweep(presets::spacer_sweep(mats, "ag", SweepMetric::power_up), 2);
  const auto none =
      thickness_sweep(presets::spacer_sweep(mats, "", SweepMetric::power_up), 2);
  const double ratio = enhancement(ag, none);
  CHECK(ratio >= 2.0);
  CHECK(ratio <= 4.0);
}

TEST_CASE("silver beats the other reflector metals at its own peak") {
  const auto& mats = bundled_materials();
  auto max_of = [&](const std::string& metal) {
    const auto curve = thickness_sweep(presets::spacer_sweep(mats, metal), 2);
    return *std::max_element(curve.values.begin(), curve.values.end());
  };
  const double ag = max_of("ag");
  CHECK(ag >= max_of("au"));
  CHECK(ag >= max_of("al"));
}

TEST_CASE("wavelength sweep of free space is flat at unity") {
  const auto& mats = bundled_materials();
  const LayerStack fs(mats.get("vacuum"), {{mats.get("vacuum"), 200.0}},
                      mats.get("vacuum"));
  DipoleSource dip;
  dip.layer_index = 0;
  dip.z_up_nm = 100.0;
  dip.z_down_nm = 100.0;
  dip.orientation = Orientation::isotropic_average;

  const auto curve = wavelength_sweep(fs, dip, 600.0, 700.0, 25.0,
                                      SweepMetric::purcell_total);
  REQUIRE(curve.values.size() == 5);
  CHECK(curve.abscissa_name == "wavelength_nm");
  for (double v : curve.values) CHECK(v == Catch::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("wavelength and thickness sweeps agree where they cross") {
  const auto& mats = bundled_materials();
  const auto spec = presets::spacer_sweep(mats, "ag");

  const auto over_thickness = thickness_sweep(spec, 1);
  const auto over_wavelength = wavelength_sweep(
      spec.base_stack, spec.dipole, presets::kWavelengthNm,
      presets::kWavelengthNm, 1.0, spec.metric, spec.na, spec.loss_floor,
      spec.quadrature);

  // Same stack, dipole and quadrature settings: the 637 nm wavelength sample
  // must equal the 65 nm thickness sample bit for bit.
  const auto it = std::find(over_thickness.abscissa.begin(),
                            over_thickness.abscissa.end(),
                            presets::kSpacerFirstOrderNm);
  REQUIRE(it != over_thickness.abscissa.end());
  const std::size_t idx = std::size_t(it - over_thickness.abscissa.begin());
  REQUIRE(over_wavelength.values.size() == 1);
  CHECK(over_wavelength.values[0] == over_thickness.values[idx]);
}

TEST_CASE("first-order device enhancement is broadband") {
  const auto& mats = bundled_materials();
  const auto dip = presets::dipole();
  const auto device = wavelength_sweep(
      presets::device_stack(mats, "ag", presets::kSpacerFirstOrderNm), dip,
      600.0, 750.0, 10.0, SweepMetric::power_na, presets::kNumericalAperture,
      presets::kLossFloor, {}, "ag", 2);
  const auto control = wavelength_sweep(
      presets::no_metal_stack(mats, presets::kSpacerFirstOrderNm), dip, 600.0,
      750.0, 10.0, SweepMetric::power_na, presets::kNumericalAperture,
      presets::kLossFloor, {}, "none", 2);

  REQUIRE(device.values.size() == 16);
  for (std::size_t i = 0; i < device.values.size(); ++i)
    CHECK(device.values[i] / control.values[i] > 1.5);
}

TEST_CASE("sweep errors carry the failing grid point") {
  const auto& mats = bundled_materials();
  auto spec = presets::spacer_sweep(mats, "ag");
  spec.swept_layer = 99;
  CHECK_THROWS_AS(thickness_sweep(spec), InputError);

  auto bad = presets::spacer_sweep(mats, "ag");
  bad.start_nm = -20.0;
  bad.stop_nm = -10.0;
  CHECK_THROWS_WITH(thickness_sweep(bad),
                    Catch::Matchers::ContainsSubstring("swept thickness"));

  const auto dip = presets::dipole();
  CHECK_THROWS_WITH(
      wavelength_sweep(presets::device_stack(mats, "ag", 65.0), dip, 1500.0,
                       1600.0, 50.0, SweepMetric::power_na, 0.7,
                       presets::kLossFloor),
      Catch::Matchers::ContainsSubstring("swept wavelength"));
}
