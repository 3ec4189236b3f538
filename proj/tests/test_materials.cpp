#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "stratlum/material.hpp"
#include "stratlum/material_bundle.hpp"

using namespace stratlum;

namespace {

// Malitson fused-silica Sellmeier evaluated directly, wavelength in microns.
double malitson_n(double wavelength_nm) {
  const double l2 = std::pow(wavelength_nm * 1e-3, 2);
  const double n2 = 1.0 + 0.6961663 * l2 / (l2 - 0.0684043 * 0.0684043) +
                    0.4079426 * l2 / (l2 - 0.1162414 * 0.1162414) +
                    0.8974794 * l2 / (l2 - 9.896161 * 9.896161);
  return std::sqrt(n2);
}

} // namespace

TEST_CASE("vacuum is exactly n=1, k=0 at every wavelength") {
  const auto& vac = bundled_materials().get("vacuum");
  for (double w : {200.0, 500.0, 637.0, 2000.0}) {
    CHECK(vac.refractive_index(w) == std::complex<double>(1.0, 0.0));
    CHECK(vac.permittivity(w) == std::complex<double>(1.0, 0.0));
  }
  CHECK(vac.kind() == MaterialKind::vacuum);
}

TEST_CASE("constant-index synthetic material is flat over its range") {
  const auto m = OpticalMaterial::constant("glassy", 1.5, 0.0, 400.0, 900.0);
  CHECK(m.refractive_index(400.0) == std::complex<double>(1.5, 0.0));
  CHECK(m.refractive_index(650.0) == std::complex<double>(1.5, 0.0));
  CHECK(m.refractive_index(900.0) == std::complex<double>(1.5, 0.0));
  CHECK(m.min_wavelength_nm() == 400.0);
  CHECK(m.max_wavelength_nm() == 900.0);
}

TEST_CASE("fused silica tracks the Sellmeier form near 637 nm") {
  const auto& sio2 = bundled_materials().get("sio2");
  const auto nk = sio2.refractive_index(637.0);
  CHECK(nk.imag() == 0.0);
  CHECK(nk.real() == Catch::Approx(malitson_n(637.0)).margin(1e-3));
  CHECK(nk.real() == Catch::Approx(1.4569).margin(1e-3));
  CHECK(sio2.permittivity(637.0).real() == Catch::Approx(2.123).margin(3e-3));
}

TEST_CASE("silver interpolation stays between the bracketing table nodes") {
  const auto& ag = bundled_materials().get("ag");
  CHECK(ag.refractive_index(616.84) == std::complex<double>(0.06, 4.152));
  CHECK(ag.refractive_index(659.49) == std::complex<double>(0.05, 4.483));
  const auto nk = ag.refractive_index(637.0);
  CHECK(nk.real() >= 0.05);
  CHECK(nk.real() <= 0.06);
  CHECK(nk.imag() >= 4.152);
  CHECK(nk.imag() <= 4.483);
}

TEST_CASE("gold interpolation stays between the bracketing table nodes") {
  const auto& au = bundled_materials().get("au");
  CHECK(au.refractive_index(616.84) == std::complex<double>(0.21, 3.272));
  CHECK(au.refractive_index(659.49) == std::complex<double>(0.14, 3.697));
  const auto nk = au.refractive_index(637.0);
  CHECK(nk.real() >= 0.14);
  CHECK(nk.real() <= 0.21);
  CHECK(nk.imag() >= 3.272);
  CHECK(nk.imag() <= 3.697);
}

TEST_CASE("permittivity is the square of the refractive index") {
  const auto m = OpticalMaterial::constant("unit", 1.0, 1.0);
  CHECK(m.permittivity(500.0).real() == Catch::Approx(0.0).margin(1e-15));
  CHECK(m.permittivity(500.0).imag() == Catch::Approx(2.0).epsilon(1e-15));

  const auto& mats = bundled_materials();
  std::mt19937_64 rng(7);
  const auto names = mats.names();
  std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
  for (int i = 0; i < 1000; ++i) {
    const auto& mat = mats.get(names[pick(rng)]);
    std::uniform_real_distribution<double> wl(mat.min_wavelength_nm(),
                                              mat.max_wavelength_nm());
    const double w = wl(rng);
    const auto nk = mat.refractive_index(w);
    const auto eps = mat.permittivity(w);
    CHECK(std::abs(eps - nk * nk) <= 1e-12 * std::abs(eps));
  }
}

TEST_CASE("out-of-range wavelength names the material and its span") {
  const auto& diamond = bundled_materials().get("diamond");
  try {
    diamond.refractive_index(450.0);
    FAIL("expected MaterialRangeError");
  } catch (const MaterialRangeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("diamond") != std::string::npos);
    CHECK(msg.find("500") != std::string::npos);
    CHECK(msg.find("800") != std::string::npos);
  }
}

TEST_CASE("material registry lookups") {
  const auto& mats = bundled_materials();
  CHECK(mats.contains("ag"));
  CHECK_FALSE(mats.contains("unobtanium"));
  CHECK_THROWS_AS(mats.get("unobtanium"), InputError);
  for (const char* name : {"ag", "au", "al", "si", "sio2", "diamond", "air", "vacuum"})
    CHECK(mats.contains(name));
}

TEST_CASE("dispersion text parser validates structure") {
  const auto m = parse_dispersion_text("# demo dielectric\n500 1.5 0\n600 1.6 0.1\n");
  CHECK(m.name() == "demo");
  CHECK(m.refractive_index(550.0) ==
        std::complex<double>(1.55, 0.05));

  CHECK_THROWS_AS(parse_dispersion_text(""), ParseError);
  CHECK_THROWS_AS(parse_dispersion_text("no header\n500 1 0\n"), ParseError);
  CHECK_THROWS_AS(parse_dispersion_text("# demo dielectric\n500 1.5\n"), ParseError);
  CHECK_THROWS_AS(parse_dispersion_text("# demo dielectric\n500 1.5 0 junk\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_dispersion_text("# demo dielectric\n600 1.5 0\n500 1.6 0\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_dispersion_text("# demo dielectric\n500 1.5 -0.1\n"),
                  ParseError);

  try {
    parse_dispersion_text("# demo dielectric\n500 1.5 0\nbogus row here\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("samples must be passive and ascending at construction") {
  CHECK_THROWS_AS(OpticalMaterial("bad", MaterialKind::dielectric, {}),
                  InputError);
  CHECK_THROWS_AS(OpticalMaterial("bad", MaterialKind::dielectric,
                                  {{500.0, 1.0, -0.2}}),
                  InputError);
  CHECK_THROWS_AS(OpticalMaterial("bad", MaterialKind::dielectric,
                                  {{600.0, 1.0, 0.0}, {500.0, 1.0, 0.0}}),
                  InputError);
}
