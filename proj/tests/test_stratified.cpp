#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "oracles.hpp"
#include "stratlum/material_bundle.hpp"
#include "stratlum/stack_io.hpp"
#include "stratlum/stratified.hpp"

using namespace stratlum;

namespace {

constexpr double kPi = std::numbers::pi;

LayerStack silver_film(double thickness_nm) {
  const auto& mats = bundled_materials();
  return LayerStack(mats.get("air"), {{mats.get("ag"), thickness_nm}},
                    mats.get("air"));
}

} // namespace

TEST_CASE("normal wavevector branch selection") {
  CHECK(normal_wavevector(1.0, 0.0, 1.0) == Complex(1.0, 0.0));

  const Complex evanescent = normal_wavevector(1.0, 2.0, 1.0);
  CHECK(evanescent.real() == Catch::Approx(0.0).margin(1e-15));
  CHECK(evanescent.imag() == Catch::Approx(std::sqrt(3.0)).epsilon(1e-15));

  const Complex lossy = normal_wavevector(Complex(0.0, 2.0), 0.0, 1.0);
  CHECK(lossy.real() == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(lossy.imag() == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("wavevector branch is passive for all bundled media") {
  const double k0 = 2.0 * kPi / 637.0;
  const auto& mats = bundled_materials();
  for (const auto& name : mats.names()) {
    const Complex eps = mats.get(name).permittivity(637.0);
    for (double u = 0.0; u <= 8.0; u += 0.05) {
      const Complex kz = normal_wavevector(eps, u * k0, k0);
      CHECK(kz.imag() >= -1e-15);
      if (kz.imag() <= 1e-15) CHECK(kz.real() >= 0.0);
    }
  }
}

TEST_CASE("single-interface Fresnel amplitudes") {
  const double k0 = 2.0 * kPi / 600.0;

  SECTION("identical media are transparent") {
    for (auto pol : {Polarization::s, Polarization::p}) {
      const auto f = fresnel(2.25, 2.25, 0.4 * k0, k0, pol);
      CHECK(std::abs(f.r) <= 1e-15);
      CHECK(std::abs(f.t - 1.0) <= 1e-15);
    }
  }

  SECTION("air to glass at normal incidence") {
    const auto f = fresnel(1.0, 2.25, 0.0, k0, Polarization::s);
    CHECK(f.r.real() == Catch::Approx(-0.2).epsilon(1e-14));
    CHECK(f.r.imag() == Catch::Approx(0.0).margin(1e-15));
    CHECK(f.t.real() == Catch::Approx(0.8).epsilon(1e-14));
  }

  SECTION("total internal reflection is unimodular") {
    const double kpar = 1.2 * k0; // propagating in glass, evanescent in air
    for (auto pol : {Polarization::s, Polarization::p}) {
      const auto f = fresnel(2.25, 1.0, kpar, k0, pol);
      CHECK(std::abs(f.r) == Catch::Approx(1.0).epsilon(1e-12));
    }
  }

  SECTION("s and p coincide up to sign at normal incidence") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> re(-5.0, 5.0), im(0.0, 5.0);
    for (int i = 0; i < 100; ++i) {
      const Complex ei(re(rng) + 6.0, im(rng));
      const Complex ej(re(rng) + 6.0, im(rng));
      const auto s = fresnel(ei, ej, 0.0, k0, Polarization::s);
      const auto p = fresnel(ei, ej, 0.0, k0, Polarization::p);
      CHECK(std::abs(std::abs(s.r) - std::abs(p.r)) <= 1e-12);
      CHECK(std::abs(s.r + p.r) <= 1e-12 * std::max(1.0, std::abs(s.r)));
    }
  }

  SECTION("high-conductivity limit approaches the ideal mirror") {
    const Complex metal = Complex(0.01, 1000.0) * Complex(0.01, 1000.0);
    const auto s = fresnel(1.0, metal, 0.0, k0, Polarization::s);
    const auto p = fresnel(1.0, metal, 0.0, k0, Polarization::p);
    CHECK(std::abs(s.r + 1.0) < 0.01);
    CHECK(std::abs(p.r - 1.0) < 0.01);
  }
}

TEST_CASE("zero-layer stack reflection equals the bare Fresnel amplitude") {
  const auto& mats = bundled_materials();
  const LayerStack bare(mats.get("air"), {}, mats.get("si"));
  const TransverseMode mode{637.0, 0.3};
  const double k0 = 2.0 * kPi / 637.0;
  for (auto pol : {Polarization::s, Polarization::p}) {
    const Complex direct =
        fresnel(1.0, mats.get("si").permittivity(637.0), 0.3 * k0, k0, pol).r;
    CHECK(std::abs(stack_reflection(bare, Side::from_above, mode, pol) - direct) <=
          1e-14);
  }
  const LayerStack trivial(mats.get("air"), {}, mats.get("air"));
  CHECK(std::abs(stack_transmission(trivial, Side::from_above, mode,
                                    Polarization::s) -
                 1.0) <= 1e-14);
}

TEST_CASE("thick silver film reflects like the semi-infinite metal") {
  const auto& mats = bundled_materials();
  const TransverseMode mode{637.0, 0.0};
  const double k0 = 2.0 * kPi / 637.0;
  const Complex film =
      stack_reflection(silver_film(200.0), Side::from_above, mode, Polarization::s);
  CHECK(std::norm(film) >= 0.95);
  const Complex semi =
      fresnel(1.0, mats.get("ag").permittivity(637.0), 0.0, k0, Polarization::s).r;
  CHECK(std::abs(film - semi) <= 1e-3);
}

TEST_CASE("opaque silver transmission obeys the absorption scale") {
  const TransverseMode mode{637.0, 0.0};
  const Complex t =
      stack_transmission(silver_film(200.0), Side::from_above, mode, Polarization::s);
  CHECK(std::norm(t) <= 1e-3);
  CHECK(std::norm(t) > 0.0);

  // Nearly index-matched weak absorber: |T|^2 must follow Beer-Lambert decay.
  const auto host = OpticalMaterial::constant("host", 1.5, 0.0);
  const auto weak = OpticalMaterial::constant("weak", 1.5, 1e-3);
  const LayerStack slab(host, {{weak, 5000.0}}, host);
  const Complex tw =
      stack_transmission(slab, Side::from_above, mode, Polarization::p);
  const double k0 = 2.0 * kPi / 637.0;
  const Complex kz = normal_wavevector(weak.permittivity(637.0), 0.0, k0);
  const double beer = std::exp(-2.0 * kz.imag() * 5000.0);
  CHECK(std::norm(tw) == Catch::Approx(beer).epsilon(1e-4));
}

TEST_CASE("lossless slab conserves energy flux") {
  const auto& mats = bundled_materials();
  const LayerStack slab(mats.get("air"), {{mats.get("sio2"), 340.0}},
                        mats.get("diamond"));
  const double k0 = 2.0 * kPi / 637.0;
  const Complex eps_sup = 1.0;
  const Complex eps_sub = mats.get("diamond").permittivity(637.0);
  for (double u : {0.0, 0.3, 0.6, 0.9}) {
    const TransverseMode mode{637.0, u};
    const double kpar = u * k0;
    const Complex kz_sup = normal_wavevector(eps_sup, kpar, k0);
    const Complex kz_sub = normal_wavevector(eps_sub, kpar, k0);
    {
      const Complex r = stack_reflection(slab, Side::from_above, mode, Polarization::s);
      const Complex t = stack_transmission(slab, Side::from_above, mode, Polarization::s);
      const double flux =
          std::norm(r) + (kz_sub.real() / kz_sup.real()) * std::norm(t);
      CHECK(flux == Catch::Approx(1.0).epsilon(1e-10));
    }
    {
      const Complex r = stack_reflection(slab, Side::from_above, mode, Polarization::p);
      const Complex t = stack_transmission(slab, Side::from_above, mode, Polarization::p);
      const double flux =
          std::norm(r) + ((kz_sub / eps_sub).real() / (kz_sup / eps_sup).real()) *
                             std::norm(t);
      CHECK(flux == Catch::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("recursion agrees with brute-force transfer matrices") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> nd(1.0, 4.0), kd(0.0, 1.5),
      dd(20.0, 300.0), ud(0.0, 2.0);
  const double k0 = 2.0 * kPi / 637.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Complex eps_in = std::pow(Complex(nd(rng), 0.0), 2);
    const Complex eps_out = std::pow(Complex(nd(rng), kd(rng)), 2);
    std::vector<MediumSlice> slices;
    for (int l = 0; l < 3; ++l) {
      const Complex nk(nd(rng), kd(rng));
      slices.push_back({nk * nk, dd(rng)});
    }
    const double kpar = ud(rng) * k0;
    for (auto pol : {Polarization::s, Polarization::p}) {
      const Complex r = sequence_reflection(eps_in, slices, eps_out, kpar, k0, pol);
      const Complex t = sequence_transmission(eps_in, slices, eps_out, kpar, k0, pol);
      const auto ref = oracles::transfer_matrix(eps_in, slices, eps_out, kpar, k0, pol);
      CHECK(std::abs(r - ref.r) <= 1e-10 * std::max(1.0, std::abs(ref.r)));
      CHECK(std::abs(t - ref.t) <= 1e-10 * std::max(1.0, std::abs(ref.t)));
    }
  }
}

TEST_CASE("passive stacks never reflect above unity for propagating incidence") {
  // u is normalized to the incidence medium, so u > 1 means evanescent
  // incidence carrying no normal flux; |R| may exceed 1 there near
  // guided-mode resonances, and the unitarity bound applies only for u < 1.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> nd(1.0, 4.0), kd(0.0, 2.0),
      dd(10.0, 400.0);
  std::uniform_int_distribution<int> count(0, 5);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Layer> layers;
    const int n_layers = count(rng);
    for (int l = 0; l < n_layers; ++l)
      layers.push_back({OpticalMaterial::constant("m" + std::to_string(l),
                                                  nd(rng), kd(rng)),
                        dd(rng)});
    const LayerStack stack(OpticalMaterial::constant("sup", nd(rng), 0.0),
                           layers,
                           OpticalMaterial::constant("sub", nd(rng), kd(rng)));
    for (double u = 0.0; u <= 8.0; u += 0.4) {
      const TransverseMode mode{637.0, u};
      for (auto pol : {Polarization::s, Polarization::p}) {
        const Complex r = stack_reflection(stack, Side::from_above, mode, pol);
        CHECK(std::isfinite(std::abs(r)));
        if (u <= 0.999) CHECK(std::abs(r) <= 1.0 + 1e-10);
      }
    }
  }
}

TEST_CASE("stack editing helpers") {
  const auto& mats = bundled_materials();
  const LayerStack stack(mats.get("air"),
                         {{mats.get("diamond"), 129.0}, {mats.get("sio2"), 65.0}},
                         mats.get("si"));

  const LayerStack thicker = stack.with_thickness(1, 265.0);
  CHECK(thicker.layers()[1].thickness_nm == 265.0);
  CHECK(stack.layers()[1].thickness_nm == 65.0);
  CHECK_THROWS_AS(stack.with_thickness(5, 10.0), InputError);
  CHECK_THROWS_AS(stack.with_thickness(0, -1.0), InputError);

  const LayerStack upside = stack.flipped();
  CHECK(upside.superstrate().name() == "si");
  CHECK(upside.layers()[0].material.name() == "sio2");
  CHECK(upside.layers()[1].material.name() == "diamond");
  CHECK(upside.substrate().name() == "air");

  CHECK(stack.covers(637.0));
  CHECK_FALSE(stack.covers(450.0));

  CHECK_THROWS_AS(LayerStack(mats.get("air"), {{mats.get("sio2"), 0.0}},
                             mats.get("si")),
                  InputError);
}

TEST_CASE("flip symmetry of reflection") {
  const auto& mats = bundled_materials();
  const LayerStack stack(mats.get("air"),
                         {{mats.get("diamond"), 129.0},
                          {mats.get("sio2"), 65.0},
                          {mats.get("ag"), 200.0}},
                         mats.get("si"));
  const TransverseMode mode{637.0, 0.25};
  for (auto pol : {Polarization::s, Polarization::p}) {
    const Complex below = stack_reflection(stack, Side::from_below, mode, pol);
    const Complex flipped_above =
        stack_reflection(stack.flipped(), Side::from_above, mode, pol);
    CHECK(std::abs(below - flipped_above) <= 1e-14);
  }
}

TEST_CASE("stack JSON description round-trips") {
  const auto& mats = bundled_materials();
  const nlohmann::json j = {
      {"superstrate", "air"},
      {"substrate", "si"},
      {"layers", {{{"material", "diamond"}, {"thickness_nm", 129.0}},
                  {{"material", "sio2"}, {"thickness_nm", 65.0}}}}};
  const LayerStack stack = stack_from_json(j, mats);
  CHECK(stack.layers().size() == 2);
  CHECK(stack_to_json(stack) == j);

  nlohmann::json bad = j;
  bad["layers"][0]["thickness_nm"] = -3.0;
  CHECK_THROWS_AS(stack_from_json(bad, mats), InputError);

  nlohmann::json unknown = j;
  unknown["typo_key"] = 1;
  CHECK_THROWS_AS(stack_from_json(unknown, mats), InputError);

  nlohmann::json missing = j;
  missing.erase("substrate");
  CHECK_THROWS_AS(stack_from_json(missing, mats), InputError);

  nlohmann::json nomat = j;
  nomat["layers"][0]["material"] = "kryptonite";
  CHECK_THROWS_AS(stack_from_json(nomat, mats), InputError);
}
