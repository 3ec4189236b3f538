#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "stratlum/errors.hpp"
#include "stratlum/quadrature.hpp"

using namespace stratlum;

TEST_CASE("polynomials integrate exactly on a single panel") {
  const auto cubic = quad::integrate([](double x) { return x * x * x; }, 0.0, 1.0);
  CHECK(cubic.converged);
  CHECK(cubic.value == Catch::Approx(0.25).epsilon(1e-14));
  CHECK(cubic.evaluations == 15);

  const auto deg13 = quad::integrate([](double x) { return std::pow(x, 13); },
                                     -1.0, 2.0);
  CHECK(deg13.value ==
        Catch::Approx((std::pow(2.0, 14) - 1.0) / 14.0).epsilon(1e-13));
}

TEST_CASE("classic integrals converge to the requested tolerance") {
  quad::Options opts;
  opts.rel_tol = 1e-12;

  const auto sine = quad::integrate([](double x) { return std::sin(x); }, 0.0,
                                    std::numbers::pi, opts);
  CHECK(sine.value == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(sine.value - 2.0) <= std::max(sine.error_bound, 1e-14));

  const auto arctan = quad::integrate(
      [](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0, opts);
  CHECK(arctan.value == Catch::Approx(std::numbers::pi / 4.0).epsilon(1e-12));
}

TEST_CASE("adaptive refinement resolves a sharp Lorentzian spike") {
  const double eps = 1e-5;
  const auto res = quad::integrate(
      [eps](double x) { return eps / (x * x + eps * eps); }, -1.0, 1.0);
  const double exact = 2.0 * std::atan(1.0 / eps);
  CHECK(res.converged);
  CHECK(res.value == Catch::Approx(exact).epsilon(1e-8));
  CHECK(res.evaluations > 15);
}

TEST_CASE("near-singular endpoint integrand stays within the error bound") {
  const double s = 1e-6;
  const auto res = quad::integrate(
      [s](double x) { return 1.0 / std::sqrt(x + s); }, 0.0, 1.0);
  const double exact = 2.0 * (std::sqrt(1.0 + s) - std::sqrt(s));
  CHECK(res.value == Catch::Approx(exact).epsilon(1e-8));
  CHECK(std::abs(res.value - exact) <= 10.0 * res.error_bound + 1e-12);
}

TEST_CASE("degenerate interval integrates to zero") {
  const auto res = quad::integrate([](double x) { return std::exp(x); }, 2.0, 2.0);
  CHECK(res.converged);
  CHECK(res.value == 0.0);
}

TEST_CASE("panel exhaustion throws with the achieved estimate") {
  quad::Options opts;
  opts.rel_tol = 1e-15;
  opts.abs_tol = 0.0;
  opts.max_panels = 2;
  auto nasty = [](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3) + 1e-12); };
  try {
    quad::integrate(nasty, 0.0, 1.0, opts);
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    CHECK(e.error_bound() > 0.0);
    CHECK(std::isfinite(e.estimate()));
  }

  opts.throw_on_failure = false;
  const auto soft = quad::integrate(nasty, 0.0, 1.0, opts);
  CHECK_FALSE(soft.converged);
  CHECK(soft.error_bound > 0.0);
}

TEST_CASE("segment list reproduces the whole-interval result") {
  auto f = [](double x) { return std::cos(3.0 * x) * std::exp(-x); };
  const auto whole = quad::integrate(f, 0.0, 4.0);
  const auto split =
      quad::integrate_segments(f, quad::make_breakpoints(0.0, 4.0, {1.0, 2.5}));
  CHECK(split.converged);
  CHECK(split.value == Catch::Approx(whole.value).epsilon(1e-10));
}

TEST_CASE("breakpoint split nails a kinked integrand") {
  const double kink = 1.0 / 3.0;
  auto f = [kink](double x) { return std::abs(x - kink); };
  const double exact = (kink * kink + (1.0 - kink) * (1.0 - kink)) / 2.0;
  const auto res =
      quad::integrate_segments(f, quad::make_breakpoints(0.0, 1.0, {kink}));
  CHECK(res.value == Catch::Approx(exact).epsilon(1e-14));
}

TEST_CASE("make_breakpoints sorts, deduplicates and clips") {
  const auto b = quad::make_breakpoints(0.0, 2.0, {1.5, -3.0, 0.5, 0.5, 7.0, 1.5});
  REQUIRE(b == std::vector<double>{0.0, 0.5, 1.5, 2.0});
}
