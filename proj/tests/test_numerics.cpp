#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ntsopt/errors.hpp"
#include "ntsopt/gauss_legendre.hpp"
#include "ntsopt/normal.hpp"
#include "ntsopt/quadrature.hpp"

using namespace ntsopt;

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  // n-point rule is exact through degree 2n-1.
  for (int n : {2, 5, 16, 64}) {
    const auto& rule = gauss_legendre(n);
    double weight_sum = 0.0;
    for (double w : rule.weights) weight_sum += w;
    CHECK(weight_sum == doctest::Approx(2.0).epsilon(1e-14));

    const int degree = 2 * n - 1;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], degree - 1);
    // x^(degree-1) is even when degree-1 is even; integral over [-1,1] is 2/(degree).
    const double exact = (degree - 1) % 2 == 0 ? 2.0 / degree : 0.0;
    CHECK(acc == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("Gauss-Legendre nodes are symmetric and inside (-1, 1)") {
  const auto& rule = gauss_legendre(33);
  for (int i = 0; i < 33; ++i) {
    CHECK(std::abs(rule.nodes[i]) < 1.0);
    CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[32 - i]).epsilon(1e-14));
    CHECK(rule.weights[i] > 0.0);
  }
}

TEST_CASE("adaptive integration matches closed forms") {
  auto exp_decay = [](double x) { return std::exp(-x); };
  auto r = integrate_adaptive(exp_decay, 0.0, 30.0, 1e-12, 16);
  CHECK(r.value == doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-12));

  auto oscillatory = [](double x) { return std::sin(x); };
  auto r2 = integrate_adaptive(oscillatory, 0.0, 40.0 * std::numbers::pi, 1e-11, 16);
  CHECK(std::abs(r2.value) < 1e-9);

  auto runge = [](double x) { return 1.0 / (1.0 + 25.0 * x * x); };
  auto r3 = integrate_adaptive(runge, 0.0, 1.0, 1e-12, 16);
  CHECK(r3.value == doctest::Approx(std::atan(5.0) / 5.0).epsilon(1e-11));
}

TEST_CASE("adaptive integration reports failure on pathological integrands") {
  // sin(1/x) oscillates infinitely fast toward 0; refinement can never settle.
  auto f = [](double x) { return std::sin(1.0 / x); };
  CHECK_THROWS_AS(integrate_adaptive(f, 0.0, 1.0, 1e-13, 8), ConvergenceError);
}

TEST_CASE("quadrature config validation") {
  CHECK_THROWS_AS(QuadratureConfig(0.0, 64, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(QuadratureConfig(200.0, 4, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(QuadratureConfig(200.0, 64, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(QuadratureConfig(200.0, 64, 0.0), std::invalid_argument);
  CHECK_NOTHROW(QuadratureConfig(200.0, 64, 1e-10, 0.25));
}

TEST_CASE("normal distribution helpers") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
  CHECK(normal_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-10));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));

  for (double x : {-3.0, -1.0, -0.1, 0.0, 0.7, 2.5}) {
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-11));
    // pdf is the derivative of cdf.
    const double fd = (normal_cdf(x + 1e-6) - normal_cdf(x - 1e-6)) / 2e-6;
    CHECK(normal_pdf(x) == doctest::Approx(fd).epsilon(1e-8));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
}
