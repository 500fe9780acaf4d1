#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "brownian_atlas/quadrature.hpp"

using namespace brownian_atlas;

TEST_CASE("polynomial and trigonometric integrals to tight tolerance") {
  const QuadResult sq = integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0);
  REQUIRE(std::abs(sq.value - 1.0 / 3.0) < 1e-13);

  const QuadResult sine = integrate_adaptive([](double x) { return std::sin(x); }, 0.0,
                                             3.14159265358979323846);
  REQUIRE(std::abs(sine.value - 2.0) < 1e-12);
  REQUIRE(sine.evaluations > 0);
}

TEST_CASE("adaptive refinement resolves a narrow peak") {
  // standard normal pdf with sigma = 1e-3 integrates to ~1 over [-1, 1]
  const double sigma = 1e-3;
  auto peak = [sigma](double x) {
    return std::exp(-x * x / (2.0 * sigma * sigma)) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
  };
  const QuadResult r = integrate_adaptive(peak, -1.0, 1.0, 1e-10, 20000);
  REQUIRE(std::abs(r.value - 1.0) < 1e-8);
}

TEST_CASE("error estimate bounds the actual error on a smooth integrand") {
  const QuadResult r = integrate_adaptive([](double x) { return std::exp(-x) * std::cos(3.0 * x); },
                                          0.0, 5.0);
  const double exact = (1.0 - std::exp(-5.0) * (std::cos(15.0) - 3.0 * std::sin(15.0))) / 10.0;
  REQUIRE(std::abs(r.value - exact) < 1e-11);
  REQUIRE(std::abs(r.value - exact) <= r.error_estimate + 1e-13);
}

TEST_CASE("degenerate and reversed intervals are rejected") {
  const auto id = [](double x) { return x; };
  REQUIRE_THROWS_AS(integrate_adaptive(id, 2.0, 2.0), std::invalid_argument);
  REQUIRE_THROWS_AS(integrate_adaptive(id, 3.0, 2.0), std::invalid_argument);
}
