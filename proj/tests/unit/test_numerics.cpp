#include <doctest.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "deviatile/error.hpp"
#include "deviatile/numerics.hpp"

using namespace deviatile;

TEST_CASE("adaptive quadrature on smooth and peaked integrands") {
  auto r = numerics::integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));

  r = numerics::integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0);
  CHECK(r.value == doctest::Approx(2.0 / 1e-2 * std::atan(1.0 / 1e-2)).epsilon(1e-11));

  r = numerics::integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("half-line quadrature of power tails") {
  // int_1^inf x^-s dx = 1/(s-1)
  for (double s : {1.5, 2.0, 4.0}) {
    const double power = std::max(1.0, 2.0 / (s - 1.0));
    auto r = numerics::integrate_upper([&](double x) { return std::pow(x, -s); }, 1.0, 1.0, power);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0 / (s - 1.0)).epsilon(1e-10));
  }
  auto r = numerics::integrate_lower([](double x) { return std::exp(x); }, 0.0, 1.0, 1.0);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("regularized incomplete beta against Boost") {
  for (double a : {0.5, 1.0, 2.5, 3.27}) {
    for (double b : {0.5, 1.5, 3.0}) {
      for (double x : {1e-6, 0.1, 0.5, 0.9, 0.999999}) {
        CHECK(numerics::incomplete_beta(a, b, x) ==
              doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-13));
      }
    }
  }
  CHECK(numerics::incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(numerics::incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("bisection and normal quantiles") {
  const double r = numerics::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK_THROWS_AS(numerics::bisect([](double x) { return x * x + 1.0; }, 0.0, 1.0, 1e-10),
                  InvalidArgument);
  CHECK(numerics::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(numerics::two_sided_z(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(numerics::two_sided_z(0.0) == 0.0);
  CHECK_THROWS_AS(numerics::two_sided_z(1.0), InvalidArgument);
  CHECK_THROWS_AS(numerics::two_sided_z(-0.1), InvalidArgument);
}
