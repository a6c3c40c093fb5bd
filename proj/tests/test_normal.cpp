#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "baryflow/normal.hpp"

using baryflow::norm_cdf;
using baryflow::norm_quantile;

// Reference values frozen from scipy.stats.norm.
TEST_CASE("cdf matches reference values") {
  CHECK(norm_cdf(0.0) == 0.5);
  CHECK(norm_cdf(-3.0) == doctest::Approx(0.0013498980316300933).epsilon(1e-14));
  CHECK(norm_cdf(-1.96) == doctest::Approx(0.024997895148220435).epsilon(1e-14));
  CHECK(norm_cdf(-0.5) == doctest::Approx(0.3085375387259869).epsilon(1e-14));
  CHECK(norm_cdf(0.7) == doctest::Approx(0.758036347776927).epsilon(1e-14));
  CHECK(norm_cdf(2.33) == doctest::Approx(0.9900969244408357).epsilon(1e-14));
}

TEST_CASE("cdf symmetry and tails") {
  for (double x : {0.1, 0.5, 1.0, 2.5, 5.0, 8.0}) {
    CHECK(norm_cdf(x) + norm_cdf(-x) == doctest::Approx(1.0).epsilon(1e-15));
  }
  // erfc keeps the lower tail meaningful far beyond where 1 - cdf(-x)
  // would round to zero; total underflow only starts near -38.5.
  CHECK(norm_cdf(-37.0) > 0.0);
  CHECK(norm_cdf(-37.0) < 1e-290);
  CHECK(norm_cdf(40.0) == 1.0);
}

TEST_CASE("quantile matches reference values") {
  CHECK(norm_quantile(0.5) == 0.0);
  CHECK(norm_quantile(0.025) == doctest::Approx(-1.9599639845400545).epsilon(1e-14));
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(norm_quantile(0.3) == doctest::Approx(-0.5244005127080409).epsilon(1e-14));
  CHECK(norm_quantile(1e-12) == doctest::Approx(-7.034483825301131).epsilon(1e-13));
  CHECK(norm_quantile(1.0 - 1e-12) == doctest::Approx(7.0344869100478356).epsilon(1e-13));
}

TEST_CASE("quantile inverts cdf across the central range") {
  for (double x = -6.0; x <= 4.4; x += 0.37) {
    CHECK(norm_quantile(norm_cdf(x)) == doctest::Approx(x).epsilon(1e-12));
  }
  // Far in the upper tail p = 1 - delta itself rounds, costing roughly
  // ulp(1) / pdf(x) of accuracy; the approximation is not the limit there.
  for (double x = 4.4; x <= 6.0; x += 0.37) {
    CHECK(norm_quantile(norm_cdf(x)) == doctest::Approx(x).epsilon(1e-8));
  }
  for (double u : {1e-10, 1e-4, 0.2, 0.8, 1.0 - 1e-4}) {
    CHECK(norm_cdf(norm_quantile(u)) == doctest::Approx(u).epsilon(1e-12));
  }
}

TEST_CASE("quantile rejects arguments outside the open interval") {
  CHECK_THROWS_AS(norm_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(norm_quantile(1.0), std::invalid_argument);
  CHECK_THROWS_AS(norm_quantile(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(norm_quantile(1.5), std::invalid_argument);
}
