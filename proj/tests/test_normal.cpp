#include <doctest.h>

#include <cmath>

#include "bsar/normal.hpp"

using namespace bsar;

TEST_SUITE_BEGIN("normal");

TEST_CASE("quantile hits tabulated points") {
  CHECK(norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(norm_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(norm_quantile(0.841344746068543) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cdf/quantile round trip") {
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    CHECK(norm_quantile(norm_cdf(x)) == doctest::Approx(x).epsilon(1e-10));
  }
}

TEST_CASE("log cdf agrees with direct evaluation in the overlap region") {
  for (double x = -19.0; x <= 6.0; x += 0.83) {
    CHECK(log_norm_cdf(x) == doctest::Approx(std::log(norm_cdf(x))).epsilon(1e-12));
  }
}

TEST_CASE("log cdf far tail is continuous across the branch switch") {
  const double a = log_norm_cdf(-19.999999);
  const double b = log_norm_cdf(-20.000001);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
  // deep tail round trip through the log-quantile
  for (double x = -35.0; x <= -8.0; x += 1.7) {
    CHECK(norm_quantile_logp(log_norm_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
  }
}

TEST_CASE("logsumexp handles widely spread terms") {
  Eigen::VectorXd v(3);
  v << -1000.0, -1001.0, -1002.0;
  const double expect = -1000.0 + std::log(1.0 + std::exp(-1.0) + std::exp(-2.0));
  CHECK(logsumexp(v) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_SUITE_END();
