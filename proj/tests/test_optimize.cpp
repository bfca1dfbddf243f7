#include <doctest.h>

#include <cmath>

#include "bsar/optimize.hpp"

using namespace bsar;

TEST_SUITE_BEGIN("optimize");

TEST_CASE("brent finds interior minimum") {
  auto r = brent_minimize([](double x) { return (x - 1.3) * (x - 1.3) + 2.0; }, -10, 10);
  CHECK(r.converged);
  CHECK(r.x == doctest::Approx(1.3).epsilon(1e-7));
  CHECK(r.f == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("brent on a non-quadratic function") {
  auto r = brent_maximize([](double x) { return std::sin(x) - 0.1 * x * x; }, -2, 3);
  CHECK(r.converged);
  // stationary point of sin(x) - 0.1 x^2
  CHECK(std::cos(r.x) - 0.2 * r.x == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("nelder-mead on rosenbrock") {
  auto f = [](const Eigen::VectorXd& x) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    return a * a + 100.0 * b * b;
  };
  Eigen::VectorXd x0(2), steps(2);
  x0 << -1.2, 1.0;
  steps << 0.5, 0.5;
  SimplexOptions opts;
  opts.max_evals = 2000;
  opts.xtol = 1e-8;
  opts.ftol = 1e-12;
  auto r = nelder_mead_minimize(f, x0, steps, opts);
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("nelder-mead respects the evaluation budget") {
  int count = 0;
  auto f = [&](const Eigen::VectorXd& x) {
    ++count;
    return x.squaredNorm();
  };
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 5.0);
  Eigen::VectorXd steps = Eigen::VectorXd::Constant(3, 1.0);
  SimplexOptions opts;
  opts.max_evals = 50;
  nelder_mead_minimize(f, x0, steps, opts);
  CHECK(count <= 50 + 4);  // at most one shrink pass beyond the cap
}

TEST_SUITE_END();
