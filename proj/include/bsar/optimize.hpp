#pragma once

#include <functional>

#include <Eigen/Dense>

namespace bsar {

struct ScalarOptResult {
  double x = 0.0;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

// Brent's derivative-free minimizer on [a, b].
ScalarOptResult brent_minimize(const std::function<double(double)>& f, double a,
                               double b, double xtol = 1e-9, int max_evals = 1000);

inline ScalarOptResult brent_maximize(const std::function<double(double)>& f, double a,
                                      double b, double xtol = 1e-9, int max_evals = 1000) {
  auto r = brent_minimize([&](double x) { return -f(x); }, a, b, xtol, max_evals);
  r.f = -r.f;
  return r;
}

struct SimplexOptions {
  int max_evals = 1000;
  double xtol = 1e-7;   // simplex diameter
  double ftol = 1e-10;  // spread of simplex values
};

struct SimplexResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

// Nelder-Mead downhill simplex; `steps` sets the initial vertex offsets.
SimplexResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                                   const SimplexOptions& opts = {});

}  // namespace bsar
