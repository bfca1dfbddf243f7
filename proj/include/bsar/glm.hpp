#pragma once

#include <Eigen/Dense>

namespace bsar {

struct GlmFit {
  Eigen::VectorXd beta;
  double log_lik = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Newton-Raphson probit/logit with step halving. Separated data shows up as
// converged = false with a large-norm beta.
GlmFit fit_probit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  int max_iter = 100, double tol = 1e-10);
GlmFit fit_logit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 int max_iter = 100, double tol = 1e-10);

}  // namespace bsar
