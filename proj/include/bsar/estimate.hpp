#pragma once

#include <limits>
#include <string>

#include <Eigen/Dense>

namespace bsar {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct EstimateResult {
  std::string estimator;
  Eigen::VectorXd beta;  // empty when the fit never produced one
  double rho = kNaN;
  bool converged = false;
  int iterations = 0;  // outer loops, sweeps, or objective evaluations
  double wall_seconds = 0.0;

  // estimator-specific diagnostics
  double accept_rate = kNaN;      // Gibbs
  Eigen::VectorXd beta_sd;        // Gibbs posterior sds
  double rho_sd = kNaN;           // Gibbs posterior sd
  double log_likelihood = kNaN;   // RIS
  double objective = kNaN;        // GMM

  double beta0() const { return beta.size() > 0 ? beta(0) : kNaN; }
  double beta1() const { return beta.size() > 1 ? beta(1) : kNaN; }
};

}  // namespace bsar
