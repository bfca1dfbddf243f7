#pragma once

#include <Eigen/Dense>

#include "bsar/dataset.hpp"
#include "bsar/estimate.hpp"

namespace bsar {

struct EmConfig {
  int max_outer_loops = 1000;
  double outer_tolerance = 1e-4;  // max-abs change of (beta, rho)
  int optimizer_budget = 1000;    // objective evaluations per M-step
  Eigen::VectorXd beta_start;     // empty -> non-spatial probit fit
  double rho_start = 0.0;
};

// E[Y* | Y = y] at (beta, rho): reduced-form mean plus the generalized-
// residual correction D * phi(q)[y - Phi(q)] / (Phi(q)[1 - Phi(q)]).
Eigen::VectorXd e_step(const Eigen::VectorXd& beta, double rho, const BsarDataset& data);

struct MStepResult {
  Eigen::VectorXd beta;
  double rho = 0.0;
  int evals = 0;
};

// Maximizes -1/2 ||(I-rho W)y* - X beta||^2 + sum ln(1 - rho w_i) with beta
// profiled out by least squares and rho searched through rho = -1 + 2 Phi(r).
MStepResult m_step(const Eigen::VectorXd& y_star, const BsarDataset& data,
                   int optimizer_budget = 1000);

EstimateResult fit_em(const BsarDataset& data, const EmConfig& config = {});

}  // namespace bsar
