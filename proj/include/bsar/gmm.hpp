#pragma once

#include <Eigen/Dense>

#include "bsar/dataset.hpp"
#include "bsar/estimate.hpp"

namespace bsar {

struct GmmConfig {
  int optimizer_budget = 1000;
  double rho_margin = 1e-4;  // box margin inside the rho domain (moment search)
};

// Instrument columns: intercept, x, Wx, W^2 x, W^3 x for each non-intercept
// covariate column. Throws RankDeficientInstruments when collinear.
Eigen::MatrixXd build_instruments(const Eigen::MatrixXd& X, const Eigen::MatrixXd& w_normalized);
Eigen::MatrixXd build_instruments(const Eigen::MatrixXd& X, const WeightMatrix& W);

// Probit generalized residuals phi(q)[y - Phi(q)] / (Phi(q)[1 - Phi(q)])
// at q = D^{-1}(I - rho W)^{-1} X beta.
Eigen::VectorXd generalized_residuals_probit(const Eigen::VectorXd& beta, double rho,
                                             const BsarDataset& data);

// e~' Z M Z' e~ for a positive definite weighting M.
double gmm_objective(const Eigen::VectorXd& beta, double rho, const BsarDataset& data,
                     const Eigen::MatrixXd& instruments, const Eigen::MatrixXd& weighting);

// d sigma_e / d rho, elementwise; exact for asymmetric (I - rho W).
Eigen::VectorXd sigma_e_rho_derivative(const WeightMatrix& W, double rho);

struct KmGradients {
  Eigen::MatrixXd beta;  // n x k, rows P(1-P) t_i
  Eigen::VectorXd rho;   // n, P(1-P) dq_i/drho
};

// Logistic-link gradients of P at (beta, rho), using the asymmetric-safe
// derivative of the error standard deviations.
KmGradients km_gradients(const Eigen::VectorXd& beta, double rho, const BsarDataset& data);

// Moment minimization with identity weighting, rho box-constrained.
EstimateResult fit_gmm_ps(const BsarDataset& data, const GmmConfig& config = {});

// One-shot linearization around (logit fit, rho = 0) with projection
// weighting (Z'Z)^{-1}; beta reported on the probit scale (sqrt(3)/pi),
// rho unscaled and unconstrained.
EstimateResult fit_gmm_linearized(const BsarDataset& data, const GmmConfig& config = {});

}  // namespace bsar
