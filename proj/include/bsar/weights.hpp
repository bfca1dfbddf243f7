#pragma once

#include <memory>

#include <Eigen/Dense>

#include "bsar/errors.hpp"

namespace bsar {

// Interval of autocorrelation values keeping (I - rho*W) invertible with
// positive Ord factors: (1/omega_min, 1) for a row-normalized W.
struct RhoDomain {
  double lower = -1.0;
  double upper = 1.0;
  bool contains(double rho, double margin = 0.0) const {
    return rho > lower + margin && rho < upper - margin;
  }
};

// Contiguity structure shared by every estimator. Immutable once built.
struct WeightMatrix {
  Eigen::MatrixXd raw;          // binary, zero diagonal
  Eigen::MatrixXd normalized;   // row-stochastic
  Eigen::VectorXcd eigenvalues; // spectrum of `normalized`
  RhoDomain rho_domain;
  int n = 0;

  // Validates the raw pattern (0/1, zero diagonal, no empty rows),
  // row-normalizes and computes the spectrum.
  static WeightMatrix from_raw(Eigen::MatrixXd raw);
};

// Connects pairs of points closer than `d` (Euclidean). Throws IsolatedUnit
// when some point has no neighbor; the caller redraws the point set.
WeightMatrix build_distance_weights(const Eigen::MatrixXd& points, double d);

// ln|I - rho*W| = sum_i ln(1 - rho*omega_i); complex pairs contribute their
// real part. Throws DomainError when a real factor is non-positive.
double ord_log_det(double rho, const Eigen::VectorXcd& eigenvalues);

// x = (I - rho*W)^{-1} v by dense LU; residual-checked.
Eigen::VectorXd lag_solve(const WeightMatrix& W, double rho, const Eigen::VectorXd& v);

// (I - rho*W)^{-1} as a dense matrix.
Eigen::MatrixXd lag_inverse(const WeightMatrix& W, double rho);

// var(e) = sigma_eps^2 [(I-rho W)'(I-rho W)]^{-1} with sigma_eps^2 = 1.
Eigen::MatrixXd error_covariance(const WeightMatrix& W, double rho);

// Square roots of the covariance diagonal.
Eigen::VectorXd std_devs(const Eigen::MatrixXd& sigma);

// q = D^{-1}(I - rho W)^{-1} X beta.
Eigen::VectorXd standardized_index(const WeightMatrix& W, double rho,
                                   const Eigen::MatrixXd& X, const Eigen::VectorXd& beta);

}  // namespace bsar
