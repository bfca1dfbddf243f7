#pragma once

#include <Eigen/Dense>

#include "bsar/dataset.hpp"
#include "bsar/estimate.hpp"
#include "bsar/rng.hpp"

namespace bsar {

struct RisConfig {
  int R = 1000;           // importance draws (total, counting antithetic mirrors)
  bool antithetic = true; // pair u with 1-u
  int optimizer_budget = 1000;
  bool common_random_numbers = true;  // reuse one uniform set across evaluations
};

// Diagonal of Z: +1 where y = 0, -1 where y = 1.
Eigen::VectorXd sign_vector(const Eigen::VectorXd& y);

struct UpperLimits {
  Eigen::VectorXd t;       // T = -Z (I - rho W)^{-1} X beta
  Eigen::MatrixXd sigma;   // Z var(e) Z'
};
UpperLimits upper_limits(const Eigen::VectorXd& beta, double rho, const BsarDataset& data);

// Uniform deviates backing one likelihood evaluation: n rows, R columns
// (R/2 when antithetic; mirrored columns are implied).
Eigen::MatrixXd ris_uniforms(int n, const RisConfig& config, Stream& rng);

// ln Phi_n(T; 0, Sigma) by recursive importance sampling through the upper
// Cholesky factor of Sigma^{-1}; draws are truncated standard normals taken
// by inversion. Underflow is floored at -745 and flagged.
double orthant_log_prob(const Eigen::VectorXd& t, const Eigen::MatrixXd& sigma_inv,
                        const Eigen::MatrixXd& uniforms, bool antithetic,
                        bool* degenerate = nullptr);

// Simulated BSAR probit log-likelihood at (beta, rho). Fresh uniforms are
// drawn from `rng`; the stream is taken by value so repeated calls with the
// same stream state are bit-identical.
double ris_log_likelihood(const Eigen::VectorXd& beta, double rho, const BsarDataset& data,
                          const RisConfig& config, Stream rng);

EstimateResult fit_ris(const BsarDataset& data, const RisConfig& config, Stream rng);

}  // namespace bsar
