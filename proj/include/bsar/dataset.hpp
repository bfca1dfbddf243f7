#pragma once

#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "bsar/rng.hpp"
#include "bsar/weights.hpp"

namespace bsar {

struct TrueParams {
  Eigen::VectorXd beta;
  double rho = 0.0;
};

struct BsarDataset {
  Eigen::MatrixXd X;       // column 0 is the intercept
  Eigen::VectorXd y;       // 0/1
  Eigen::VectorXd y_star;  // latent values when generated; size 0 otherwise
  std::shared_ptr<const WeightMatrix> W;
  std::optional<TrueParams> truth;

  int n() const { return int(X.rows()); }
  int k() const { return int(X.cols()); }
  bool has_latent() const { return y_star.size() == X.rows(); }
};

// Covariate draws, N(mean 2, sd 4).
Eigen::VectorXd generate_covariate(int n, Stream& rng);

// Uniform points on the unit square, connected under threshold d; the whole
// point set is redrawn while some unit is isolated (at most `max_attempts`).
std::shared_ptr<const WeightMatrix> draw_weights(int n, double d, Stream& rng,
                                                 int max_attempts = 1000);

// Latent y* = (I - rho W)^{-1}(X beta + eps), eps ~ N(0, I); y = 1{y* > 0}.
BsarDataset generate_bsar(std::shared_ptr<const WeightMatrix> W, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& beta, double rho, Stream& rng);

// Same, drawing the covariate column from the stream first.
BsarDataset generate_bsar(std::shared_ptr<const WeightMatrix> W, const Eigen::VectorXd& beta,
                          double rho, Stream& rng);

// Cross-implementation dump: unit,x,y,y_star rows plus an "i j" edge list.
void write_dataset_csv(const BsarDataset& data, const std::string& path);
void write_adjacency_list(const WeightMatrix& W, const std::string& path);

}  // namespace bsar
