#include "bsar/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

namespace bsar {

Eigen::VectorXd generate_covariate(int n, Stream& rng) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = 2.0 + 4.0 * rng.normal();
  return x;
}

std::shared_ptr<const WeightMatrix> draw_weights(int n, double d, Stream& rng,
                                                 int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Eigen::MatrixXd points(n, 2);
    for (int i = 0; i < n; ++i) {
      points(i, 0) = rng.uniform();
      points(i, 1) = rng.uniform();
    }
    try {
      return std::make_shared<const WeightMatrix>(build_distance_weights(points, d));
    } catch (const IsolatedUnit&) {
      // redraw the entire point set
    }
  }
  throw IsolatedUnit("no connected point set after " + std::to_string(max_attempts) +
                     " attempts (n=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");
}

BsarDataset generate_bsar(std::shared_ptr<const WeightMatrix> W, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& beta, double rho, Stream& rng) {
  const int n = W->n;
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps(i) = rng.normal();

  BsarDataset data;
  data.y_star = lag_solve(*W, rho, X * beta + eps);
  data.y = (data.y_star.array() > 0.0).cast<double>();  // ties at 0 map to y = 0
  data.X = X;
  data.W = std::move(W);
  data.truth = TrueParams{beta, rho};
  return data;
}

BsarDataset generate_bsar(std::shared_ptr<const WeightMatrix> W, const Eigen::VectorXd& beta,
                          double rho, Stream& rng) {
  const int n = W->n;
  Eigen::MatrixXd X(n, 2);
  X.col(0).setOnes();
  X.col(1) = generate_covariate(n, rng);
  return generate_bsar(std::move(W), X, beta, rho, rng);
}

void write_dataset_csv(const BsarDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path);
  out << "unit,x,y,y_star\n";
  char buf[160];
  for (int i = 0; i < data.n(); ++i) {
    const double ys =
        data.has_latent() ? data.y_star(i) : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%d,%.17g\n", i, data.X(i, 1),
                  int(data.y(i)), ys);
    out << buf;
  }
}

void write_adjacency_list(const WeightMatrix& W, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path);
  for (int i = 0; i < W.n; ++i)
    for (int j = i + 1; j < W.n; ++j)
      if (W.raw(i, j) != 0.0) out << i << ' ' << j << '\n';
}

}  // namespace bsar
