#include "bsar/gmm.hpp"

#include <cmath>

#include "bsar/glm.hpp"
#include "bsar/normal.hpp"
#include "bsar/optimize.hpp"

namespace bsar {

namespace {

constexpr double kProbClamp = 1e-10;
constexpr double kScaleLogitToProbit = 0.5513288954217920;  // sqrt(3)/pi

inline double clamp_prob(double p) {
  return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

}  // namespace

Eigen::MatrixXd build_instruments(const Eigen::MatrixXd& X,
                                  const Eigen::MatrixXd& w_normalized) {
  const int n = int(X.rows()), k = int(X.cols());
  const int cols = 1 + 4 * (k - 1);
  Eigen::MatrixXd z(n, cols);
  z.col(0).setOnes();
  int c = 1;
  for (int j = 1; j < k; ++j) {
    Eigen::VectorXd v = X.col(j);
    z.col(c++) = v;
    for (int p = 0; p < 3; ++p) {
      v = w_normalized * v;
      z.col(c++) = v;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  qr.setThreshold(1e-9);
  if (qr.rank() < cols) throw RankDeficientInstruments("instrument matrix rank " +
                                                       std::to_string(qr.rank()) + " < " +
                                                       std::to_string(cols));
  return z;
}

Eigen::MatrixXd build_instruments(const Eigen::MatrixXd& X, const WeightMatrix& W) {
  return build_instruments(X, W.normalized);
}

Eigen::VectorXd generalized_residuals_probit(const Eigen::VectorXd& beta, double rho,
                                             const BsarDataset& data) {
  const Eigen::MatrixXd a = lag_inverse(*data.W, rho);
  const Eigen::VectorXd mu = a * (data.X * beta);
  const Eigen::VectorXd d = a.rowwise().norm();
  Eigen::VectorXd e(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const double q = mu(i) / d(i);
    const double cdf = clamp_prob(norm_cdf(q));
    e(i) = norm_pdf(q) * (data.y(i) - cdf) / (cdf * (1.0 - cdf));
  }
  return e;
}

double gmm_objective(const Eigen::VectorXd& beta, double rho, const BsarDataset& data,
                     const Eigen::MatrixXd& instruments, const Eigen::MatrixXd& weighting) {
  const Eigen::VectorXd g =
      instruments.transpose() * generalized_residuals_probit(beta, rho, data);
  return g.dot(weighting * g);
}

Eigen::VectorXd sigma_e_rho_derivative(const WeightMatrix& W, double rho) {
  // sigma_i = sqrt([ (Psi'Psi)^{-1} ]_ii); with S = (Psi'Psi)^{-1},
  // dS/drho = S (W'Psi + Psi'W) S, whose diagonal is 2 diag(S Psi' W S).
  const Eigen::MatrixXd s = error_covariance(W, rho);
  const Eigen::MatrixXd psi_t =
      Eigen::MatrixXd::Identity(W.n, W.n) - rho * W.normalized.transpose();
  const Eigen::MatrixXd k = psi_t * (W.normalized * s);
  const Eigen::VectorXd diag = (s.cwiseProduct(k.transpose())).rowwise().sum();
  const Eigen::VectorXd sigma = s.diagonal().cwiseSqrt();
  return diag.cwiseQuotient(sigma);
}

KmGradients km_gradients(const Eigen::VectorXd& beta, double rho, const BsarDataset& data) {
  const int n = data.n(), k = data.k();
  const Eigen::MatrixXd a = lag_inverse(*data.W, rho);
  const Eigen::VectorXd mu = a * (data.X * beta);  // Psi^{-1} X beta
  const Eigen::VectorXd sigma = a.rowwise().norm();
  const Eigen::VectorXd q = mu.cwiseQuotient(sigma);

  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    const double p = logistic_cdf(q(i));
    w(i) = p * (1.0 - p);
  }

  KmGradients out;
  // t_i rows of D^{-1} Psi^{-1} X
  out.beta = sigma.cwiseInverse().asDiagonal() * (a * data.X);
  out.beta.array().colwise() *= w.array();

  const Eigen::VectorXd h = a * (data.W->normalized * mu);  // Psi^{-1} W Psi^{-1} X beta
  const Eigen::VectorXd dsigma = sigma_e_rho_derivative(*data.W, rho);
  out.rho =
      w.cwiseProduct(h.cwiseQuotient(sigma) - q.cwiseProduct(dsigma.cwiseQuotient(sigma)));
  return out;
}

EstimateResult fit_gmm_ps(const BsarDataset& data, const GmmConfig& config) {
  const Eigen::MatrixXd z = build_instruments(data.X, *data.W);
  const int k = data.k();
  const RhoDomain dom = data.W->rho_domain;
  const double lo = dom.lower + config.rho_margin, hi = dom.upper - config.rho_margin;

  auto objective = [&](const Eigen::VectorXd& theta) {
    const double rho = theta(k);
    if (!(rho > lo && rho < hi)) return 1e300;
    const Eigen::VectorXd g =
        z.transpose() * generalized_residuals_probit(theta.head(k), rho, data);
    return double(g.squaredNorm());  // M = I
  };

  SimplexOptions opts;
  opts.max_evals = config.optimizer_budget;
  opts.xtol = 1e-7;
  opts.ftol = 1e-12;

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(k + 1);
  Eigen::VectorXd steps = Eigen::VectorXd::Constant(k + 1, 0.5);
  steps(k) = 0.2;
  auto sol = nelder_mead_minimize(objective, x0, steps, opts);

  // restart from the best of a coarse rho grid around the first solution
  double best_rho = sol.x(k);
  double best_f = sol.f;
  for (int g = 0; g < 5; ++g) {
    Eigen::VectorXd probe = sol.x;
    probe(k) = std::max(lo + 1e-3, -0.9) + g * (std::min(hi - 1e-3, 0.9) -
                                                std::max(lo + 1e-3, -0.9)) / 4.0;
    const double f = objective(probe);
    if (f < best_f) {
      best_f = f;
      best_rho = probe(k);
    }
  }
  Eigen::VectorXd x1 = sol.x;
  x1(k) = best_rho;
  auto sol2 = nelder_mead_minimize(objective, x1, (steps * 0.5).eval(), opts);
  if (sol2.f < sol.f) sol = sol2;

  EstimateResult res;
  res.estimator = "gmm";
  res.beta = sol.x.head(k);
  res.rho = sol.x(k);
  res.converged = sol.converged;
  res.iterations = sol.evals;
  res.objective = sol.f;
  return res;
}

EstimateResult fit_gmm_linearized(const BsarDataset& data, const GmmConfig&) {
  const int n = data.n(), k = data.k();
  EstimateResult res;
  res.estimator = "gmmlin";
  res.iterations = 1;

  if (data.y.sum() < 0.5 || data.y.sum() > n - 0.5) {
    // no outcome variation: the second stage is degenerate
    res.beta = Eigen::VectorXd::Constant(k, kNaN);
    return res;
  }

  const Eigen::MatrixXd z = build_instruments(data.X, *data.W);

  // linearization point: non-spatial logit fit, rho = 0
  const GlmFit logit0 = fit_logit(data.X, data.y);
  const Eigen::VectorXd beta0 = logit0.beta;
  const Eigen::VectorXd q0 = data.X * beta0;

  Eigen::VectorXd p(n), w(n);
  for (int i = 0; i < n; ++i) {
    p(i) = logistic_cdf(q0(i));
    w(i) = p(i) * (1.0 - p(i));
  }
  const Eigen::VectorXd e0 = data.y - p;  // logistic generalized residual

  Eigen::MatrixXd grads(n, k + 1);  // [G_beta, G_rho] at (beta0, 0)
  grads.leftCols(k) = w.asDiagonal() * data.X;
  grads.col(k) = w.cwiseProduct(data.W->normalized * q0);

  // first stage: project the gradients on the instruments
  Eigen::LLT<Eigen::MatrixXd> ztz(z.transpose() * z);
  if (ztz.info() != Eigen::Success) throw RankDeficientInstruments("Z'Z not positive definite");
  const Eigen::MatrixXd fitted = z * ztz.solve(z.transpose() * grads);

  // second stage: (e0 + G_beta beta0) on the fitted gradients
  const Eigen::VectorXd response = e0 + grads.leftCols(k) * beta0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fitted);
  qr.setThreshold(1e-10);
  if (qr.rank() == 0) throw SingularSecondStage("fitted gradient matrix is zero");
  const Eigen::VectorXd theta = qr.solve(response);

  res.beta = theta.head(k) * kScaleLogitToProbit;
  res.rho = theta(k);  // unaffected by the scaling, and unconstrained
  // separation deflates the gradients and can alias second-stage columns;
  // the pivoted solve still returns finite coefficients, flagged here
  res.converged = logit0.converged && qr.rank() == k + 1;
  return res;
}

}  // namespace bsar
