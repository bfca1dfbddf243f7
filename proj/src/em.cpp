#include "bsar/em.hpp"

#include <cmath>

#include "bsar/glm.hpp"
#include "bsar/normal.hpp"
#include "bsar/optimize.hpp"

namespace bsar {

namespace {

constexpr double kProbClamp = 1e-10;

inline double clamp_prob(double p) {
  return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

inline double rho_from_unconstrained(double r) { return -1.0 + 2.0 * norm_cdf(r); }

}  // namespace

Eigen::VectorXd e_step(const Eigen::VectorXd& beta, double rho, const BsarDataset& data) {
  const Eigen::MatrixXd a = lag_inverse(*data.W, rho);
  const Eigen::VectorXd mu = a * (data.X * beta);
  const Eigen::VectorXd d = a.rowwise().norm();  // sqrt(diag(A A'))
  Eigen::VectorXd out(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const double q = mu(i) / d(i);
    const double cdf = clamp_prob(norm_cdf(q));
    const double pdf = norm_pdf(q);
    const double corr = (data.y(i) > 0.5) ? pdf / cdf : -pdf / (1.0 - cdf);
    out(i) = mu(i) + d(i) * corr;
  }
  return out;
}

MStepResult m_step(const Eigen::VectorXd& y_star, const BsarDataset& data,
                   int optimizer_budget) {
  const Eigen::MatrixXd& X = data.X;
  const Eigen::VectorXd wy = data.W->normalized * y_star;

  // beta profiled: beta(rho) = (X'X)^{-1} X'(y* - rho W y*), so the residual
  // sum of squares is quadratic in rho.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::VectorXd b0 = qr.solve(y_star);
  const Eigen::VectorXd b1 = qr.solve(wy);
  const Eigen::VectorXd r0 = y_star - X * b0;
  const Eigen::VectorXd r1 = wy - X * b1;
  const double c0 = r0.squaredNorm(), c1 = r0.dot(r1), c2 = r1.squaredNorm();

  const auto& spectrum = data.W->eigenvalues;
  auto objective = [&](double r) {
    const double rho = rho_from_unconstrained(r);
    return -0.5 * (c0 - 2.0 * c1 * rho + c2 * rho * rho) + ord_log_det(rho, spectrum);
  };

  // search range: image (-1,1) of the transform, kept a margin inside the
  // rho domain so the Ord factors stay positive
  const double rho_lo = std::max(data.W->rho_domain.lower, -1.0) + 1e-6;
  const double rho_hi = data.W->rho_domain.upper - 1e-6;
  const double lo = norm_quantile(0.5 * (rho_lo + 1.0));
  const double hi = norm_quantile(0.5 * (rho_hi + 1.0));

  // coarse scan, then Brent inside the best bracket
  const int grid = 33;
  int best = 0;
  double best_f = -1e300;
  for (int g = 0; g < grid; ++g) {
    const double r = lo + (hi - lo) * g / (grid - 1);
    const double f = objective(r);
    if (f > best_f) {
      best_f = f;
      best = g;
    }
  }
  const double step = (hi - lo) / (grid - 1);
  const double a = lo + step * std::max(0, best - 1);
  const double b = lo + step * std::min(grid - 1, best + 1);
  auto opt = brent_maximize(objective, a, b, 1e-10, std::max(optimizer_budget - grid, 16));

  MStepResult out;
  out.rho = rho_from_unconstrained(opt.x);
  out.beta = b0 - out.rho * b1;
  out.evals = opt.evals + grid;
  return out;
}

EstimateResult fit_em(const BsarDataset& data, const EmConfig& config) {
  EstimateResult res;
  res.estimator = "em";
  Eigen::VectorXd beta;
  if (config.beta_start.size() == data.k()) {
    beta = config.beta_start;
  } else {
    // the alternation converges linearly and slowly on steep designs, so it
    // starts from the non-spatial probit fit rather than from zero
    const GlmFit probit = fit_probit(data.X, data.y);
    beta = probit.converged ? probit.beta : Eigen::VectorXd::Zero(data.k());
  }
  double rho = config.rho_start;

  for (int loop = 1; loop <= config.max_outer_loops; ++loop) {
    res.iterations = loop;
    const Eigen::VectorXd y_star = e_step(beta, rho, data);
    const MStepResult m = m_step(y_star, data, config.optimizer_budget);
    const double change =
        std::max((m.beta - beta).cwiseAbs().maxCoeff(), std::fabs(m.rho - rho));
    beta = m.beta;
    rho = m.rho;
    if (change < config.outer_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.beta = beta;
  res.rho = rho;
  // data without outcome variation has no finite maximizer; the alternation
  // can stall on the separation plateau, which is not convergence
  const double ones = data.y.sum();
  if (ones < 0.5 || ones > data.n() - 0.5) res.converged = false;
  return res;
}

}  // namespace bsar
