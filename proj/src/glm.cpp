#include "bsar/glm.hpp"

#include <cmath>

#include "bsar/errors.hpp"
#include "bsar/normal.hpp"

namespace bsar {

namespace {

constexpr double kPClamp = 1e-12;

enum class Link { probit, logit };

double log_lik(Link link, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const Eigen::VectorXd& beta) {
  const Eigen::VectorXd q = X * beta;
  double ll = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    double p = (link == Link::probit) ? norm_cdf(q(i)) : logistic_cdf(q(i));
    p = std::min(std::max(p, kPClamp), 1.0 - kPClamp);
    ll += (y(i) > 0.5) ? std::log(p) : std::log1p(-p);
  }
  return ll;
}

GlmFit newton_fit(Link link, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  int max_iter, double tol) {
  const int n = int(X.rows()), k = int(X.cols());
  GlmFit fit;
  fit.beta = Eigen::VectorXd::Zero(k);
  double ll = log_lik(link, X, y, fit.beta);

  for (int it = 1; it <= max_iter; ++it) {
    fit.iterations = it;
    const Eigen::VectorXd q = X * fit.beta;
    Eigen::VectorXd score_w(n), info_w(n);
    for (int i = 0; i < n; ++i) {
      if (link == Link::probit) {
        const double phi = norm_pdf(q(i));
        double p = norm_cdf(q(i));
        p = std::min(std::max(p, kPClamp), 1.0 - kPClamp);
        score_w(i) = phi * (y(i) - p) / (p * (1.0 - p));
        info_w(i) = phi * phi / (p * (1.0 - p));
      } else {
        const double p = logistic_cdf(q(i));
        score_w(i) = y(i) - p;
        info_w(i) = p * (1.0 - p);
      }
    }
    const Eigen::VectorXd score = X.transpose() * score_w;
    // converged means a vanishing score, not merely a stalled step
    if (score.cwiseAbs().maxCoeff() < 1e-8 * n) {
      fit.converged = true;
      break;
    }
    const Eigen::MatrixXd info = X.transpose() * info_w.asDiagonal() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) throw SingularDesign("glm information matrix");
    Eigen::VectorXd step = ldlt.solve(score);

    double scale = 1.0;
    Eigen::VectorXd cand;
    double ll_new = -1e300;
    for (int h = 0; h < 30; ++h) {
      cand = fit.beta + scale * step;
      ll_new = log_lik(link, X, y, cand);
      if (ll_new >= ll - 1e-12) break;
      scale *= 0.5;
    }
    const double change = (cand - fit.beta).cwiseAbs().maxCoeff();
    fit.beta = cand;
    ll = ll_new;
    if (change < tol) break;
  }
  fit.log_lik = ll;
  if (fit.beta.norm() > 1e6) fit.converged = false;  // separation
  return fit;
}

}  // namespace

GlmFit fit_probit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_iter,
                  double tol) {
  return newton_fit(Link::probit, X, y, max_iter, tol);
}

GlmFit fit_logit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_iter,
                 double tol) {
  return newton_fit(Link::logit, X, y, max_iter, tol);
}

}  // namespace bsar
