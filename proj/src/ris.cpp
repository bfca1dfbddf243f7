#include "bsar/ris.hpp"

#include <cmath>

#include "bsar/glm.hpp"
#include "bsar/normal.hpp"
#include "bsar/optimize.hpp"

namespace bsar {

namespace {

constexpr double kLogFloor = -745.0;

inline double rho_from_unconstrained(double r) { return -1.0 + 2.0 * norm_cdf(r); }

// Backward recursion over the upper-triangular B = A^{-1}: bounds
// eta_j0 = (T_j - sum_{i>j} b_ji eta_i) / b_jj, draws by inversion.
double recursion_log_prob(const Eigen::VectorXd& t, const Eigen::MatrixXd& b_upper,
                          const Eigen::MatrixXd& uniforms, bool antithetic,
                          bool* degenerate) {
  const int n = int(t.size());
  const int m = int(uniforms.cols());
  const int total = antithetic ? 2 * m : m;

  Eigen::MatrixXd draws(n, total);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(total);
  Eigen::RowVectorXd bounds(total);

  for (int j = n - 1; j >= 0; --j) {
    const int len = n - 1 - j;
    if (len > 0)
      bounds.noalias() = b_upper.row(j).segment(j + 1, len) * draws.middleRows(j + 1, len);
    else
      bounds.setZero();
    const double bjj = b_upper(j, j);
    for (int r = 0; r < total; ++r) {
      const double bound = (t(j) - bounds(r)) / bjj;
      const double lcdf = log_norm_cdf(bound);
      acc(r) += lcdf;
      const double u = (r < m) ? uniforms(j, r) : 1.0 - uniforms(j, r - m);
      const double z = norm_quantile_logp(std::log(u) + lcdf);
      draws(j, r) = std::min(z, bound);
    }
  }

  double lp = logsumexp(acc) - std::log(double(total));
  if (lp < kLogFloor || !std::isfinite(lp)) {
    if (degenerate) *degenerate = true;
    return kLogFloor;
  }
  if (degenerate) *degenerate = false;
  return lp;
}

// Upper-triangular A with A'A = M (so A = chol_lower(M)'), and B = A^{-1}.
Eigen::MatrixXd upper_inverse_factor(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw CholeskyFailure("Sigma^{-1} not positive definite");
  const int n = int(m.rows());
  Eigen::MatrixXd a_upper = llt.matrixL().transpose();
  return a_upper.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));
}

}  // namespace

Eigen::VectorXd sign_vector(const Eigen::VectorXd& y) {
  return Eigen::VectorXd::Ones(y.size()) - 2.0 * y;
}

UpperLimits upper_limits(const Eigen::VectorXd& beta, double rho, const BsarDataset& data) {
  const Eigen::VectorXd z = sign_vector(data.y);
  UpperLimits out;
  out.t = -z.cwiseProduct(lag_solve(*data.W, rho, data.X * beta));
  out.sigma = z.asDiagonal() * error_covariance(*data.W, rho) * z.asDiagonal();
  return out;
}

Eigen::MatrixXd ris_uniforms(int n, const RisConfig& config, Stream& rng) {
  if (config.R < 2 || (config.antithetic && config.R % 2 != 0))
    throw Error("R must be >= 2 and even under antithetic sampling");
  const int m = config.antithetic ? config.R / 2 : config.R;
  Eigen::MatrixXd u(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) u(i, j) = rng.uniform();
  return u;
}

double orthant_log_prob(const Eigen::VectorXd& t, const Eigen::MatrixXd& sigma_inv,
                        const Eigen::MatrixXd& uniforms, bool antithetic,
                        bool* degenerate) {
  return recursion_log_prob(t, upper_inverse_factor(sigma_inv), uniforms, antithetic,
                            degenerate);
}

double ris_log_likelihood(const Eigen::VectorXd& beta, double rho, const BsarDataset& data,
                          const RisConfig& config, Stream rng) {
  const Eigen::VectorXd z = sign_vector(data.y);
  const Eigen::MatrixXd psi =
      Eigen::MatrixXd::Identity(data.n(), data.n()) - rho * data.W->normalized;
  const Eigen::MatrixXd sigma_inv =
      z.asDiagonal() * (psi.transpose() * psi) * z.asDiagonal();
  const Eigen::MatrixXd u = ris_uniforms(data.n(), config, rng);
  const Eigen::VectorXd t = -z.cwiseProduct(lag_solve(*data.W, rho, data.X * beta));
  return orthant_log_prob(t, sigma_inv, u, config.antithetic, nullptr);
}

EstimateResult fit_ris(const BsarDataset& data, const RisConfig& config, Stream rng) {
  const int n = data.n(), k = data.k();
  const Eigen::VectorXd z = sign_vector(data.y);
  const Eigen::MatrixXd& wn = data.W->normalized;
  // Psi'Psi = I - rho (W + W') + rho^2 W'W, assembled in O(n^2) per evaluation
  const Eigen::MatrixXd s1 = wn + wn.transpose();
  const Eigen::MatrixXd s2 = wn.transpose() * wn;
  const Eigen::MatrixXd zz = z * z.transpose();

  GlmFit start = fit_probit(data.X, data.y);
  Eigen::VectorXd beta0 = start.converged ? start.beta : Eigen::VectorXd::Zero(k);

  Eigen::MatrixXd u_common;
  if (config.common_random_numbers) u_common = ris_uniforms(n, config, rng);

  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const double rho_lo = std::max(data.W->rho_domain.lower, -1.0) + 1e-6;
  const double rho_hi = data.W->rho_domain.upper - 1e-6;
  auto neg_log_lik = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd beta = theta.head(k);
    const double rho = rho_from_unconstrained(theta(k));
    if (!(rho > rho_lo && rho < rho_hi)) return 1e300;
    const Eigen::MatrixXd ptp = eye - rho * s1 + rho * rho * s2;
    const Eigen::MatrixXd sigma_inv = zz.cwiseProduct(ptp);
    Eigen::MatrixXd b_upper;
    try {
      b_upper = upper_inverse_factor(sigma_inv);
    } catch (const CholeskyFailure&) {
      return 1e300;
    }
    // Psi^{-1} X beta = (Psi'Psi)^{-1} Psi' X beta, reusing the factor:
    // (Psi'Psi)^{-1} = Z B B' Z.
    const Eigen::VectorXd xb = data.X * beta;
    const Eigen::VectorXd w = xb - rho * (wn.transpose() * xb);
    const Eigen::VectorXd mean =
        z.cwiseProduct(b_upper * (b_upper.transpose() * z.cwiseProduct(w)));
    const Eigen::VectorXd t = -z.cwiseProduct(mean);
    Eigen::MatrixXd u_local;
    const Eigen::MatrixXd& u = config.common_random_numbers
                                   ? u_common
                                   : (u_local = ris_uniforms(n, config, rng));
    return -recursion_log_prob(t, b_upper, u, config.antithetic, nullptr);
  };

  Eigen::VectorXd x0(k + 1);
  x0.head(k) = beta0;
  x0(k) = 0.0;
  Eigen::VectorXd steps(k + 1);
  for (int j = 0; j < k; ++j) steps(j) = std::max(0.1, 0.1 * std::fabs(beta0(j)));
  steps(k) = 0.25;

  SimplexOptions opts;
  opts.max_evals = config.optimizer_budget;
  opts.xtol = 1e-6;
  opts.ftol = 1e-9;
  auto sol = nelder_mead_minimize(neg_log_lik, x0, steps, opts);

  EstimateResult res;
  res.estimator = "ris";
  res.beta = sol.x.head(k);
  res.rho = rho_from_unconstrained(sol.x(k));
  res.converged = sol.converged;
  res.iterations = sol.evals;
  res.log_likelihood = -sol.f;
  return res;
}

}  // namespace bsar
