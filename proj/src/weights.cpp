#include "bsar/weights.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace bsar {

namespace {

Eigen::VectorXcd spectrum_of_normalized(const Eigen::MatrixXd& raw,
                                        const Eigen::MatrixXd& normalized) {
  const int n = int(raw.rows());
  if (raw.isApprox(raw.transpose())) {
    // W = R^{-1} A with A symmetric is similar to R^{-1/2} A R^{-1/2},
    // so the spectrum is real and a symmetric solver applies.
    const Eigen::VectorXd dinv_sqrt = raw.rowwise().sum().cwiseInverse().cwiseSqrt();
    const Eigen::MatrixXd s = dinv_sqrt.asDiagonal() * raw * dinv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cast<std::complex<double>>();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(normalized, false);
  return es.eigenvalues();
}

RhoDomain domain_from_spectrum(const Eigen::VectorXcd& eigenvalues) {
  double min_real = std::numeric_limits<double>::infinity();
  for (int i = 0; i < eigenvalues.size(); ++i) {
    const auto w = eigenvalues(i);
    if (std::fabs(w.imag()) <= 1e-8 * (1.0 + std::fabs(w.real())))
      min_real = std::min(min_real, w.real());
  }
  RhoDomain dom;
  dom.upper = 1.0;
  dom.lower = (min_real < 0.0) ? 1.0 / min_real : -1e6;
  return dom;
}

}  // namespace

WeightMatrix WeightMatrix::from_raw(Eigen::MatrixXd raw) {
  const int n = int(raw.rows());
  if (raw.cols() != n || n < 2) throw Error("weight matrix must be square, n >= 2");
  for (int i = 0; i < n; ++i) {
    if (raw(i, i) != 0.0) throw Error("weight matrix diagonal must be zero");
    bool any = false;
    for (int j = 0; j < n; ++j) {
      const double w = raw(i, j);
      if (w != 0.0 && w != 1.0) throw Error("raw weights must be 0/1");
      any = any || w != 0.0;
    }
    if (!any) throw IsolatedUnit("row " + std::to_string(i) + " has no neighbors");
  }

  WeightMatrix out;
  out.n = n;
  out.normalized = raw.array().colwise() / raw.rowwise().sum().array();
  out.eigenvalues = spectrum_of_normalized(raw, out.normalized);
  out.raw = std::move(raw);
  out.rho_domain = domain_from_spectrum(out.eigenvalues);

  double max_real = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) max_real = std::max(max_real, out.eigenvalues(i).real());
  if (std::fabs(max_real - 1.0) > 1e-8)
    throw Error("row-stochastic spectrum check failed");
  return out;
}

WeightMatrix build_distance_weights(const Eigen::MatrixXd& points, double d) {
  const int n = int(points.rows());
  if (n < 2) throw Error("need at least two points");
  if (!(d > 0.0) || !(d < std::sqrt(2.0))) throw Error("threshold d must lie in (0, sqrt(2))");
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, n);
  const double d2 = d * d;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dist2 = (points.row(i) - points.row(j)).squaredNorm();
      if (dist2 < d2) raw(i, j) = raw(j, i) = 1.0;
    }
  return WeightMatrix::from_raw(std::move(raw));
}

double ord_log_det(double rho, const Eigen::VectorXcd& eigenvalues) {
  double acc = 0.0;
  for (int i = 0; i < eigenvalues.size(); ++i) {
    const auto w = eigenvalues(i);
    if (std::fabs(w.imag()) <= 1e-12 * (1.0 + std::fabs(w.real()))) {
      const double t = 1.0 - rho * w.real();
      if (t <= 0.0)
        throw DomainError("non-positive Ord factor at rho=" + std::to_string(rho));
      acc += std::log(t);
    } else {
      acc += 0.5 * std::log(std::norm(std::complex<double>(1.0, 0.0) - rho * w));
    }
  }
  return acc;
}

Eigen::VectorXd lag_solve(const WeightMatrix& W, double rho, const Eigen::VectorXd& v) {
  const Eigen::MatrixXd psi =
      Eigen::MatrixXd::Identity(W.n, W.n) - rho * W.normalized;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(psi);
  Eigen::VectorXd x = lu.solve(v);
  const double tol = 1e-10 * std::max(v.norm(), 1e-300);
  if (!x.allFinite() || (psi * x - v).norm() >= tol)
    throw SingularSystem("lag solve failed at rho=" + std::to_string(rho));
  return x;
}

Eigen::MatrixXd lag_inverse(const WeightMatrix& W, double rho) {
  const Eigen::MatrixXd psi =
      Eigen::MatrixXd::Identity(W.n, W.n) - rho * W.normalized;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(psi);
  Eigen::MatrixXd inv = lu.inverse();
  if (!inv.allFinite()) throw SingularSystem("lag inverse failed at rho=" + std::to_string(rho));
  return inv;
}

Eigen::MatrixXd error_covariance(const WeightMatrix& W, double rho) {
  const Eigen::MatrixXd a = lag_inverse(W, rho);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(W.n, W.n);
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(a);  // A A'
  sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose();
  return sigma;
}

Eigen::VectorXd std_devs(const Eigen::MatrixXd& sigma) {
  Eigen::VectorXd d = sigma.diagonal();
  if ((d.array() <= 0.0).any()) throw NonPositiveVariance("covariance diagonal not positive");
  return d.cwiseSqrt();
}

Eigen::VectorXd standardized_index(const WeightMatrix& W, double rho,
                                   const Eigen::MatrixXd& X, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd mean = lag_solve(W, rho, X * beta);
  const Eigen::VectorXd d = std_devs(error_covariance(W, rho));
  return mean.cwiseQuotient(d);
}

}  // namespace bsar
