#include <doctest.h>

#include <chrono>
#include <cmath>

#include "bsar/gmm.hpp"
#include "bsar/normal.hpp"

using namespace bsar;

namespace {

std::shared_ptr<const WeightMatrix> test_weights(int n, double d, std::uint64_t seed) {
  Stream rng(seed);
  return draw_weights(n, d, rng);
}

// symmetric row-stochastic W: ring with two neighbors per unit
std::shared_ptr<const WeightMatrix> ring_weights(int n) {
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    raw(i, (i + 1) % n) = 1.0;
    raw(i, (i + n - 1) % n) = 1.0;
  }
  return std::make_shared<const WeightMatrix>(WeightMatrix::from_raw(raw));
}

BsarDataset random_dataset(int n, double d, double rho, std::uint64_t seed) {
  Stream rng(seed);
  auto W = draw_weights(n, d, rng);
  return generate_bsar(W, Eigen::Vector2d{4.0, -2.0}, rho, rng);
}

}  // namespace

TEST_SUITE_BEGIN("gmm");

TEST_CASE("instruments match iterated multiplication, zero W flagged") {
  Stream rng(50);
  auto W = draw_weights(20, 0.35, rng);
  Eigen::MatrixXd X(20, 2);
  X.col(0).setOnes();
  X.col(1) = generate_covariate(20, rng);

  const Eigen::MatrixXd z = build_instruments(X, *W);
  REQUIRE(z.cols() == 5);
  const Eigen::MatrixXd& wn = W->normalized;
  CHECK((z.col(0) - Eigen::VectorXd::Ones(20)).norm() == 0.0);
  CHECK((z.col(1) - X.col(1)).norm() == 0.0);
  CHECK((z.col(2) - wn * X.col(1)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((z.col(3) - wn * (wn * X.col(1))).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((z.col(4) - wn * (wn * (wn * X.col(1)))).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(build_instruments(X, Eigen::MatrixXd::Zero(20, 20)),
                  RankDeficientInstruments);
  Eigen::MatrixXd Xc = X;
  Xc.col(1).setConstant(3.0);  // W x = x for a constant column
  CHECK_THROWS_AS(build_instruments(Xc, *W), RankDeficientInstruments);
}

TEST_CASE("generalized residuals at q = 0") {
  BsarDataset data;
  data.W = test_weights(4, 0.9, 51);
  data.X.resize(4, 2);
  data.X.col(0).setOnes();
  data.X.col(1).setZero();
  data.y = Eigen::VectorXd::Ones(4);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(2);

  const Eigen::VectorXd up = generalized_residuals_probit(beta, 0.0, data);
  CHECK(up(0) == doctest::Approx(norm_pdf(0.0) * 0.5 / 0.25).epsilon(1e-12));
  CHECK(up(0) == doctest::Approx(0.7978845608).epsilon(1e-8));

  data.y.setZero();
  const Eigen::VectorXd dn = generalized_residuals_probit(beta, 0.0, data);
  CHECK(dn(0) == doctest::Approx(-0.7978845608).epsilon(1e-8));
}

TEST_CASE("continuous outcomes equal to Phi(q) zero the residuals and objective") {
  BsarDataset data = random_dataset(15, 0.4, 0.3, 52);
  Eigen::VectorXd beta(2);
  beta << 1.0, -0.5;
  const double rho = 0.3;
  const Eigen::VectorXd q = standardized_index(*data.W, rho, data.X, beta);
  for (int i = 0; i < data.n(); ++i) data.y(i) = norm_cdf(q(i));  // hypothetical
  const Eigen::VectorXd e = generalized_residuals_probit(beta, rho, data);
  CHECK(e.cwiseAbs().maxCoeff() < 1e-9);
  const Eigen::MatrixXd z = build_instruments(data.X, *data.W);
  CHECK(gmm_objective(beta, rho, data, z, Eigen::MatrixXd::Identity(5, 5)) < 1e-18);
}

TEST_CASE("identity-weighted objective equals the moment norm") {
  BsarDataset data = random_dataset(18, 0.4, 0.2, 53);
  Eigen::VectorXd beta(2);
  beta << 2.0, -1.0;
  const Eigen::MatrixXd z = build_instruments(data.X, *data.W);
  const Eigen::VectorXd e = generalized_residuals_probit(beta, 0.2, data);
  const double obj = gmm_objective(beta, 0.2, data, z, Eigen::MatrixXd::Identity(5, 5));
  CHECK(obj == doctest::Approx((z.transpose() * e).squaredNorm()).epsilon(1e-12));
  CHECK(obj >= 0.0);
}

TEST_CASE("projection weighting is invariant to instrument column scaling") {
  BsarDataset data = random_dataset(18, 0.4, 0.2, 54);
  Eigen::VectorXd beta(2);
  beta << 2.0, -1.0;
  const Eigen::MatrixXd z = build_instruments(data.X, *data.W);
  Eigen::MatrixXd zs = z;
  zs.col(2) *= 7.0;
  zs.col(4) *= 0.01;
  const Eigen::MatrixXd m1 = (z.transpose() * z).inverse();
  const Eigen::MatrixXd m2 = (zs.transpose() * zs).inverse();
  const double a = gmm_objective(beta, 0.2, data, z, m1);
  const double b = gmm_objective(beta, 0.2, data, zs, m2);
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("gradients at the zero start: quarter of the design") {
  BsarDataset data = random_dataset(12, 0.5, 0.0, 55);
  const KmGradients g = km_gradients(Eigen::VectorXd::Zero(2), 0.0, data);
  CHECK((g.beta - 0.25 * data.X).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(g.rho.cwiseAbs().maxCoeff() < 1e-14);  // q = 0 kills the rho gradient
}

TEST_CASE("rho gradient at rho = 0 reduces to the lagged index") {
  BsarDataset data = random_dataset(12, 0.5, 0.0, 56);
  Eigen::VectorXd beta(2);
  beta << 1.0, -0.4;
  const KmGradients g = km_gradients(beta, 0.0, data);
  const Eigen::VectorXd q = data.X * beta;
  const Eigen::VectorXd wq = data.W->normalized * q;
  for (int i = 0; i < data.n(); ++i) {
    const double p = logistic_cdf(q(i));
    CHECK(g.rho(i) == doctest::Approx(p * (1 - p) * wq(i)).epsilon(1e-10));
  }
}

TEST_CASE("gradients match central finite differences away from zero") {
  BsarDataset data = random_dataset(8, 0.5, 0.0, 57);
  Eigen::VectorXd beta(2);
  beta << 1.2, -0.6;
  const double rho = 0.3, h = 1e-5;

  const KmGradients g = km_gradients(beta, rho, data);
  auto probs = [&](const Eigen::VectorXd& b, double r) {
    const Eigen::VectorXd q = standardized_index(*data.W, r, data.X, b);
    Eigen::VectorXd p(q.size());
    for (int i = 0; i < q.size(); ++i) p(i) = logistic_cdf(q(i));
    return p;
  };
  const Eigen::VectorXd fd_rho = (probs(beta, rho + h) - probs(beta, rho - h)) / (2 * h);
  for (int i = 0; i < data.n(); ++i)
    CHECK(std::fabs(g.rho(i) - fd_rho(i)) <=
          1e-5 * std::max({std::fabs(g.rho(i)), std::fabs(fd_rho(i)), 1e-6}));

  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd bu = beta, bd = beta;
    bu(j) += h;
    bd(j) -= h;
    const Eigen::VectorXd fd = (probs(bu, rho) - probs(bd, rho)) / (2 * h);
    for (int i = 0; i < data.n(); ++i)
      CHECK(std::fabs(g.beta(i, j) - fd(i)) <=
            1e-5 * std::max({std::fabs(g.beta(i, j)), std::fabs(fd(i)), 1e-6}));
  }
}

TEST_CASE("symmetric-W reduction of the sigma derivative") {
  auto W = ring_weights(12);
  REQUIRE(W->normalized.isApprox(W->normalized.transpose()));
  for (double rho : {-0.5, 0.2, 0.6}) {
    const Eigen::VectorXd general = sigma_e_rho_derivative(*W, rho);
    const Eigen::MatrixXd psi_inv = lag_inverse(*W, rho);
    const Eigen::MatrixXd simple = psi_inv * W->normalized * psi_inv * psi_inv;
    const Eigen::VectorXd sigma = error_covariance(*W, rho).diagonal().cwiseSqrt();
    const Eigen::VectorXd reduced = simple.diagonal().cwiseQuotient(sigma);
    CHECK((general - reduced).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("moment search stays inside the rho box") {
  BsarDataset data = random_dataset(40, 0.25, 0.45, 58);
  const EstimateResult res = fit_gmm_ps(data);
  CHECK(res.rho > data.W->rho_domain.lower);
  CHECK(res.rho < 1.0);
  CHECK(res.objective >= 0.0);
}

TEST_CASE("linearized fit: scaling leaves rho untouched and flags no-variation data") {
  BsarDataset data = random_dataset(60, 0.22, 0.1, 59);
  const EstimateResult res = fit_gmm_linearized(data);
  CHECK(std::isfinite(res.rho));
  CHECK(res.iterations == 1);

  BsarDataset flat = data;
  flat.y.setOnes();
  const EstimateResult degenerate = fit_gmm_linearized(flat);
  CHECK_FALSE(degenerate.converged);
  CHECK(!std::isfinite(degenerate.beta0()));
}

TEST_CASE("linearized fit runs at least 10x faster than the moment search") {
  BsarDataset data = random_dataset(200, 0.1, 0.1, 60);
  using clk = std::chrono::steady_clock;
  auto t0 = clk::now();
  const EstimateResult lin = fit_gmm_linearized(data);
  const double t_lin = std::chrono::duration<double>(clk::now() - t0).count();
  t0 = clk::now();
  const EstimateResult ps = fit_gmm_ps(data);
  const double t_ps = std::chrono::duration<double>(clk::now() - t0).count();
  CHECK(std::isfinite(lin.rho));
  CHECK(std::isfinite(ps.rho));
  CHECK(t_ps >= 10.0 * t_lin);
}

TEST_SUITE_END();
