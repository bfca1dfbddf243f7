#include <doctest.h>

#include <cmath>

#include "bsar/em.hpp"
#include "bsar/glm.hpp"
#include "bsar/normal.hpp"

using namespace bsar;

namespace {

std::shared_ptr<const WeightMatrix> test_weights(int n, double d, std::uint64_t seed) {
  Stream rng(seed);
  return draw_weights(n, d, rng);
}

// dataset with X = [1, 0] so the index at rho = 0 equals beta(0)
BsarDataset scalar_dataset(double y_value, int n = 4) {
  BsarDataset data;
  data.W = test_weights(n, 0.9, 5);
  data.X.resize(n, 2);
  data.X.col(0).setOnes();
  data.X.col(1).setZero();
  data.y = Eigen::VectorXd::Constant(n, y_value);
  return data;
}

// truncated-normal mean by inverse-cdf simulation (independent oracle)
double truncated_mean_oracle(double mu, bool positive_side, int draws, std::uint64_t seed) {
  Stream rng(seed);
  double acc = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double u = rng.uniform();
    double z;
    if (positive_side) {
      const double p_lo = norm_cdf(-mu);  // z | z > -mu
      z = norm_quantile(p_lo + u * (1.0 - p_lo));
    } else {
      z = norm_quantile(u * norm_cdf(-mu));
    }
    acc += mu + z;
  }
  return acc / draws;
}

}  // namespace

TEST_SUITE_BEGIN("em");

TEST_CASE("e-step matches truncated-normal oracle at q = 0") {
  BsarDataset data = scalar_dataset(1.0);
  Eigen::VectorXd beta(2);
  beta << 0.0, 0.0;

  const Eigen::VectorXd up = e_step(beta, 0.0, data);
  CHECK(up(0) == doctest::Approx(0.7978845608).epsilon(1e-8));
  CHECK(up(0) == doctest::Approx(truncated_mean_oracle(0.0, true, 2000000, 11)).epsilon(2e-3));

  data.y.setZero();
  const Eigen::VectorXd dn = e_step(beta, 0.0, data);
  CHECK(dn(0) == doctest::Approx(-0.7978845608).epsilon(1e-8));
  CHECK(dn(0) == doctest::Approx(truncated_mean_oracle(0.0, false, 2000000, 12)).epsilon(2e-3));
}

TEST_CASE("e-step at xb = 3, y = 1") {
  BsarDataset data = scalar_dataset(1.0);
  Eigen::VectorXd beta(2);
  beta << 3.0, 0.0;
  const Eigen::VectorXd v = e_step(beta, 0.0, data);
  CHECK(v(0) == doctest::Approx(3.0 + norm_pdf(3.0) / norm_cdf(3.0)).epsilon(1e-12));
  CHECK(v(0) == doctest::Approx(3.00444).epsilon(1e-5));
}

TEST_CASE("e-step equals the classical probit generalized residual at rho = 0") {
  auto W = test_weights(20, 0.35, 21);
  Stream rng(22);
  BsarDataset data = generate_bsar(W, Eigen::Vector2d{1.0, -0.5}, 0.0, rng);
  Eigen::VectorXd beta(2);
  beta << 0.7, -0.3;
  const Eigen::VectorXd es = e_step(beta, 0.0, data);
  for (int i = 0; i < data.n(); ++i) {
    const double q = beta(0) + beta(1) * data.X(i, 1);
    const double p = norm_cdf(q);
    const double gr = norm_pdf(q) * (data.y(i) - p) / (p * (1 - p));  // Cox-Snell form
    CHECK(es(i) == doctest::Approx(q + gr).epsilon(1e-12));
  }
}

TEST_CASE("e-step correction signs follow the outcome") {
  auto W = test_weights(30, 0.3, 23);
  Stream rng(24);
  BsarDataset data = generate_bsar(W, Eigen::Vector2d{4.0, -2.0}, 0.45, rng);
  for (double rho : {-0.4, 0.0, 0.45, 0.7}) {
    // moderate indices: the correction is strictly signed
    Eigen::VectorXd beta(2);
    beta << 0.5, -0.25;
    const Eigen::MatrixXd inv = lag_inverse(*data.W, rho);
    const Eigen::VectorXd es = e_step(beta, rho, data);
    const Eigen::VectorXd mu = inv * (data.X * beta);
    for (int i = 0; i < data.n(); ++i) {
      if (data.y(i) > 0.5)
        CHECK(es(i) > mu(i));
      else
        CHECK(es(i) < mu(i));
    }
    // extreme indices: the correction can underflow below the mean's ulp,
    // so only the weak inequality is observable
    Eigen::VectorXd big(2);
    big << 4.0, -2.0;
    const Eigen::VectorXd es2 = e_step(big, rho, data);
    const Eigen::VectorXd mu2 = inv * (data.X * big);
    for (int i = 0; i < data.n(); ++i) {
      if (data.y(i) > 0.5)
        CHECK(es2(i) >= mu2(i));
      else
        CHECK(es2(i) <= mu2(i));
    }
  }
}

TEST_CASE("m-step solves the profiled normal equations") {
  auto W = test_weights(25, 0.3, 31);
  Stream rng(32);
  BsarDataset data = generate_bsar(W, Eigen::Vector2d{4.0, -2.0}, 0.45, rng);
  const Eigen::VectorXd ys = data.y_star;
  const MStepResult m = m_step(ys, data);
  const Eigen::VectorXd resid =
      ys - m.rho * (data.W->normalized * ys) - data.X * m.beta;
  CHECK((data.X.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(m.rho > -1.0);
  CHECK(m.rho < 1.0);
}

TEST_CASE("m-step beats a rho grid on the profiled objective") {
  auto W = test_weights(25, 0.3, 33);
  Stream rng(34);
  BsarDataset data = generate_bsar(W, Eigen::Vector2d{4.0, -2.0}, 0.45, rng);
  const Eigen::VectorXd ys = data.y_star;
  const MStepResult m = m_step(ys, data);

  auto profiled = [&](double rho) {
    const Eigen::VectorXd target = ys - rho * (data.W->normalized * ys);
    const Eigen::VectorXd beta =
        (data.X.transpose() * data.X).ldlt().solve(data.X.transpose() * target);
    return -0.5 * (target - data.X * beta).squaredNorm() +
           ord_log_det(rho, data.W->eigenvalues);
  };
  const double at_opt = profiled(m.rho);
  for (int g = 0; g < 21; ++g) {
    const double rho = -0.9 + 1.8 * g / 20.0;
    CHECK(at_opt >= profiled(rho) - 1e-9);
  }
}

TEST_CASE("m-step on rho = 0 latent data recovers least squares") {
  auto W = test_weights(400, 0.07, 35);
  Stream rng(36);
  BsarDataset data = generate_bsar(W, Eigen::Vector2d{4.0, -2.0}, 0.0, rng);
  const MStepResult m = m_step(data.y_star, data);
  CHECK(std::fabs(m.rho) < 0.05);
  const Eigen::VectorXd ols =
      (data.X.transpose() * data.X).ldlt().solve(data.X.transpose() * data.y_star);
  CHECK((m.beta - ols).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("fit reports non-convergence under complete separation") {
  auto W = test_weights(40, 0.25, 37);
  BsarDataset data;
  data.W = W;
  data.X.resize(40, 2);
  data.X.col(0).setOnes();
  Stream rng(38);
  for (int i = 0; i < 40; ++i) data.X(i, 1) = rng.normal();
  data.y = Eigen::VectorXd::Ones(40);  // all ones: no finite maximizer
  EmConfig cfg;
  cfg.max_outer_loops = 60;
  const EstimateResult res = fit_em(data, cfg);
  CHECK_FALSE(res.converged);
  CHECK(res.rho > -1.0);
  CHECK(res.rho < 1.0);
}

TEST_SUITE_END();
