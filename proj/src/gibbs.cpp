#include "bsar/gibbs.hpp"

#include <cmath>
#include <limits>

#include "bsar/normal.hpp"

namespace bsar {

namespace {

constexpr double kSigmaFloor = 1e-12;
constexpr double kDomainMargin = 1e-6;

const Eigen::VectorXd& lag_of_latent(const GibbsState& state, const BsarDataset& data,
                                     GibbsScratch& scratch) {
  if (scratch.w_y_star.size() != state.y_star.size())
    scratch.w_y_star.noalias() = data.W->normalized * state.y_star;
  return scratch.w_y_star;
}

Eigen::VectorXd residuals(const GibbsState& state, const BsarDataset& data,
                          GibbsScratch& scratch) {
  // eps = (I - rho W) y* - X beta
  return state.y_star - state.rho * lag_of_latent(state, data, scratch) -
         data.X * state.beta;
}

}  // namespace

double draw_sigma2(const GibbsState& state, const BsarDataset& data, Stream& rng,
                   GibbsScratch* scratch) {
  GibbsScratch local;
  GibbsScratch& sc = scratch ? *scratch : local;
  const Eigen::VectorXd eps = residuals(state, data, sc);
  const double wsse = (eps.array().square() / state.v.array()).sum();
  return std::max(wsse / rng.chi_square(double(data.n())), kSigmaFloor);
}

Eigen::VectorXd draw_beta(const GibbsState& state, const BsarDataset& data, Stream& rng,
                          GibbsScratch* scratch) {
  GibbsScratch local;
  GibbsScratch& sc = scratch ? *scratch : local;
  const Eigen::ArrayXd vinv = state.v.array().inverse();
  const Eigen::MatrixXd xv = data.X.transpose() * vinv.matrix().asDiagonal();
  const Eigen::MatrixXd xvx = xv * data.X;
  Eigen::LLT<Eigen::MatrixXd> llt(xvx);
  if (llt.info() != Eigen::Success) throw SingularDesign("X'V^{-1}X not positive definite");

  const Eigen::VectorXd psi_y =
      state.y_star - state.rho * lag_of_latent(state, data, sc);
  const Eigen::VectorXd mean = llt.solve(xv * psi_y);

  Eigen::VectorXd z(data.k());
  for (int j = 0; j < data.k(); ++j) z(j) = rng.normal();
  // cov = sigma^2 (LL')^{-1}: mean + sigma L'^{-1} z
  return mean + std::sqrt(state.sigma2) *
                    llt.matrixU().solve(z);
}

Eigen::VectorXd draw_v(const GibbsState& state, const BsarDataset& data, Stream& rng,
                       double q_hyper, GibbsScratch* scratch) {
  GibbsScratch local;
  GibbsScratch& sc = scratch ? *scratch : local;
  const Eigen::VectorXd eps = residuals(state, data, sc);
  Eigen::VectorXd v(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const double num = eps(i) * eps(i) / state.sigma2 + q_hyper;
    v(i) = num / rng.chi_square(q_hyper + 1.0);
  }
  return v;
}

RhoDraw draw_rho_metropolis(const GibbsState& state, const BsarDataset& data, Stream& rng,
                            double c_proposal, GibbsScratch* scratch) {
  GibbsScratch local;
  GibbsScratch& sc = scratch ? *scratch : local;
  const Eigen::VectorXd& wy = lag_of_latent(state, data, sc);
  const Eigen::VectorXd base = state.y_star - data.X * state.beta;

  auto log_target = [&](double rho) {
    const double wsse = ((base - rho * wy).array().square() / state.v.array()).sum();
    return ord_log_det(rho, data.W->eigenvalues) - 0.5 * wsse / state.sigma2;
  };

  RhoDraw out;
  out.proposal = state.rho + c_proposal * rng.normal();
  out.rho = state.rho;
  if (!data.W->rho_domain.contains(out.proposal, kDomainMargin)) {
    rng.uniform();  // keep the draw count identical on both branches
    return out;
  }
  const double log_ratio = log_target(out.proposal) - log_target(state.rho);
  if (std::log(rng.uniform()) < log_ratio) {
    out.rho = out.proposal;
    out.accepted = true;
  }
  return out;
}

double trunc_std_normal_upper(double bound, Stream& rng) {
  if (bound > -5.0) {
    const double lp = std::log(rng.uniform()) + log_norm_cdf(bound);
    return std::min(norm_quantile_logp(lp), bound);
  }
  // far tail: sample -z >= -bound by exponential rejection
  const double a = -bound;
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential() / alpha;
    const double w = z - alpha;
    if (std::log(rng.uniform()) <= -0.5 * w * w) return -z;
  }
}

Eigen::VectorXd draw_latent(const GibbsState& state, const BsarDataset& data, Stream& rng,
                            GibbsScratch* scratch) {
  GibbsScratch local;
  GibbsScratch& sc = scratch ? *scratch : local;
  if (sc.inv_rho != state.rho || sc.inv.rows() != data.n()) {
    sc.inv = lag_inverse(*data.W, state.rho);
    sc.inv_sq = sc.inv.cwiseAbs2();
    sc.inv_rho = state.rho;
  }
  const Eigen::VectorXd mean = sc.inv * (data.X * state.beta);
  const Eigen::VectorXd lambda = state.sigma2 * (sc.inv_sq * state.v);

  Eigen::VectorXd out(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const double sd = std::sqrt(lambda(i));
    if (data.y(i) > 0.5) {
      // z >= -mean/sd, mirrored through the upper-tail sampler
      const double z = -trunc_std_normal_upper(mean(i) / sd, rng);
      out(i) = std::max(mean(i) + sd * z, std::numeric_limits<double>::min());
    } else {
      const double z = trunc_std_normal_upper(-mean(i) / sd, rng);
      out(i) = std::min(mean(i) + sd * z, 0.0);
    }
  }
  return out;
}

EstimateResult fit_gibbs(const BsarDataset& data, const GibbsConfig& config, Stream rng,
                         std::vector<GibbsChainRow>* chain_log) {
  const int n = data.n(), k = data.k();
  GibbsState state;
  state.beta = Eigen::VectorXd::Zero(k);
  state.rho = config.rho_start;
  state.sigma2 = 1.0;
  state.v = Eigen::VectorXd::Ones(n);
  state.y_star = Eigen::VectorXd::Zero(n);

  GibbsScratch scratch;
  const int retained = config.total_sweeps - config.burn_in;
  if (retained <= 0) throw Error("burn_in must be smaller than total_sweeps");
  Eigen::VectorXd beta_sum = Eigen::VectorXd::Zero(k), beta_sq = Eigen::VectorXd::Zero(k);
  double rho_sum = 0.0, rho_sq = 0.0;
  long accepted = 0;

  for (int sweep = 0; sweep < config.total_sweeps; ++sweep) {
    scratch.w_y_star.noalias() = data.W->normalized * state.y_star;

    if (config.sample_sigma2) state.sigma2 = draw_sigma2(state, data, rng, &scratch);
    state.beta = draw_beta(state, data, rng, &scratch);
    state.v = draw_v(state, data, rng, config.q_hyper, &scratch);
    const RhoDraw rd = draw_rho_metropolis(state, data, rng, config.c_proposal, &scratch);
    state.rho = rd.rho;
    state.y_star = draw_latent(state, data, rng, &scratch);

    for (int i = 0; i < n; ++i) {
      const bool ok = data.y(i) > 0.5 ? state.y_star(i) > 0.0 : state.y_star(i) <= 0.0;
      if (!ok) throw Error("latent truncation violated");
    }

    if (rd.accepted) ++accepted;
    if (chain_log)
      chain_log->push_back({sweep, state.beta(0), k > 1 ? state.beta(1) : kNaN, state.rho,
                            state.sigma2, rd.accepted});
    if (sweep >= config.burn_in) {
      beta_sum += state.beta;
      beta_sq += state.beta.cwiseAbs2();
      rho_sum += state.rho;
      rho_sq += state.rho * state.rho;
    }
  }

  EstimateResult res;
  res.estimator = "gibbs";
  res.beta = beta_sum / retained;
  res.rho = rho_sum / retained;
  res.beta_sd = (beta_sq / retained - res.beta.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  res.rho_sd = std::sqrt(std::max(rho_sq / retained - res.rho * res.rho, 0.0));
  res.accept_rate = double(accepted) / config.total_sweeps;
  res.iterations = config.total_sweeps;
  res.converged = true;
  return res;
}

}  // namespace bsar
