#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bsar/dataset.hpp"
#include "bsar/estimate.hpp"
#include "bsar/rng.hpp"

namespace bsar {

struct GibbsConfig {
  int total_sweeps = 3000;
  int burn_in = 1000;
  double q_hyper = 100.0;   // large values impose near-homoskedasticity
  double c_proposal = 0.1;  // random-walk scale for the rho step; 0 pins rho
  double rho_start = 0.0;
  // The latent-probit scale is not identified when sigma^2 is sampled jointly
  // with beta and y*; the default anchors sigma^2 = 1. The conditional draw
  // itself stays available behind this switch.
  bool sample_sigma2 = false;
};

struct GibbsState {
  Eigen::VectorXd beta;
  double rho = 0.0;
  double sigma2 = 1.0;
  Eigen::VectorXd v;       // heteroskedasticity scalars, all > 0
  Eigen::VectorXd y_star;  // latent values, sign-aligned with y
};

// Reusable per-chain scratch: W y* for the current latent vector and the
// lag inverse keyed on rho. Public draw functions accept one optionally.
struct GibbsScratch {
  Eigen::VectorXd w_y_star;
  double inv_rho = kNaN;
  Eigen::MatrixXd inv;     // (I - rho W)^{-1}
  Eigen::MatrixXd inv_sq;  // elementwise squares
};

// sigma^2 = eps' V^{-1} eps / chi2(n), floored at 1e-12.
double draw_sigma2(const GibbsState& state, const BsarDataset& data, Stream& rng,
                   GibbsScratch* scratch = nullptr);

// beta ~ N((X'V^{-1}X)^{-1} X'V^{-1}(I - rho W)y*, sigma^2 (X'V^{-1}X)^{-1}).
Eigen::VectorXd draw_beta(const GibbsState& state, const BsarDataset& data, Stream& rng,
                          GibbsScratch* scratch = nullptr);

// v_i = (eps_i^2 / sigma^2 + q) / chi2(q+1).
Eigen::VectorXd draw_v(const GibbsState& state, const BsarDataset& data, Stream& rng,
                       double q_hyper, GibbsScratch* scratch = nullptr);

struct RhoDraw {
  double rho = 0.0;
  bool accepted = false;
  double proposal = 0.0;
};

// Random-walk Metropolis on f(rho) ∝ |I - rho W| exp(-eps'V^{-1}eps / 2 sigma^2);
// proposals outside the rho domain are rejected outright.
RhoDraw draw_rho_metropolis(const GibbsState& state, const BsarDataset& data, Stream& rng,
                            double c_proposal, GibbsScratch* scratch = nullptr);

// y*_i from N(((I-rho W)^{-1} X beta)_i, Lambda_ii) truncated left at 0 when
// y_i = 1 and right at 0 when y_i = 0, with Lambda = diag of
// (I-rho W)^{-1} sigma^2 V [(I-rho W)^{-1}]'.
Eigen::VectorXd draw_latent(const GibbsState& state, const BsarDataset& data, Stream& rng,
                            GibbsScratch* scratch = nullptr);

// Standard normal conditioned on z <= bound; inverse cdf in the bulk,
// exponential rejection beyond 5 sd.
double trunc_std_normal_upper(double bound, Stream& rng);

struct GibbsChainRow {
  int sweep;
  double beta0, beta1, rho, sigma2;
  bool accepted;
};

EstimateResult fit_gibbs(const BsarDataset& data, const GibbsConfig& config, Stream rng,
                         std::vector<GibbsChainRow>* chain_log = nullptr);

}  // namespace bsar
