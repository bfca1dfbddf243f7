#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace bsar {

inline constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056176;

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

inline double logistic_cdf(double x) {
  // exp(q)/(1+exp(q)), written to avoid overflow on either side
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ln Phi(x), usable far into the lower tail where erfc underflows.
double log_norm_cdf(double x);

// Wichura's AS 241 (PPND16) inverse normal cdf, |error| ~ 1e-15.
double norm_quantile(double p);

// Same tail branches driven by log(p); needed when p itself underflows.
double norm_quantile_logp(double log_p);

double logsumexp(const Eigen::VectorXd& v);

}  // namespace bsar
