#include "bsar/normal.hpp"

#include <limits>

namespace bsar {

double log_norm_cdf(double x) {
  if (x > -20.0) {
    // erfc(20/sqrt2) ~ 2.8e-89: no underflow in this branch
    return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  }
  // Mills-ratio asymptotic: Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)
                        + 105.0 / (x2 * x2 * x2 * x2);
  return -0.5 * x2 - kLogSqrt2Pi - std::log(-x) + std::log(series);
}

namespace {

// AS 241 PPND16 coefficients
constexpr double kA[8] = {3.3871328727963666080e0,  1.3314166789178437745e2,
                          1.9715909503065514427e3,  1.3731693765509461125e4,
                          4.5921953931549871457e4,  6.7265770927008700853e4,
                          3.3430575583588128105e4,  2.5090809287301226727e3};
constexpr double kB[8] = {1.0,                      4.2313330701600911252e1,
                          6.8718700749205790830e2,  5.3941960214247511077e3,
                          2.1213794301586595867e4,  3.9307895800092710610e4,
                          2.8729085735721942674e4,  5.2264952788528545610e3};
constexpr double kC[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                          5.76949722146069140550e0,  3.64784832476320460504e0,
                          1.27045825245236838258e0,  2.41780725177450611770e-1,
                          2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr double kD[8] = {1.0,                       2.05319162663775882187e0,
                          1.67638483018380384940e0,  6.89767334985100004550e-1,
                          1.48103976427480074590e-1, 1.51986665636164571966e-2,
                          5.47593808499534494600e-4, 1.05075007164441684324e-9};
constexpr double kE[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                          1.78482653991729133580e0,  2.96560571828504891230e-1,
                          2.65321895265761230930e-2, 1.24266094738807843860e-3,
                          2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr double kF[8] = {1.0,                       5.99832206555887937690e-1,
                          1.36929880922735805310e-1, 1.48753612908506148525e-2,
                          7.86869131145613259100e-4, 1.84631831751005468180e-5,
                          1.42151175831644588870e-7, 2.04426310338993978564e-15};

double poly7(const double* c, double r) {
  return ((((((c[7] * r + c[6]) * r + c[5]) * r + c[4]) * r + c[3]) * r + c[2]) * r + c[1]) * r + c[0];
}

// Tail branch shared by norm_quantile and norm_quantile_logp: r = sqrt(-log(min(p,1-p))).
double ppnd16_tail(double r) {
  if (r <= 5.0) {
    r -= 1.6;
    return poly7(kC, r) / poly7(kD, r);
  }
  r -= 5.0;
  return poly7(kE, r) / poly7(kF, r);
}

}  // namespace

double norm_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly7(kA, r) / poly7(kB, r);
  }
  const double r0 = (q < 0.0) ? p : 1.0 - p;
  if (r0 <= 0.0) return q < 0.0 ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
  const double val = ppnd16_tail(std::sqrt(-std::log(r0)));
  return q < 0.0 ? -val : val;
}

double norm_quantile_logp(double log_p) {
  if (log_p >= -2.5) return norm_quantile(std::exp(log_p));  // bulk: p > 0.082
  if (log_p == -std::numeric_limits<double>::infinity())
    return -std::numeric_limits<double>::infinity();
  return -ppnd16_tail(std::sqrt(-log_p));
}

double logsumexp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace bsar
