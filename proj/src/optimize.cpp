#include "bsar/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace bsar {

ScalarOptResult brent_minimize(const std::function<double(double)>& f, double a,
                               double b, double xtol, int max_evals) {
  const double gold = 0.3819660112501051;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int evals = 1;
  while (evals < max_evals) {
    const double m = 0.5 * (a + b);
    const double tol1 = xtol * std::fabs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - m) <= tol2 - 0.5 * (b - a))
      return {x, fx, evals, true};
    bool parabolic = false;
    if (std::fabs(e) > tol1) {
      // parabola through (v,fv), (w,fw), (x,fx)
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double e_old = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (m > x) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = gold * e;
    }
    const double u = (std::fabs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
    const double fu = f(u);
    ++evals;
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evals, false};
}

SimplexResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                                   const SimplexOptions& opts) {
  const int dim = int(x0.size());
  const int m = dim + 1;
  std::vector<Eigen::VectorXd> verts(m, x0);
  std::vector<double> fv(m);
  for (int i = 1; i < m; ++i) verts[i](i - 1) += steps(i - 1);
  int evals = 0;
  for (int i = 0; i < m; ++i) {
    fv[i] = f(verts[i]);
    ++evals;
  }

  std::vector<int> order(m);
  auto sort_order = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return fv[i] < fv[j]; });
  };

  const double alpha = 1.0, gamma = 2.0, beta = 0.5, delta = 0.5;
  bool converged = false;
  while (evals < opts.max_evals) {
    sort_order();
    const int lo = order[0], hi = order[m - 1], nh = order[m - 2];

    double diam = 0.0;
    for (int i = 1; i < m; ++i)
      diam = std::max(diam, (verts[order[i]] - verts[lo]).cwiseAbs().maxCoeff());
    if (std::fabs(fv[hi] - fv[lo]) <= opts.ftol * (std::fabs(fv[lo]) + opts.ftol) &&
        diam <= opts.xtol) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < m; ++i)
      if (i != hi) centroid += verts[i];
    centroid /= double(dim);

    Eigen::VectorXd xr = centroid + alpha * (centroid - verts[hi]);
    const double fr = f(xr);
    ++evals;
    if (fr < fv[order[0]]) {
      Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        verts[hi] = xe; fv[hi] = fe;
      } else {
        verts[hi] = xr; fv[hi] = fr;
      }
      continue;
    }
    if (fr < fv[nh]) {
      verts[hi] = xr; fv[hi] = fr;
      continue;
    }
    // contraction (outside if the reflected point improved on the worst)
    Eigen::VectorXd xc;
    double fref;
    if (fr < fv[hi]) {
      xc = centroid + beta * (xr - centroid);
      fref = fr;
    } else {
      xc = centroid - beta * (centroid - verts[hi]);
      fref = fv[hi];
    }
    const double fc = f(xc);
    ++evals;
    if (fc < fref) {
      verts[hi] = xc; fv[hi] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (int i = 0; i < m; ++i) {
      if (i == lo) continue;
      verts[i] = verts[lo] + delta * (verts[i] - verts[lo]);
      fv[i] = f(verts[i]);
      ++evals;
    }
  }
  sort_order();
  return {verts[order[0]], fv[order[0]], evals, converged};
}

}  // namespace bsar
