#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here reuses the library's prefix sums, structured Kronecker
// products or log-space tail formulas.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cpsi/covariance.hpp"
#include "cpsi/hyperparameters.hpp"
#include "cpsi/interval.hpp"
#include "cpsi/sequence.hpp"

namespace oracle {

inline Eigen::MatrixXd dense_kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Eigen::MatrixXd random_psd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  Eigen::MatrixXd s = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  // Exact symmetry.
  return 0.5 * (s + s.transpose());
}

inline cpsi::SequenceMatrix random_matrix(int d, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  cpsi::RowMatrix m(d, n);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  return cpsi::SequenceMatrix(m);
}

// Mean of row i over 1-based columns [s, e], by a plain loop.
inline double mean(const cpsi::SequenceMatrix& x, int i, int s, int e) {
  double acc = 0.0;
  for (int j = s; j <= e; ++j) acc += x.at(i, j);
  return acc / (e - s + 1);
}

// The windowed scan statistic written directly from its definition.
inline std::vector<double> windowed_diff(const cpsi::SequenceMatrix& x, int s, int e, int j, int w) {
  const double v = std::sqrt(static_cast<double>(j - s + 1) * (e - j) / (e - s + 1));
  std::vector<double> out(static_cast<std::size_t>(x.components()), 0.0);
  for (int i = 0; i < x.components(); ++i) {
    double acc = 0.0;
    for (int delta = -w; delta <= w; ++delta) {
      acc += mean(x, i, s, j + delta) - mean(x, i, j + delta + 1, e);
    }
    out[static_cast<std::size_t>(i)] = v * acc;
  }
  return out;
}

// Adaptive Gauss-Kronrod (7, 15) in long double.
template <typename F>
long double gauss_kronrod(F&& f, long double a, long double b, long double tol, int depth = 0) {
  static const long double xk[] = {0.991455371120812639206854697526329L, 0.949107912342758524526189684047851L,
                                   0.864864423359769072789712788640926L, 0.741531185599394439863864773280788L,
                                   0.586087235467691130294144845693013L, 0.405845151377397166906606412076961L,
                                   0.207784955007898467600689403773245L, 0.0L};
  static const long double wk[] = {0.022935322010529224963732008058970L, 0.063092092629978553290700663189204L,
                                   0.104790010322250183839876322541518L, 0.140653259715525918745189590510238L,
                                   0.169004726639267902826583426598550L, 0.190350578064785409913256402421014L,
                                   0.204432940075298892414161999234649L, 0.209482141084727828012999174891714L};
  static const long double wg[] = {0.129484966168869693270611432679082L, 0.279705391489276667901467771423780L,
                                   0.381830050505118944950369775488975L, 0.417959183673469387755102040816327L};
  const long double c = 0.5L * (a + b);
  const long double h = 0.5L * (b - a);
  long double k15 = wk[7] * f(c);
  long double g7 = wg[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const long double fa = f(c - h * xk[i]);
    const long double fb = f(c + h * xk[i]);
    k15 += wk[i] * (fa + fb);
    if (i % 2 == 1) g7 += wg[i / 2] * (fa + fb);
  }
  k15 *= h;
  g7 *= h;
  if (depth > 30 || std::fabs(k15 - g7) <= std::max(tol, 1e-15L * std::fabs(k15))) return k15;
  return gauss_kronrod(f, a, c, 0.5L * tol, depth + 1) + gauss_kronrod(f, c, b, 0.5L * tol, depth + 1);
}

// P(Y <= x | Y in region) for Y ~ N(mu, sigma2), by quadrature of the
// density. The density is scaled by exp(r^2 / 2), r the standardized distance
// from mu to the region, so far-tail regions do not underflow. Infinite
// endpoints are cut 40 standard deviations beyond the region.
inline double truncated_cdf(double x, double mu, double sigma2, const cpsi::IntervalUnion& region) {
  const long double s = std::sqrt(static_cast<long double>(sigma2));
  long double r = 1e300L;
  for (const auto& p : region.intervals()) {
    const long double d = (p.lo <= mu && mu <= p.hi) ? 0.0L
                          : std::min(std::fabs(p.lo - mu), std::fabs(p.hi - mu)) / s;
    r = std::min(r, d);
  }
  const auto density = [&](long double t) {
    const long double u = std::fabs(t - mu) / s;
    return std::exp(-0.5L * (u - r) * (u + r));
  };
  long double below = 0.0L;
  long double total = 0.0L;
  for (const auto& p : region.intervals()) {
    long double lo = p.lo;
    long double hi = p.hi;
    if (std::isinf(p.lo)) lo = std::min<long double>(mu, p.hi) - 40.0L * s;
    if (std::isinf(p.hi)) hi = std::max<long double>(mu, p.lo) + 40.0L * s;
    const auto piece = [&](long double a, long double b) {
      // Split at the mean so the peak is an endpoint of a panel.
      if (a < mu && mu < b) {
        return gauss_kronrod(density, a, mu, 1e-18L) + gauss_kronrod(density, mu, b, 1e-18L);
      }
      return gauss_kronrod(density, a, b, 1e-18L);
    };
    total += piece(lo, hi);
    if (x >= hi) {
      below += piece(lo, hi);
    } else if (x > lo) {
      below += piece(lo, x);
    }
  }
  return static_cast<double>(below / total);
}

// Standard normal quantile by bisection on erfc.
inline double normal_quantile(double p) {
  long double lo = -40.0L;
  long double hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (0.5L * std::erfc(-mid / std::sqrt(2.0L)) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

// Dense version of the scan form G for component set theta at tau:
// V^2 / sqrt(2|theta|) * diag(1_theta / s_i^2) (x) w w'.
inline Eigen::MatrixXd dense_scan_form(const cpsi::Hyperparameters& hp, int d, int n, int tau,
                                       const std::vector<int>& theta, const std::vector<double>& scale) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  const int s = tau - hp.l + 1;
  const int e = tau + hp.l;
  for (int delta = -hp.w; delta <= hp.w; ++delta) {
    const int j = tau + delta;
    for (int t = s; t <= j; ++t) w(t - 1) += 1.0 / (j - s + 1);
    for (int t = j + 1; t <= e; ++t) w(t - 1) -= 1.0 / (e - j);
  }
  Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(d, d);
  for (int i : theta) {
    const double si = scale.empty() ? 1.0 : scale[static_cast<std::size_t>(i)];
    sel(i, i) = 1.0 / (si * si);
  }
  const double v2 = hp.l / 2.0;
  return v2 / std::sqrt(2.0 * theta.size()) * dense_kron(sel, w * w.transpose());
}

// Kolmogorov-Smirnov statistic against Uniform(0, 1).
inline double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max(d, std::max((i + 1) / n - p[i], p[i] - i / n));
  }
  return d;
}

}  // namespace oracle
