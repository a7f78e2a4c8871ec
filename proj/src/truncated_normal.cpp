#include "cpsi/truncated_normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cpsi/errors.hpp"

namespace cpsi {

namespace {

constexpr double kLogMassFloor = -690.77552789821368;  // log(1e-300)

double log_sum_exp(const std::vector<double>& v) {
  double top = -kInf;
  for (double x : v) top = std::max(top, x);
  if (top == -kInf) return -kInf;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - top);
  return top + std::log(acc);
}

// log(exp(a) - exp(b)) for a >= b.
double log_diff_exp(double a, double b) {
  if (b == -kInf) return a;
  if (b >= a) return -kInf;
  return a + std::log1p(-std::exp(b - a));
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double log_normal_sf(double x) {
  if (x == kInf) return -kInf;
  if (x < 30.0) return std::log(normal_sf(x));
  // Continued fraction for the Mills ratio R(x) = Q(x) / phi(x):
  // R = 1 / (x + 1 / (x + 2 / (x + 3 / (x + ...)))).
  double tail = x;
  for (int n = 40; n >= 1; --n) tail = x + n / tail;
  const double log_phi = -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
  return log_phi - std::log(tail);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw InputError("normal_quantile: p outside [0, 1]");
  }
  // Acklam's rational approximation refined by Newton steps on erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  double x = 0.0;
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p > 1.0 - 0.02425) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int it = 0; it < 3; ++it) {
    const double err = normal_cdf(x) - p;
    const double dens = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (dens <= 0.0) break;
    x -= err / dens;
  }
  return x;
}

double log_interval_mass(double lo, double hi, double mu, double sigma) {
  if (!(lo <= hi)) return -kInf;
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  if (a >= 0.0) return log_diff_exp(log_normal_sf(a), log_normal_sf(b));
  if (b <= 0.0) return log_diff_exp(log_normal_sf(-b), log_normal_sf(-a));
  // Straddles the mean: 1 - Q(-a) - Q(b), both tails below one half.
  return std::log1p(-(normal_sf(-a) + normal_sf(b)));
}

namespace {

struct SplitMass {
  double log_below;
  double log_above;
};

SplitMass split_mass(double x, double mu, double sigma, const TruncationRegion& region) {
  std::vector<double> below;
  std::vector<double> above;
  for (const auto& p : region.intervals()) {
    if (p.hi <= x) {
      below.push_back(log_interval_mass(p.lo, p.hi, mu, sigma));
    } else if (p.lo >= x) {
      above.push_back(log_interval_mass(p.lo, p.hi, mu, sigma));
    } else {
      below.push_back(log_interval_mass(p.lo, x, mu, sigma));
      above.push_back(log_interval_mass(x, p.hi, mu, sigma));
    }
  }
  return {log_sum_exp(below), log_sum_exp(above)};
}

}  // namespace

double truncated_normal_cdf(double x, double mu, double sigma2, const TruncationRegion& region) {
  if (!(sigma2 > 0.0)) throw NumericError("truncated normal needs positive variance");
  const SplitMass m = split_mass(x, mu, std::sqrt(sigma2), region);
  const double log_total = std::max(m.log_below, m.log_above) +
                           std::log1p(std::exp(-std::abs(m.log_below - m.log_above)));
  if (!(log_total >= kLogMassFloor)) {
    throw NumericError("truncation region has total probability mass below 1e-300");
  }
  if (m.log_below == -kInf) return 0.0;
  if (m.log_above == -kInf) return 1.0;
  return std::exp(m.log_below - log_total);
}

double truncated_normal_sf(double x, double mu, double sigma2, const TruncationRegion& region) {
  if (!(sigma2 > 0.0)) throw NumericError("truncated normal needs positive variance");
  const SplitMass m = split_mass(x, mu, std::sqrt(sigma2), region);
  if (m.log_above == -kInf && m.log_below == -kInf) {
    throw NumericError("truncation region carries no probability mass");
  }
  if (m.log_above == -kInf) return 0.0;
  if (m.log_below == -kInf) return 1.0;
  // 1 / (1 + exp(below - above)) evaluated without overflow.
  const double r = m.log_below - m.log_above;
  if (r > 0.0) {
    const double e = std::exp(-r);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(r));
}

}  // namespace cpsi
