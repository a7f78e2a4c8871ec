#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cpsi/hyperparameters.hpp"
#include "cpsi/interval.hpp"
#include "cpsi/line.hpp"
#include "cpsi/scan.hpp"

namespace cpsi {

// c2 z^2 + c1 z + c0.
struct Quadratic {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double value(double z) const { return (c2 * z + c1) * z + c0; }
  // Sum of absolute term values at z; the rounding scale of value(z).
  double magnitude(double z) const {
    return std::abs(c2) * z * z + std::abs(c1 * z) + std::abs(c0);
  }
  Quadratic& operator+=(const Quadratic& o) {
    c2 += o.c2;
    c1 += o.c1;
    c0 += o.c0;
    return *this;
  }
  friend Quadratic operator+(Quadratic a, const Quadratic& b) { return a += b; }
  friend Quadratic operator-(const Quadratic& a, const Quadratic& b) {
    return {a.c2 - b.c2, a.c1 - b.c1, a.c0 - b.c0};
  }
};

// Window vector w of the scan form at tau:
//   sum_{delta=-W..W} [1_{tau-L+1 : tau+delta} / (L + delta) - 1_{tau+delta+1 : tau+L} / (L - delta)]
// as a length-N vector (index j - 1 for location j).
Eigen::VectorXd window_vector(const Hyperparameters& hp, int locations, int tau);

// One weighted scan form  weight * G_{(tau, theta)}, where
//   v' G_{(tau,theta)} v'' = V^2 / sqrt(2|theta|) * sum_{i in theta} (w' v_i)(w' v''_i) / s_i^2
// with V^2 = L / 2, v_i the i-th row block and s_i the component scale.
struct ScanTerm {
  int tau = 0;
  std::vector<int> theta;
  double weight = 1.0;
};

// Coefficients (b'Mb, 2 b'Ma, a'Ma + constant) of M = sum of the terms,
// evaluated blockwise from inner products w' a_i and w' b_i.
QuadraticInequality quad_coeffs(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                std::span<const ScanTerm> form, double constant,
                                const Hyperparameters& hp, int components, int locations,
                                std::span<const double> component_scale = {});

// Windowed statistics along the line: u_{m,i}(z) = offset + slope * z, the
// detector's statistics of the data a + b z (same scaling).
class LineGeometry {
 public:
  LineGeometry(const LineParametrization& line, const Hyperparameters& hp, int components,
               int locations, std::span<const double> component_scale = {});

  int first() const { return offset_.first(); }
  int last() const { return offset_.last(); }
  int components() const { return offset_.components(); }

  Quadratic squared(int m, int i) const {
    const double p = offset_.value(m, i);
    const double q = slope_.value(m, i);
    return {q * q, 2.0 * p * q, p * p};
  }

 private:
  WindowStats offset_;
  WindowStats slope_;
};

// Everything needed to rerun the detector on a + b z and to express its
// selection event as quadratic inequalities in z.
struct LineProblem {
  const LineParametrization* line = nullptr;
  Hyperparameters hp;
  int components = 0;
  int locations = 0;
  std::vector<double> component_scale;  // empty: unit scale
  // Self-membership tolerance, absolute in z.
  double tolerance = 0.0;

  Detection detect_at(double z) const;
};

struct RegionResult {
  Detection detection;
  TruncationRegion region;
};

// Detector trace at a + b z and the full set of z' whose trace is the same:
// the intersection of every sort inequality and every DP-table inequality.
RegionResult region_for_trace(const LineProblem& problem, const LineGeometry& geometry, double z);

struct TracePiece {
  Detection detection;
  Interval piece;
};

// Connected component, within [lo, hi], of the constant-trace set containing
// z. Equivalent to the piece of region_for_trace holding z, but intersects
// interval endpoints directly.
TracePiece trace_piece(const LineProblem& problem, const LineGeometry& geometry, double z,
                       double lo, double hi);

// Calls visit(lhs, rhs) for every inequality lhs(z) <= rhs(z) describing the
// trace of det along the geometry. Sort events come first, then DP cells in
// the order the detector visits them.
template <typename Visit>
void for_each_trace_inequality(const LineGeometry& geometry, const Detection& det,
                               const Hyperparameters& hp, Visit&& visit);

template <typename Visit>
void for_each_trace_inequality(const LineGeometry& geometry, const Detection& det,
                               const Hyperparameters& hp, Visit&& visit) {
  const SortTable& table = det.trace.sort;
  const int d_count = geometry.components();
  const int first = geometry.first();
  const int last = geometry.last();
  const auto slot = [&](int m, int d) {
    return static_cast<std::size_t>(m - first) * d_count + (d - 1);
  };

  // Prefix-score quadratics C(m, d) under the current sort orders.
  std::vector<Quadratic> score(static_cast<std::size_t>(last - first + 1) * d_count);
  for (int m = first; m <= last; ++m) {
    const auto order = table.order(m);
    Quadratic acc;
    Quadratic prev_sq;
    for (int d = 1; d <= d_count; ++d) {
      const Quadratic sq = geometry.squared(m, order[d - 1]);
      if (d > 1) visit(sq, prev_sq);
      prev_sq = sq;
      acc += sq;
      const double norm = 1.0 / std::sqrt(2.0 * d);
      score[slot(m, d)] = {acc.c2 * norm, acc.c1 * norm, (acc.c0 - d) * norm};
    }
  }

  std::vector<Quadratic> prev_f;
  int prev_first = 0;
  std::vector<Quadratic> cur_f;
  for (const DpStage& stage : det.trace.stages) {
    const int k = stage.k;
    cur_f.assign(stage.cells.size(), Quadratic{});
    for (int j = stage.j_first; j <= stage.j_last(); ++j) {
      const DpChoice& choice = stage.at(j);
      const auto f_at = [&](int m) -> const Quadratic& {
        static const Quadratic zero{};
        if (k == 1) return zero;
        return prev_f[static_cast<std::size_t>(m - prev_first)];
      };
      const Quadratic chosen = f_at(choice.tau) + score[slot(choice.tau, choice.d)];
      cur_f[static_cast<std::size_t>(j - stage.j_first)] = chosen;
      for (int m = hp.l * k; m <= j - hp.l; ++m) {
        const Quadratic& base = f_at(m);
        for (int d = 1; d <= d_count; ++d) {
          if (m == choice.tau && d == choice.d) continue;
          visit(base + score[slot(m, d)], chosen);
        }
      }
    }
    prev_f.swap(cur_f);
    prev_first = stage.j_first;
  }
}

}  // namespace cpsi
