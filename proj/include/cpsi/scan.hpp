#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "cpsi/errors.hpp"
#include "cpsi/hyperparameters.hpp"
#include "cpsi/sequence.hpp"

namespace cpsi {

// Z_{s:e}(j): V_{s,j,e} * (mean of columns s..j - mean of columns j+1..e),
// V_{s,j,e} = sqrt((j - s + 1)(e - j) / (e - s + 1)). Locations are 1-based.
Eigen::VectorXd segment_diff(const SequenceMatrix& x, int s, int e, int j);

// Z'_{s:e}(j, W): V_{s,j,e} * sum_{delta=-W..W} [mean(s..j+delta) - mean(j+delta+1..e)].
// V is evaluated once at delta = 0 so the statistic is the same quadratic
// form the region algebra uses.
Eigen::VectorXd windowed_diff(const SequenceMatrix& x, int s, int e, int j, int w);

// (||Z'_theta||^2 - |theta|) / sqrt(2 |theta|).
double scan_stat(const SequenceMatrix& x, int s, int e, int j, int w, std::span<const int> theta);

// Scan statistic of a top-d prefix whose squared windowed values sum to
// sum_sq.
inline double prefix_score(double sum_sq, int d) {
  return (sum_sq - d) / std::sqrt(2.0 * d);
}

// Windowed statistics u_{m,i} = Z'^{(i)}_{m-L+1:m+L}(m, W) for every
// candidate m in [L, N - L], computed from per-component prefix sums on the
// (optionally standardized) data.
class WindowStats {
 public:
  WindowStats(const SequenceMatrix& x, const Hyperparameters& hp,
              std::span<const double> component_scale = {});

  int first() const { return first_; }
  int last() const { return last_; }
  int components() const { return d_; }
  double value(int m, int i) const { return values_[index(m, i)]; }
  std::span<const double> at(int m) const {
    return {values_.data() + index(m, 0), static_cast<std::size_t>(d_)};
  }

 private:
  std::size_t index(int m, int i) const {
    return static_cast<std::size_t>(m - first_) * d_ + i;
  }
  int first_ = 0;
  int last_ = 0;
  int d_ = 0;
  std::vector<double> values_;
};

// Components ordered by decreasing squared statistic; ties keep ascending
// index order.
std::vector<int> sort_components(std::span<const double> stats);
std::vector<int> sort_components(const SequenceMatrix& x, const Hyperparameters& hp, int m);

// Sort orders and prefix scores C^{(theta~_{:d})}(m, W) for every candidate.
class SortTable {
 public:
  SortTable() = default;
  explicit SortTable(const WindowStats& stats);

  int first() const { return first_; }
  int last() const { return last_; }
  int components() const { return d_; }

  // 0-based rank -> component.
  std::span<const int> order(int m) const {
    return {order_.data() + offset(m), static_cast<std::size_t>(d_)};
  }
  // Score of the top-d prefix at m, d in [1, D].
  double score(int m, int d) const { return score_[offset(m) + d - 1]; }

  bool same_orders(const SortTable& other) const { return order_ == other.order_; }

 private:
  std::size_t offset(int m) const { return static_cast<std::size_t>(m - first_) * d_; }
  int first_ = 0;
  int last_ = 0;
  int d_ = 0;
  std::vector<int> order_;
  std::vector<double> score_;
};

struct DpChoice {
  double f = 0.0;
  int tau = 0;  // arg-max location
  int d = 0;    // arg-max prefix size
};

// Cells (k, j) for j in [j_first, j_first + cells.size() - 1].
struct DpStage {
  int k = 0;
  int j_first = 0;
  std::vector<DpChoice> cells;

  int j_last() const { return j_first + static_cast<int>(cells.size()) - 1; }
  const DpChoice& at(int j) const { return cells[static_cast<std::size_t>(j - j_first)]; }
};

// Range of cells visited for stage k: [L(k+1), N - L(K-k)] for k < K, {N}
// for k = K.
std::pair<int, int> stage_range(const Hyperparameters& hp, int n, int k);

// Max and arg-max over m in [Lk, j - L], d in [D] of f_prev(m) + C(m, d).
// f_prev returns the stage k-1 score at m (0 for k = 1). Ties go to the
// smallest m, then the smallest d.
template <typename PrevScore>
DpChoice update_dp(const SortTable& table, const Hyperparameters& hp, int k, int j,
                   PrevScore&& f_prev);

struct DetectionTrace {
  SortTable sort;
  std::vector<DpStage> stages;  // stages[k - 1] holds stage k

  // Equality of the combinatorial state: sort orders and every arg-max.
  bool same_as(const DetectionTrace& other) const;
};

struct Detection {
  std::vector<int> locations;                // tau_1 < ... < tau_K, 1-based
  std::vector<std::vector<int>> components;  // theta^k, ascending, 0-based
  std::vector<int> prefix_sizes;             // |theta^k|
  double score = 0.0;
  DetectionTrace trace;

  bool contains(int location, int component) const;
};

// Dynamic program for the K-change-point scan objective. component_scale, if
// given, divides each row before scanning.
Detection detect(const SequenceMatrix& x, const Hyperparameters& hp,
                 std::span<const double> component_scale = {});

// Exhaustive search over every feasible location tuple and every non-empty
// component subset. Guarded to D <= 4, N <= 14, K <= 2.
Detection brute_force_detect(const SequenceMatrix& x, const Hyperparameters& hp);

template <typename PrevScore>
DpChoice update_dp(const SortTable& table, const Hyperparameters& hp, int k, int j,
                   PrevScore&& f_prev) {
  DpChoice best{-std::numeric_limits<double>::infinity(), 0, 0};
  const int m_first = hp.l * k;
  const int m_last = j - hp.l;
  if (m_first > m_last || m_first < table.first() || m_last > table.last()) {
    throw InfeasibleError("empty dynamic-programming range");
  }
  for (int m = m_first; m <= m_last; ++m) {
    const double base = f_prev(m);
    for (int d = 1; d <= table.components(); ++d) {
      const double v = base + table.score(m, d);
      if (v > best.f) best = {v, m, d};
    }
  }
  return best;
}

}  // namespace cpsi
