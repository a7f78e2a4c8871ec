#include "cpsi/scan.hpp"

#include <algorithm>
#include <numeric>

namespace cpsi {

void validate(const Hyperparameters& hp, int n) {
  if (hp.k < 1) throw InputError("K must be at least 1");
  if (hp.l < 1) throw InputError("L must be at least 1");
  if (hp.w < 0 || hp.w >= hp.l) throw InputError("W must satisfy 0 <= W < L");
  if (n < hp.l * (hp.k + 1)) throw InfeasibleError("sequence too short: N < L * (K + 1)");
}

namespace {

void check_segment(const SequenceMatrix& x, int s, int e, int j) {
  if (s < 1 || e > x.locations() || !(s <= j && j < e)) {
    throw InputError("segment indices out of range");
  }
}

double mean_of(std::span<const double> row, int s, int e) {
  double acc = 0.0;
  for (int t = s; t <= e; ++t) acc += row[t - 1];
  return acc / (e - s + 1);
}

double segment_scale(int s, int e, int j) {
  return std::sqrt(static_cast<double>(j - s + 1) * (e - j) / (e - s + 1));
}

}  // namespace

Eigen::VectorXd segment_diff(const SequenceMatrix& x, int s, int e, int j) {
  return windowed_diff(x, s, e, j, 0);
}

Eigen::VectorXd windowed_diff(const SequenceMatrix& x, int s, int e, int j, int w) {
  if (w < 0 || s > j - w || j + w >= e) throw InputError("window exceeds segment");
  check_segment(x, s, e, j);
  const double v = segment_scale(s, e, j);
  Eigen::VectorXd z(x.components());
  for (int i = 0; i < x.components(); ++i) {
    const auto row = x.row(i);
    double acc = 0.0;
    for (int delta = -w; delta <= w; ++delta) {
      acc += mean_of(row, s, j + delta) - mean_of(row, j + delta + 1, e);
    }
    z(i) = v * acc;
  }
  return z;
}

double scan_stat(const SequenceMatrix& x, int s, int e, int j, int w, std::span<const int> theta) {
  if (theta.empty()) throw InputError("scan statistic needs a non-empty component set");
  const Eigen::VectorXd z = windowed_diff(x, s, e, j, w);
  double ss = 0.0;
  for (int i : theta) {
    if (i < 0 || i >= x.components()) throw InputError("component out of range");
    ss += z(i) * z(i);
  }
  return prefix_score(ss, static_cast<int>(theta.size()));
}

WindowStats::WindowStats(const SequenceMatrix& x, const Hyperparameters& hp,
                         std::span<const double> scale)
    : first_(hp.l), last_(x.locations() - hp.l), d_(x.components()) {
  const int n = x.locations();
  const int l = hp.l;
  if (!scale.empty() && static_cast<int>(scale.size()) != d_) {
    throw InputError("component scale length does not match D");
  }
  if (last_ < first_) throw InfeasibleError("no candidate locations: N < 2L");
  values_.assign(static_cast<std::size_t>(last_ - first_ + 1) * d_, 0.0);
  const double v = std::sqrt(l / 2.0);
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < d_; ++i) {
    const auto row = x.row(i);
    const double inv = scale.empty() ? 1.0 : 1.0 / scale[i];
    prefix[0] = 0.0;
    for (int t = 1; t <= n; ++t) prefix[t] = prefix[t - 1] + row[t - 1] * inv;
    for (int m = first_; m <= last_; ++m) {
      const double lo = prefix[m - l];
      const double hi = prefix[m + l];
      double acc = 0.0;
      for (int delta = -hp.w; delta <= hp.w; ++delta) {
        const double mid = prefix[m + delta];
        acc += (mid - lo) / (l + delta) - (hi - mid) / (l - delta);
      }
      values_[index(m, i)] = v * acc;
    }
  }
}

std::vector<int> sort_components(std::span<const double> stats) {
  std::vector<int> order(stats.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return stats[a] * stats[a] > stats[b] * stats[b];
  });
  return order;
}

std::vector<int> sort_components(const SequenceMatrix& x, const Hyperparameters& hp, int m) {
  const WindowStats stats(x, hp);
  if (m < stats.first() || m > stats.last()) throw InputError("candidate location out of range");
  return sort_components(stats.at(m));
}

SortTable::SortTable(const WindowStats& stats)
    : first_(stats.first()), last_(stats.last()), d_(stats.components()) {
  const std::size_t count = static_cast<std::size_t>(last_ - first_ + 1) * d_;
  order_.resize(count);
  score_.resize(count);
  std::vector<double> sq(static_cast<std::size_t>(d_));
  for (int m = first_; m <= last_; ++m) {
    const auto u = stats.at(m);
    for (int i = 0; i < d_; ++i) sq[i] = u[i] * u[i];
    int* ord = order_.data() + offset(m);
    std::iota(ord, ord + d_, 0);
    std::stable_sort(ord, ord + d_, [&](int a, int b) { return sq[a] > sq[b]; });
    double acc = 0.0;
    for (int d = 1; d <= d_; ++d) {
      acc += sq[ord[d - 1]];
      score_[offset(m) + d - 1] = prefix_score(acc, d);
    }
  }
}

std::pair<int, int> stage_range(const Hyperparameters& hp, int n, int k) {
  if (k == hp.k) return {n, n};
  return {hp.l * (k + 1), n - hp.l * (hp.k - k)};
}

bool DetectionTrace::same_as(const DetectionTrace& other) const {
  if (!sort.same_orders(other.sort) || stages.size() != other.stages.size()) return false;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto& a = stages[s].cells;
    const auto& b = other.stages[s].cells;
    if (a.size() != b.size() || stages[s].j_first != other.stages[s].j_first) return false;
    for (std::size_t c = 0; c < a.size(); ++c) {
      if (a[c].tau != b[c].tau || a[c].d != b[c].d) return false;
    }
  }
  return true;
}

bool Detection::contains(int location, int component) const {
  for (std::size_t k = 0; k < locations.size(); ++k) {
    if (locations[k] != location) continue;
    const auto& theta = components[k];
    if (std::binary_search(theta.begin(), theta.end(), component)) return true;
  }
  return false;
}

Detection detect(const SequenceMatrix& x, const Hyperparameters& hp,
                 std::span<const double> component_scale) {
  const int n = x.locations();
  validate(hp, n);
  Detection out;
  out.trace.sort = SortTable(WindowStats(x, hp, component_scale));
  const SortTable& table = out.trace.sort;
  auto& stages = out.trace.stages;
  stages.reserve(static_cast<std::size_t>(hp.k));

  for (int k = 1; k <= hp.k; ++k) {
    const auto [j_first, j_last] = stage_range(hp, n, k);
    DpStage stage{k, j_first, {}};
    stage.cells.reserve(static_cast<std::size_t>(j_last - j_first + 1));
    for (int j = j_first; j <= j_last; ++j) {
      if (k == 1) {
        stage.cells.push_back(update_dp(table, hp, k, j, [](int) { return 0.0; }));
      } else {
        const DpStage& prev = stages.back();
        stage.cells.push_back(update_dp(table, hp, k, j, [&](int m) {
          if (m < prev.j_first || m > prev.j_last()) return -std::numeric_limits<double>::infinity();
          return prev.at(m).f;
        }));
      }
    }
    stages.push_back(std::move(stage));
  }

  out.locations.assign(static_cast<std::size_t>(hp.k), 0);
  out.components.assign(static_cast<std::size_t>(hp.k), {});
  out.prefix_sizes.assign(static_cast<std::size_t>(hp.k), 0);
  out.score = stages.back().at(n).f;
  int j = n;
  for (int k = hp.k; k >= 1; --k) {
    const DpChoice& c = stages[static_cast<std::size_t>(k - 1)].at(j);
    const auto ord = table.order(c.tau);
    std::vector<int> theta(ord.begin(), ord.begin() + c.d);
    std::sort(theta.begin(), theta.end());
    out.locations[static_cast<std::size_t>(k - 1)] = c.tau;
    out.components[static_cast<std::size_t>(k - 1)] = std::move(theta);
    out.prefix_sizes[static_cast<std::size_t>(k - 1)] = c.d;
    j = c.tau;
  }
  return out;
}

}  // namespace cpsi
