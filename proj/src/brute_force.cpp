#include <algorithm>
#include <functional>

#include "cpsi/scan.hpp"

namespace cpsi {

Detection brute_force_detect(const SequenceMatrix& x, const Hyperparameters& hp) {
  const int d = x.components();
  const int n = x.locations();
  validate(hp, n);
  if (d > 4 || n > 14 || hp.k > 2) {
    throw InputError("brute_force_detect is limited to D <= 4, N <= 14, K <= 2");
  }

  // Best subset of every size at each location, over all 2^D - 1 subsets.
  struct Best {
    double score;
    unsigned mask;
  };
  std::vector<Best> best_at(static_cast<std::size_t>(n + 1),
                            {-std::numeric_limits<double>::infinity(), 0});
  for (int m = hp.l; m <= n - hp.l; ++m) {
    const Eigen::VectorXd z = windowed_diff(x, m - hp.l + 1, m + hp.l, m, hp.w);
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
      double ss = 0.0;
      int size = 0;
      for (int i = 0; i < d; ++i) {
        if (mask & (1u << i)) {
          ss += z(i) * z(i);
          ++size;
        }
      }
      const double c = prefix_score(ss, size);
      if (c > best_at[m].score) best_at[m] = {c, mask};
    }
  }

  Detection out;
  out.score = -std::numeric_limits<double>::infinity();
  std::vector<int> taus;
  std::function<void(int, double)> walk = [&](int from, double acc) {
    if (static_cast<int>(taus.size()) == hp.k) {
      if (acc > out.score) {
        out.score = acc;
        out.locations = taus;
      }
      return;
    }
    for (int t = from; t <= n - hp.l; ++t) {
      taus.push_back(t);
      walk(t + hp.l, acc + best_at[t].score);
      taus.pop_back();
    }
  };
  walk(hp.l, 0.0);

  for (int t : out.locations) {
    std::vector<int> theta;
    for (int i = 0; i < d; ++i) {
      if (best_at[t].mask & (1u << i)) theta.push_back(i);
    }
    out.prefix_sizes.push_back(static_cast<int>(theta.size()));
    out.components.push_back(std::move(theta));
  }
  return out;
}

}  // namespace cpsi
