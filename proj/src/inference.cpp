#include "cpsi/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "cpsi/errors.hpp"
#include "cpsi/truncated_normal.hpp"

namespace cpsi {

double selective_p(const LineParametrization& line, const TruncationRegion& region) {
  const double below = truncated_normal_cdf(line.z_obs, 0.0, line.sigma_eta2, region);
  const double above = truncated_normal_sf(line.z_obs, 0.0, line.sigma_eta2, region);
  return std::clamp(2.0 * std::min(above, below), 0.0, 1.0);
}

double naive_p(const LineParametrization& line) {
  if (!(line.sigma_eta2 > 0.0)) throw NumericError("naive_p needs positive variance");
  return std::min(1.0, 2.0 * normal_sf(std::abs(line.z_obs) / line.sigma_eta()));
}

namespace {

// Solves upper_tail(mu) = target for mu in [lo, hi], where upper_tail is
// increasing, to within tol.
template <typename F>
double bisect(F&& upper_tail, double target, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (upper_tail(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ConfidenceInterval selective_ci(const LineParametrization& line, const TruncationRegion& region,
                                double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  const double sd = line.sigma_eta();
  const auto upper_tail = [&](double mu) {
    return truncated_normal_sf(line.z_obs, mu, line.sigma_eta2, region);
  };
  const double lo_target = alpha / 2.0;
  const double hi_target = 1.0 - alpha / 2.0;
  const double max_width = 1e6 * sd;
  double width = 10.0 * sd;
  while (!(upper_tail(line.z_obs - width) <= lo_target && upper_tail(line.z_obs + width) >= hi_target)) {
    if (width >= max_width) {
      throw NumericError("confidence interval bracket exceeds 1e6 sigma_eta");
    }
    width = std::min(2.0 * width, max_width);
  }
  const double tol = 1e-7 * sd;
  ConfidenceInterval ci;
  ci.lo = bisect(upper_tail, lo_target, line.z_obs - width, line.z_obs + width, tol);
  ci.hi = bisect(upper_tail, hi_target, line.z_obs - width, line.z_obs + width, tol);
  return ci;
}

SelectiveInference::SelectiveInference(SequenceMatrix x, CovarianceModel cov, Hyperparameters hp)
    : x_(std::move(x)), cov_(std::move(cov)), hp_(hp) {
  if (cov_.components() != x_.components() || cov_.locations() != x_.locations()) {
    throw InputError("covariance dimensions do not match the data");
  }
  const Eigen::VectorXd s = cov_.component_scale();
  scale_.assign(s.data(), s.data() + s.size());
  detection_ = detect(x_, hp_, scale_);
}

int SelectiveInference::tests_at(int k) const {
  return static_cast<int>(detection_.components.at(static_cast<std::size_t>(k)).size());
}

LineParametrization SelectiveInference::line(int k, int h) const {
  const HypothesisDirection dir =
      build_eta(detection_, hp_, k, h, x_.components(), x_.locations());
  return build_line(cov_, dir.eta, x_);
}

LineProblem SelectiveInference::problem(const LineParametrization& line,
                                        const LineSearchOptions& options) const {
  LineProblem p;
  p.line = &line;
  p.hp = hp_;
  p.components = x_.components();
  p.locations = x_.locations();
  p.component_scale = scale_;
  p.tolerance = options.tolerance * line.sigma_eta();
  return p;
}

std::vector<InferenceResult> SelectiveInference::infer(int k, int h,
                                                       std::span<const Conditioning> modes,
                                                       const InferenceOptions& options) const {
  const HypothesisDirection dir =
      build_eta(detection_, hp_, k, h, x_.components(), x_.locations());
  const LineParametrization ln = build_line(cov_, dir.eta, x_);
  const LineProblem prob = problem(ln, options.search);
  const LineGeometry geometry(ln, hp_, x_.components(), x_.locations(), scale_);
  const SearchRange range = search_range(ln, options.search);
  const Sweep sweep = sweep_line(prob, geometry, dir.location, dir.component, detection_.trace,
                                 range, options.search.max_steps);
  std::vector<InferenceResult> out;
  for (Conditioning mode : modes) {
    InferenceResult r;
    r.k = k;
    r.h = h;
    r.location = dir.location;
    r.component = dir.component;
    r.stat = ln.z_obs;
    r.sigma_eta2 = ln.sigma_eta2;
    r.mode = mode;
    r.region = sweep.region(mode);
    if (r.region.distance(ln.z_obs) > prob.tolerance) {
      throw NumericError("observed statistic lies outside its truncation region");
    }
    r.selective_p = selective_p(ln, r.region);
    r.naive_p = naive_p(ln);
    if (options.compute_ci) r.ci = selective_ci(ln, r.region, options.alpha);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<InferenceResult> SelectiveInference::infer_all(std::span<const Conditioning> modes,
                                                           const InferenceOptions& options,
                                                           int jobs) const {
  std::vector<std::pair<int, int>> work;
  for (int k = 0; k < static_cast<int>(detection_.locations.size()); ++k) {
    for (int h = 0; h < tests_at(k); ++h) work.emplace_back(k, h);
  }
  std::vector<std::vector<InferenceResult>> slots(work.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        slots[i] = infer(work[i].first, work[i].second, modes, options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<InferenceResult> out;
  for (auto& s : slots) {
    for (auto& r : s) out.push_back(std::move(r));
  }
  return out;
}

SplitInference data_splitting_infer(const SequenceMatrix& x, const CovarianceModel& cov,
                                    const Hyperparameters& hp) {
  const int n = x.locations();
  if (n < 2 * hp.l * (hp.k + 1)) {
    throw InfeasibleError("data splitting needs N >= 2 L (K + 1)");
  }
  std::vector<int> even;
  std::vector<int> odd;
  for (int j = 1; j <= n; ++j) (j % 2 == 0 ? even : odd).push_back(j);
  const SequenceMatrix x_even = x.select_locations(even);
  const SequenceMatrix x_odd = x.select_locations(odd);
  const CovarianceModel cov_even = cov.restrict_locations(even);
  const CovarianceModel cov_odd = cov.restrict_locations(odd);
  const Eigen::VectorXd scale = cov_even.component_scale();

  SplitInference out;
  out.detection = detect(x_even, hp, std::span<const double>(scale.data(), scale.size()));
  for (std::size_t k = 0; k < out.detection.locations.size(); ++k) {
    const int tau = out.detection.locations[k];
    for (int comp : out.detection.components[k]) {
      const HypothesisDirection dir =
          build_eta(hp, tau, comp, x_odd.components(), x_odd.locations());
      const LineParametrization ln = build_line(cov_odd, dir.eta, x_odd);
      out.tests.push_back({tau, comp, naive_p(ln)});
    }
  }
  return out;
}

}  // namespace cpsi
