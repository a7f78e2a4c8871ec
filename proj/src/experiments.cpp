#include "cpsi/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "cpsi/errors.hpp"
#include "cpsi/inference.hpp"

namespace cpsi {

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  return std::mt19937_64(substream_seed(seed, trial));
}

SequenceMatrix gen_gaussian(const RowMatrix& mean, const CovarianceModel& cov,
                            std::mt19937_64& rng) {
  const int d = cov.components();
  const int n = cov.locations();
  if (mean.rows() != d || mean.cols() != n) throw InputError("mean does not match covariance");
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix e(d, n);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < n; ++j) e(i, j) = normal(rng);
  }
  // X = L_xi E L_sigma' has vec-covariance Xi (x) Sigma under row stacking.
  Eigen::LLT<Eigen::MatrixXd> sigma_chol(cov.sigma());
  if (sigma_chol.info() != Eigen::Success) throw NumericError("sigma is not positive definite");
  RowMatrix x = e * sigma_chol.matrixL().transpose();
  if (!cov.xi_is_identity()) {
    Eigen::LLT<Eigen::MatrixXd> xi_chol(cov.xi());
    if (xi_chol.info() != Eigen::Success) throw NumericError("xi is not positive definite");
    x = xi_chol.matrixL() * x;
  }
  return SequenceMatrix(x + mean);
}

SequenceMatrix gen_null(int n, int d, const CovarianceModel& cov, std::mt19937_64& rng) {
  return gen_gaussian(RowMatrix::Zero(d, n), cov, rng);
}

RowMatrix gen_power_mean(double delta_mu) {
  RowMatrix m = RowMatrix::Zero(5, 30);
  for (int j = 1; j <= 30; ++j) {
    m(0, j - 1) = (j >= 11 && j <= 20) ? delta_mu : 0.0;
    m(1, j - 1) = m(2, j - 1) = j >= 11 ? delta_mu : 0.0;
    m(3, j - 1) = m(4, j - 1) = j <= 20 ? delta_mu : 0.0;
  }
  return m;
}

RowMatrix gen_ci_mean() {
  RowMatrix m = RowMatrix::Zero(5, 30);
  for (int j = 1; j <= 30; ++j) {
    m(0, j - 1) = j <= 10 ? 4.0 : (j <= 20 ? 2.0 : 0.0);
    m(1, j - 1) = m(2, j - 1) = j <= 10 ? 2.0 : 0.0;
  }
  return m;
}

std::vector<TrueChange> power_truth() { return {{10, {0, 1, 2}}, {20, {0, 3, 4}}}; }
std::vector<TrueChange> ci_truth() { return {{10, {0, 1, 2}}, {20, {0}}}; }

std::vector<int> match_locations(const std::vector<int>& detected,
                                 const std::vector<TrueChange>& truth, int tolerance) {
  struct Pair {
    int dist, k, t;
  };
  std::vector<Pair> pairs;
  for (int k = 0; k < static_cast<int>(detected.size()); ++k) {
    for (int t = 0; t < static_cast<int>(truth.size()); ++t) {
      const int dist = std::abs(detected[k] - truth[t].location);
      if (dist <= tolerance) pairs.push_back({dist, k, t});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
  std::vector<int> match(detected.size(), -1);
  std::vector<bool> used(truth.size(), false);
  for (const Pair& p : pairs) {
    if (match[p.k] >= 0 || used[p.t]) continue;
    match[p.k] = p.t;
    used[p.t] = true;
  }
  return match;
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::null: return "null";
    case Scenario::power: return "power";
    case Scenario::ci: return "ci";
  }
  return "?";
}

const char* to_string(NoiseModel m) { return m == NoiseModel::independence ? "independence" : "ar1"; }

const char* to_string(Method m) {
  switch (m) {
    case Method::mc: return "mc";
    case Method::oc: return "oc";
    case Method::naive: return "naive";
    case Method::ds: return "ds";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "null") return Scenario::null;
  if (s == "power") return Scenario::power;
  if (s == "ci") return Scenario::ci;
  throw InputError("unknown scenario '" + s + "'");
}

NoiseModel noise_from_string(const std::string& s) {
  if (s == "independence" || s == "iid") return NoiseModel::independence;
  if (s == "ar1") return NoiseModel::ar1;
  throw InputError("unknown covariance '" + s + "'");
}

Method method_from_string(const std::string& s) {
  if (s == "mc") return Method::mc;
  if (s == "oc") return Method::oc;
  if (s == "naive") return Method::naive;
  if (s == "ds") return Method::ds;
  throw InputError("unknown method '" + s + "'");
}

ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  if (scenario == Scenario::power) {
    c.hp = {2, 5, 1};
    c.delta_mu = 1.0;
    c.methods = {Method::mc, Method::oc};
  } else if (scenario == Scenario::ci) {
    c.hp = {2, 5, 1};
    c.n_trials = 100;
    c.methods = {Method::mc, Method::oc};
  }
  return c;
}

CovarianceModel experiment_covariance(const ExperimentConfig& c) {
  if (c.noise == NoiseModel::independence) {
    return CovarianceModel::iid(c.components, c.locations, c.sigma2);
  }
  return CovarianceModel::ar1(c.components, c.locations, c.sigma2, c.rho);
}

const MethodSummary& ExperimentReport::summary(Method m) const {
  for (const auto& s : methods) {
    if (s.method == m) return s;
  }
  throw InputError(std::string("method not in report: ") + to_string(m));
}

std::pair<int, int> binomial_band(int n, double p) {
  if (n <= 0) return {0, 0};
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  int lo = -1;
  int hi = n;
  double cdf = 0.0;
  for (int k = 0; k <= n; ++k) {
    cdf += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                    k * lp + (n - k) * lq);
    if (lo < 0 && cdf >= 0.025) lo = k;
    if (cdf >= 0.975) {
      hi = k;
      break;
    }
  }
  return {std::max(lo, 0), hi};
}

namespace {

bool wants(const ExperimentConfig& c, Method m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

std::vector<Conditioning> selective_modes(const ExperimentConfig& c) {
  std::vector<Conditioning> modes;
  if (wants(c, Method::mc)) modes.push_back(Conditioning::minimal);
  if (wants(c, Method::oc)) modes.push_back(Conditioning::over);
  return modes;
}

Method as_method(Conditioning c) { return c == Conditioning::minimal ? Method::mc : Method::oc; }

template <typename Trial>
std::vector<std::vector<TestRecord>> run_trials(const ExperimentConfig& c, Trial&& trial) {
  if (c.n_trials < 1) throw InputError("n_trials must be at least 1");
  std::vector<std::vector<TestRecord>> out(static_cast<std::size_t>(c.n_trials));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (int t = next++; t < c.n_trials; t = next++) {
      try {
        std::mt19937_64 rng = trial_rng(c.seed, static_cast<std::uint64_t>(t));
        out[static_cast<std::size_t>(t)] = trial(t, rng);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(c.jobs, c.n_trials));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

ExperimentReport summarize(const ExperimentConfig& c, std::vector<std::vector<TestRecord>> trials) {
  ExperimentReport report;
  report.config = c;
  report.trials_run = c.n_trials;
  for (Method m : c.methods) {
    MethodSummary s;
    s.method = m;
    std::vector<double> lengths;
    for (const auto& trial : trials) {
      for (const auto& r : trial) {
        if (r.method != m) continue;
        ++s.tests;
        if (r.rejected) ++s.rejections;
        if (c.scenario == Scenario::ci) {
          if (r.ci_lo && r.ci_hi) {
            lengths.push_back(*r.ci_hi - *r.ci_lo);
          } else {
            ++s.ci_unbounded;
          }
        }
      }
    }
    if (s.tests > 0) {
      s.rate = static_cast<double>(s.rejections) / s.tests;
      s.std_error = std::sqrt(s.rate * (1.0 - s.rate) / s.tests);
    }
    s.insufficient = c.scenario == Scenario::power && s.tests == 0;
    if (c.scenario == Scenario::null && s.tests > 0) {
      const auto [lo, hi] = binomial_band(s.tests, c.alpha);
      s.band_lo = static_cast<double>(lo) / s.tests;
      s.band_hi = static_cast<double>(hi) / s.tests;
    }
    if (!lengths.empty()) {
      s.ci_count = static_cast<int>(lengths.size());
      double total = 0.0;
      for (double v : lengths) total += v;
      s.mean_ci_length = total / lengths.size();
      std::sort(lengths.begin(), lengths.end());
      const std::size_t mid = lengths.size() / 2;
      s.median_ci_length = lengths.size() % 2 ? lengths[mid] : 0.5 * (lengths[mid - 1] + lengths[mid]);
    }
    report.methods.push_back(s);
  }
  if (c.keep_trials) {
    for (auto& trial : trials) {
      for (auto& r : trial) report.records.push_back(std::move(r));
    }
  }
  return report;
}

InferenceOptions inference_options(const ExperimentConfig& c, bool with_ci) {
  InferenceOptions o;
  o.alpha = c.alpha;
  o.compute_ci = with_ci;
  o.search = c.search;
  return o;
}

TestRecord record_of(int trial, const InferenceResult& r, double alpha) {
  TestRecord t;
  t.trial = trial;
  t.method = as_method(r.mode);
  t.location = r.location;
  t.component = r.component;
  t.p = r.selective_p;
  t.rejected = r.selective_p <= alpha;
  if (r.ci) {
    t.ci_lo = r.ci->lo;
    t.ci_hi = r.ci->hi;
  }
  return t;
}

void check_dims(const ExperimentConfig& c, int n, int d) {
  if (c.locations != n || c.components != d) {
    throw InputError("this scenario is defined for N = 30, D = 5");
  }
}

}  // namespace

ExperimentReport run_fpr(const ExperimentConfig& c) {
  if (c.scenario != Scenario::null) throw InputError("run_fpr needs the null scenario");
  const CovarianceModel cov = experiment_covariance(c);
  const auto modes = selective_modes(c);
  const InferenceOptions options = inference_options(c, false);
  auto trials = run_trials(c, [&](int t, std::mt19937_64& rng) {
    std::vector<TestRecord> recs;
    const SequenceMatrix x = gen_null(c.locations, c.components, cov, rng);
    std::uniform_int_distribution<int> pick(0, c.hp.k - 1);
    const int k = pick(rng);
    const int k_split = pick(rng);
    if (!modes.empty() || wants(c, Method::naive)) {
      const SelectiveInference si(x, cov, c.hp);
      for (int h = 0; h < si.tests_at(k); ++h) {
        if (!modes.empty()) {
          for (const auto& r : si.infer(k, h, modes, options)) recs.push_back(record_of(t, r, c.alpha));
        }
        if (wants(c, Method::naive)) {
          const double p = naive_p(si.line(k, h));
          const auto& det = si.detection();
          recs.push_back({t, Method::naive, det.locations[static_cast<std::size_t>(k)],
                          det.components[static_cast<std::size_t>(k)][static_cast<std::size_t>(h)], p,
                          p <= c.alpha, {}, {}});
        }
      }
    }
    if (wants(c, Method::ds)) {
      const SplitInference ds = data_splitting_infer(x, cov, c.hp);
      const int tau = ds.detection.locations[static_cast<std::size_t>(k_split)];
      for (const auto& test : ds.tests) {
        if (test.location != tau) continue;
        recs.push_back({t, Method::ds, test.location, test.component, test.p, test.p <= c.alpha, {}, {}});
      }
    }
    return recs;
  });
  return summarize(c, std::move(trials));
}

namespace {

// Tests every detected pair whose location matches a true change and whose
// component is among that change's components.
ExperimentReport run_signal(const ExperimentConfig& c, const RowMatrix& mean,
                            const std::vector<TrueChange>& truth, bool with_ci) {
  check_dims(c, static_cast<int>(mean.cols()), static_cast<int>(mean.rows()));
  const CovarianceModel cov = experiment_covariance(c);
  const auto modes = selective_modes(c);
  const InferenceOptions options = inference_options(c, with_ci);
  auto trials = run_trials(c, [&](int t, std::mt19937_64& rng) {
    std::vector<TestRecord> recs;
    const SequenceMatrix x = gen_gaussian(mean, cov, rng);
    const SelectiveInference si(x, cov, c.hp);
    const auto& det = si.detection();
    const std::vector<int> match =
        with_ci ? std::vector<int>(det.locations.size(), 0)
                : match_locations(det.locations, truth, c.match_tolerance);
    for (int k = 0; k < static_cast<int>(det.locations.size()); ++k) {
      if (match[static_cast<std::size_t>(k)] < 0) continue;
      const auto& truth_comps = truth[static_cast<std::size_t>(match[static_cast<std::size_t>(k)])].components;
      for (int h = 0; h < si.tests_at(k); ++h) {
        const int comp = det.components[static_cast<std::size_t>(k)][static_cast<std::size_t>(h)];
        if (!with_ci && !std::binary_search(truth_comps.begin(), truth_comps.end(), comp)) continue;
        if (!modes.empty()) {
          InferenceOptions o = options;
          o.compute_ci = false;
          for (auto& r : si.infer(k, h, modes, o)) {
            if (with_ci) {
              const LineParametrization ln = si.line(k, h);
              try {
                r.ci = selective_ci(ln, r.region, c.alpha);
              } catch (const NumericError&) {
                r.ci.reset();
              }
            }
            recs.push_back(record_of(t, r, c.alpha));
          }
        }
        if (wants(c, Method::naive)) {
          const double p = naive_p(si.line(k, h));
          recs.push_back({t, Method::naive, det.locations[static_cast<std::size_t>(k)], comp, p,
                          p <= c.alpha, {}, {}});
        }
      }
    }
    return recs;
  });
  return summarize(c, std::move(trials));
}

}  // namespace

ExperimentReport run_power(const ExperimentConfig& c) {
  if (c.scenario != Scenario::power) throw InputError("run_power needs the power scenario");
  if (wants(c, Method::ds)) throw InputError("data splitting is not part of the power scenario");
  return run_signal(c, gen_power_mean(c.delta_mu), power_truth(), false);
}

ExperimentReport run_ci(const ExperimentConfig& c) {
  if (c.scenario != Scenario::ci) throw InputError("run_ci needs the ci scenario");
  if (wants(c, Method::ds) || wants(c, Method::naive)) {
    throw InputError("the ci scenario compares mc and oc only");
  }
  return run_signal(c, gen_ci_mean(), ci_truth(), true);
}

ExperimentReport run_experiment(const ExperimentConfig& c) {
  switch (c.scenario) {
    case Scenario::null: return run_fpr(c);
    case Scenario::power: return run_power(c);
    case Scenario::ci: return run_ci(c);
  }
  throw InputError("unknown scenario");
}

}  // namespace cpsi
