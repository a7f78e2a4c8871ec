#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cpsi/covariance.hpp"
#include "cpsi/hyperparameters.hpp"
#include "cpsi/line_search.hpp"
#include "cpsi/sequence.hpp"

namespace cpsi {

// Seed of the substream for one trial: SplitMix64 finalizer over
// (seed, stream), so trials can run in any order.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

// Draws vec(X) ~ N(vec(mean), Xi (x) Sigma) via Cholesky factors of both.
SequenceMatrix gen_gaussian(const RowMatrix& mean, const CovarianceModel& cov, std::mt19937_64& rng);
SequenceMatrix gen_null(int locations, int components, const CovarianceModel& cov,
                        std::mt19937_64& rng);

// Mean matrices of the synthetic power and confidence-interval setups
// (N = 30, D = 5).
RowMatrix gen_power_mean(double delta_mu);
RowMatrix gen_ci_mean();

struct TrueChange {
  int location = 0;             // 1-based
  std::vector<int> components;  // 0-based, ascending
};
std::vector<TrueChange> power_truth();
std::vector<TrueChange> ci_truth();

// Greedy one-to-one matching of detected to true locations within +-tolerance,
// nearest pairs first. Entry k is the index into truth, or -1.
std::vector<int> match_locations(const std::vector<int>& detected,
                                 const std::vector<TrueChange>& truth, int tolerance);

enum class Scenario { null, power, ci };
enum class NoiseModel { independence, ar1 };
enum class Method { mc, oc, naive, ds };

const char* to_string(Scenario s);
const char* to_string(NoiseModel m);
const char* to_string(Method m);
Scenario scenario_from_string(const std::string& s);
NoiseModel noise_from_string(const std::string& s);
Method method_from_string(const std::string& s);

struct ExperimentConfig {
  Scenario scenario = Scenario::null;
  int n_trials = 1000;
  int locations = 30;
  int components = 5;
  Hyperparameters hp{2, 5, 3};
  NoiseModel noise = NoiseModel::independence;
  double sigma2 = 1.0;
  double rho = 0.5;
  double delta_mu = 0.0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::mc, Method::oc, Method::naive, Method::ds};
  int match_tolerance = 2;
  int jobs = 1;
  bool keep_trials = false;
  LineSearchOptions search;
};

// Defaults of each synthetic setup: null (K, L, W) = (2, 5, 3); power and
// ci (2, 5, 1); ci runs 100 trials of mc and oc.
ExperimentConfig default_config(Scenario scenario);

CovarianceModel experiment_covariance(const ExperimentConfig& config);

struct TestRecord {
  int trial = 0;
  Method method = Method::mc;
  int location = 0;   // 1-based (ds: index within the half sequence)
  int component = 0;  // 0-based
  double p = 1.0;
  bool rejected = false;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
};

struct MethodSummary {
  Method method = Method::mc;
  int tests = 0;
  int rejections = 0;
  double rate = 0.0;      // FPR or conditional power
  double std_error = 0.0; // binomial
  // Exact binomial 95% acceptance band of the rejection rate under alpha
  // (null scenario).
  double band_lo = 0.0;
  double band_hi = 0.0;
  bool insufficient = false;  // power with no correctly detected pairs
  // ci scenario
  int ci_count = 0;
  int ci_unbounded = 0;
  double mean_ci_length = 0.0;
  double median_ci_length = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  int trials_run = 0;
  std::vector<MethodSummary> methods;
  std::vector<TestRecord> records;  // kept when config.keep_trials

  const MethodSummary& summary(Method m) const;
};

// 2.5% and 97.5% quantiles of Binomial(n, p): the smallest counts whose CDF
// reaches 0.025 and 0.975.
std::pair<int, int> binomial_band(int n, double p);

ExperimentReport run_fpr(const ExperimentConfig& config);
ExperimentReport run_power(const ExperimentConfig& config);
ExperimentReport run_ci(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace cpsi
