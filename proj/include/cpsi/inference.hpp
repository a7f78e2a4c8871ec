#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cpsi/covariance.hpp"
#include "cpsi/line.hpp"
#include "cpsi/line_search.hpp"
#include "cpsi/scan.hpp"

namespace cpsi {

// 2 min(pi, 1 - pi) with pi = P(Z >= z_obs | Z in region), Z ~ N(0, sigma_eta^2).
double selective_p(const LineParametrization& line, const TruncationRegion& region);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

// {mu : alpha/2 <= P_mu(Z >= z_obs | Z in region) <= 1 - alpha/2}, by bisection.
// The bracket starts at z_obs +- 10 sigma_eta and doubles up to 1e6 sigma_eta;
// past that NumericError is thrown.
ConfidenceInterval selective_ci(const LineParametrization& line, const TruncationRegion& region,
                                double alpha);

double naive_p(const LineParametrization& line);

struct InferenceResult {
  int k = 0;          // 0-based
  int h = 0;          // 0-based
  int location = 0;   // 1-based
  int component = 0;  // 0-based
  double stat = 0.0;
  double sigma_eta2 = 0.0;
  double selective_p = 1.0;
  double naive_p = 1.0;
  std::optional<ConfidenceInterval> ci;
  Conditioning mode = Conditioning::minimal;
  TruncationRegion region;
};

struct InferenceOptions {
  double alpha = 0.05;
  bool compute_ci = true;
  LineSearchOptions search;
};

// Detection and inference on one dataset with a known covariance. The
// detector runs on rows divided by the covariance's component scale.
// Immutable after construction; safe to share across threads.
class SelectiveInference {
 public:
  SelectiveInference(SequenceMatrix x, CovarianceModel cov, Hyperparameters hp);

  const SequenceMatrix& data() const { return x_; }
  const CovarianceModel& covariance() const { return cov_; }
  const Hyperparameters& hyperparameters() const { return hp_; }
  const Detection& detection() const { return detection_; }
  std::span<const double> component_scale() const { return scale_; }

  // Number of tests at detected location k.
  int tests_at(int k) const;

  LineParametrization line(int k, int h) const;
  LineProblem problem(const LineParametrization& line, const LineSearchOptions& options) const;

  // One sweep shared by all requested modes.
  std::vector<InferenceResult> infer(int k, int h, std::span<const Conditioning> modes,
                                     const InferenceOptions& options) const;

  // Every detected (k, h), hypotheses spread over `jobs` threads. Results are
  // ordered by (k, h, mode).
  std::vector<InferenceResult> infer_all(std::span<const Conditioning> modes,
                                         const InferenceOptions& options, int jobs = 1) const;

 private:
  SequenceMatrix x_;
  CovarianceModel cov_;
  Hyperparameters hp_;
  std::vector<double> scale_;
  Detection detection_;
};

struct SplitTest {
  int location = 0;   // location index within each half
  int component = 0;  // 0-based
  double p = 1.0;
};

// Detect on even-numbered locations (2, 4, ...), then z-test each detected
// pair on the odd-numbered locations (1, 3, ...) at the same half-sequence
// index, using the covariance restricted to the odd locations.
struct SplitInference {
  Detection detection;  // on the even half
  std::vector<SplitTest> tests;
};
SplitInference data_splitting_infer(const SequenceMatrix& x, const CovarianceModel& cov,
                                    const Hyperparameters& hp);

}  // namespace cpsi
