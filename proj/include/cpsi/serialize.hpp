#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpsi/covariance.hpp"
#include "cpsi/experiments.hpp"
#include "cpsi/inference.hpp"
#include "cpsi/scan.hpp"

namespace cpsi {

using Json = nlohmann::ordered_json;

// Locations and components are 1-based in every external format.
Json to_json(const Detection& det, const Hyperparameters& hp);
Json trace_to_json(const DetectionTrace& trace);
Json to_json(const InferenceResult& r);
Json to_json(const Hyperparameters& hp);
Json to_json(const LineSearchOptions& o);

void write_inference_csv(std::ostream& out, std::span<const InferenceResult> results);

// {"xi": "identity" | [[...]], "sigma": {"kind": "iid", "sigma2": s}
//  | {"kind": "ar1", "sigma2": s, "rho": r} | {"kind": "dense", "matrix": [[...]]}}
CovarianceModel covariance_from_json(const Json& j, int components, int locations);
Json covariance_to_json(const CovarianceModel& cov);

ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);
Json to_json(const ExperimentReport& r);
void write_trials_csv(std::ostream& out, std::span<const TestRecord> records);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace cpsi
