#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cpsi/interval.hpp"
#include "cpsi/region.hpp"

namespace cpsi {

// minimal: condition on the tested pair being detected.
// over: condition on the whole detection trace.
enum class Conditioning { minimal, over };

const char* to_string(Conditioning mode);
Conditioning conditioning_from_string(const std::string& s);

struct LineSearchOptions {
  // Search range [-half_width, half_width] in units of sigma_eta, widened to
  // keep z_obs at least 10 sigma_eta inside.
  double half_width = 20.0;
  // Step past each piece, in units of sigma_eta.
  double delta = 1e-6;
  // Absolute range [-1e6, 1e6] and absolute step 1e-6 instead.
  bool wide_range = false;
  std::size_t max_steps = 1'000'000;
  // Self-membership tolerance, in units of sigma_eta.
  double tolerance = 1e-7;
};

struct SearchRange {
  double lo = 0.0;
  double hi = 0.0;
  double delta = 0.0;
};

SearchRange search_range(const LineParametrization& line, const LineSearchOptions& options);

struct SweepSegment {
  Interval piece;
  bool selected = false;        // target pair in the detector output
  bool observed_trace = false;  // whole trace equals the observed one
};

struct Sweep {
  SearchRange range;
  std::vector<SweepSegment> segments;

  TruncationRegion region(Conditioning mode) const;
};

// Walks z over the search range one constant-trace piece at a time.
Sweep sweep_line(const LineProblem& problem, const LineGeometry& geometry, int location,
                 int component, const DetectionTrace& observed, const SearchRange& range,
                 std::size_t max_steps);

// Truncation region of the target pair under the given conditioning.
TruncationRegion line_search(const LineProblem& problem, const LineGeometry& geometry,
                             int location, int component, const DetectionTrace& observed,
                             Conditioning mode, const LineSearchOptions& options);

}  // namespace cpsi
