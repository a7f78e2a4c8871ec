#include "cpsi/line_search.hpp"

#include <sstream>

#include "cpsi/errors.hpp"

namespace cpsi {

const char* to_string(Conditioning mode) { return mode == Conditioning::minimal ? "mc" : "oc"; }

Conditioning conditioning_from_string(const std::string& s) {
  if (s == "mc") return Conditioning::minimal;
  if (s == "oc") return Conditioning::over;
  throw InputError("mode must be mc or oc, got '" + s + "'");
}

SearchRange search_range(const LineParametrization& line, const LineSearchOptions& options) {
  if (options.wide_range) {
    SearchRange r{-1e6, 1e6, 1e-6};
    r.lo = std::min(r.lo, line.z_obs - 1.0);
    r.hi = std::max(r.hi, line.z_obs + 1.0);
    return r;
  }
  if (!(options.half_width > 0.0) || !(options.delta > 0.0)) {
    throw InputError("search half-width and delta must be positive");
  }
  const double sd = line.sigma_eta();
  SearchRange r{-options.half_width * sd, options.half_width * sd, options.delta * sd};
  r.lo = std::min(r.lo, line.z_obs - 10.0 * sd);
  r.hi = std::max(r.hi, line.z_obs + 10.0 * sd);
  return r;
}

TruncationRegion Sweep::region(Conditioning mode) const {
  std::vector<Interval> pieces;
  for (const auto& s : segments) {
    const bool keep = mode == Conditioning::minimal ? s.selected : s.observed_trace;
    if (keep) pieces.push_back(s.piece);
  }
  return IntervalUnion(std::move(pieces)).merge_gaps(2.0 * range.delta).clamp(range.lo, range.hi);
}

Sweep sweep_line(const LineProblem& problem, const LineGeometry& geometry, int location,
                 int component, const DetectionTrace& observed, const SearchRange& range,
                 std::size_t max_steps) {
  Sweep sweep;
  sweep.range = range;
  double z = range.lo;
  std::size_t steps = 0;
  while (z <= range.hi) {
    if (++steps >= max_steps) {
      std::ostringstream msg;
      msg << "line search exceeded " << max_steps << " steps at z = " << z
          << " (delta = " << range.delta << ")";
      throw NumericError(msg.str());
    }
    TracePiece tp = trace_piece(problem, geometry, z, range.lo, range.hi);
    SweepSegment seg;
    seg.piece = tp.piece;
    seg.selected = tp.detection.contains(location, component);
    seg.observed_trace = tp.detection.trace.same_as(observed);
    sweep.segments.push_back(seg);
    z = std::max(tp.piece.hi, z) + range.delta;
  }
  return sweep;
}

TruncationRegion line_search(const LineProblem& problem, const LineGeometry& geometry,
                             int location, int component, const DetectionTrace& observed,
                             Conditioning mode, const LineSearchOptions& options) {
  if (!(options.delta > 0.0)) throw InputError("delta must be positive");
  const SearchRange range = search_range(*problem.line, options);
  return sweep_line(problem, geometry, location, component, observed, range, options.max_steps)
      .region(mode);
}

}  // namespace cpsi
