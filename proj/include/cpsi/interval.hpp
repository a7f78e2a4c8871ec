#pragma once

#include <limits>
#include <vector>

namespace cpsi {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double z) const { return lo <= z && z <= hi; }
  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Finite union of disjoint closed intervals, kept sorted with hi_i < lo_{i+1}.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(Interval single);
  // Normalizes: drops empty pieces, sorts, merges overlaps.
  explicit IntervalUnion(std::vector<Interval> pieces);

  static IntervalUnion real_line() { return IntervalUnion(Interval{}); }

  const std::vector<Interval>& intervals() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  bool empty() const { return pieces_.empty(); }

  bool contains(double z) const;
  // Distance from z to the set (0 inside, +inf for the empty set).
  double distance(double z) const;

  IntervalUnion intersect(const IntervalUnion& other) const;
  IntervalUnion unite(const IntervalUnion& other) const;
  IntervalUnion clamp(double lo, double hi) const;
  // Joins neighbours separated by at most gap.
  IntervalUnion merge_gaps(double gap) const;
  // True if every point of this union lies in other.
  bool subset_of(const IntervalUnion& other, double tol = 0.0) const;
  double measure() const;

  friend bool operator==(const IntervalUnion&, const IntervalUnion&) = default;

 private:
  std::vector<Interval> pieces_;
};

using TruncationRegion = IntervalUnion;

// alpha z^2 + beta z + gamma <= 0.
struct QuadraticInequality {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  double value(double z) const { return (alpha * z + beta) * z + gamma; }
};

// Exact solution set of a quadratic inequality: empty, one interval, two
// unbounded intervals, or the real line. |alpha| <= 1e-12 max(|beta|, |gamma|, 1)
// is treated as linear.
IntervalUnion solve_quadratic(const QuadraticInequality& q);

// Connected piece of the solution set of q around z. If z is outside the set
// it is taken to lie on the nearest piece, with `violation` set to its
// distance (0 when z satisfies q). Returns an empty (lo > hi) interval for an
// empty solution set.
Interval solution_piece(const QuadraticInequality& q, double z, double& violation);

}  // namespace cpsi
