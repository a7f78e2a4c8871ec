#include "cpsi/interval.hpp"

#include <algorithm>
#include <cmath>

namespace cpsi {

IntervalUnion::IntervalUnion(Interval single) {
  if (single.lo <= single.hi) pieces_.push_back(single);
}

IntervalUnion::IntervalUnion(std::vector<Interval> pieces) {
  std::erase_if(pieces, [](const Interval& i) { return !(i.lo <= i.hi); });
  std::sort(pieces.begin(), pieces.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& p : pieces) {
    if (!pieces_.empty() && p.lo <= pieces_.back().hi) {
      pieces_.back().hi = std::max(pieces_.back().hi, p.hi);
    } else {
      pieces_.push_back(p);
    }
  }
}

bool IntervalUnion::contains(double z) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), z,
                             [](double v, const Interval& i) { return v < i.lo; });
  if (it == pieces_.begin()) return false;
  return std::prev(it)->contains(z);
}

double IntervalUnion::distance(double z) const {
  double best = kInf;
  for (const auto& p : pieces_) {
    if (p.contains(z)) return 0.0;
    best = std::min(best, z < p.lo ? p.lo - z : z - p.hi);
  }
  return best;
}

IntervalUnion IntervalUnion::intersect(const IntervalUnion& other) const {
  std::vector<Interval> out;
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < pieces_.size() && b < other.pieces_.size()) {
    const Interval& x = pieces_[a];
    const Interval& y = other.pieces_[b];
    const double lo = std::max(x.lo, y.lo);
    const double hi = std::min(x.hi, y.hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (x.hi < y.hi) {
      ++a;
    } else {
      ++b;
    }
  }
  IntervalUnion r;
  r.pieces_ = std::move(out);
  return r;
}

IntervalUnion IntervalUnion::unite(const IntervalUnion& other) const {
  std::vector<Interval> all = pieces_;
  all.insert(all.end(), other.pieces_.begin(), other.pieces_.end());
  return IntervalUnion(std::move(all));
}

IntervalUnion IntervalUnion::clamp(double lo, double hi) const {
  return intersect(IntervalUnion(Interval{lo, hi}));
}

IntervalUnion IntervalUnion::merge_gaps(double gap) const {
  IntervalUnion r;
  for (const auto& p : pieces_) {
    if (!r.pieces_.empty() && p.lo - r.pieces_.back().hi <= gap) {
      r.pieces_.back().hi = std::max(r.pieces_.back().hi, p.hi);
    } else {
      r.pieces_.push_back(p);
    }
  }
  return r;
}

bool IntervalUnion::subset_of(const IntervalUnion& other, double tol) const {
  for (const auto& p : pieces_) {
    bool covered = false;
    for (const auto& q : other.pieces_) {
      if (q.lo - tol <= p.lo && p.hi <= q.hi + tol) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

double IntervalUnion::measure() const {
  double total = 0.0;
  for (const auto& p : pieces_) total += p.length();
  return total;
}

namespace {

bool effectively_linear(const QuadraticInequality& q) {
  return std::abs(q.alpha) <= 1e-12 * std::max({std::abs(q.beta), std::abs(q.gamma), 1.0});
}

// Real roots r1 <= r2 of alpha z^2 + beta z + gamma, cancellation-free.
bool real_roots(const QuadraticInequality& q, double& r1, double& r2) {
  const double disc = q.beta * q.beta - 4.0 * q.alpha * q.gamma;
  if (disc < 0.0) return false;
  const double s = std::sqrt(disc);
  const double t = -0.5 * (q.beta + std::copysign(s, q.beta));
  if (t == 0.0) {
    r1 = r2 = 0.0;
  } else {
    r1 = t / q.alpha;
    r2 = q.gamma / t;
  }
  if (r1 > r2) std::swap(r1, r2);
  return true;
}

}  // namespace

IntervalUnion solve_quadratic(const QuadraticInequality& q) {
  if (effectively_linear(q)) {
    if (q.beta == 0.0) return q.gamma <= 0.0 ? IntervalUnion::real_line() : IntervalUnion();
    const double root = -q.gamma / q.beta;
    return q.beta > 0.0 ? IntervalUnion(Interval{-kInf, root}) : IntervalUnion(Interval{root, kInf});
  }
  double r1 = 0.0;
  double r2 = 0.0;
  const bool has_roots = real_roots(q, r1, r2);
  if (q.alpha > 0.0) {
    return has_roots ? IntervalUnion(Interval{r1, r2}) : IntervalUnion();
  }
  if (!has_roots) return IntervalUnion::real_line();
  return IntervalUnion(std::vector<Interval>{{-kInf, r1}, {r2, kInf}});
}

Interval solution_piece(const QuadraticInequality& q, double z, double& violation) {
  violation = 0.0;
  const auto nearest_of = [&](Interval left, Interval right) {
    if (z <= left.hi) return left;
    if (z >= right.lo) return right;
    if (z - left.hi <= right.lo - z) {
      violation = z - left.hi;
      return left;
    }
    violation = right.lo - z;
    return right;
  };
  if (effectively_linear(q)) {
    if (q.beta == 0.0) {
      if (q.gamma <= 0.0) return {};
      violation = kInf;
      return {1.0, 0.0};
    }
    const double root = -q.gamma / q.beta;
    const Interval half = q.beta > 0.0 ? Interval{-kInf, root} : Interval{root, kInf};
    if (!half.contains(z)) violation = std::abs(z - root);
    return half;
  }
  double r1 = 0.0;
  double r2 = 0.0;
  const bool has_roots = real_roots(q, r1, r2);
  if (q.alpha > 0.0) {
    if (!has_roots) {
      violation = kInf;
      return {1.0, 0.0};
    }
    if (z < r1) violation = r1 - z;
    if (z > r2) violation = z - r2;
    return {r1, r2};
  }
  if (!has_roots) return {};
  return nearest_of({-kInf, r1}, {r2, kInf});
}

}  // namespace cpsi
