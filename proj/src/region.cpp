#include "cpsi/region.hpp"

#include <sstream>

#include "cpsi/errors.hpp"

namespace cpsi {

Eigen::VectorXd window_vector(const Hyperparameters& hp, int n, int tau) {
  if (tau - hp.l + 1 < 1 || tau + hp.l > n) throw InputError("scan window outside the sequence");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int delta = -hp.w; delta <= hp.w; ++delta) {
    for (int j = tau - hp.l + 1; j <= tau + delta; ++j) w(j - 1) += 1.0 / (hp.l + delta);
    for (int j = tau + delta + 1; j <= tau + hp.l; ++j) w(j - 1) -= 1.0 / (hp.l - delta);
  }
  return w;
}

QuadraticInequality quad_coeffs(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                std::span<const ScanTerm> form, double constant,
                                const Hyperparameters& hp, int d, int n,
                                std::span<const double> scale) {
  if (a.size() != static_cast<Eigen::Index>(d) * n || b.size() != a.size()) {
    throw InputError("quad_coeffs: vector length does not match D * N");
  }
  const double v2 = hp.l / 2.0;
  QuadraticInequality q{0.0, 0.0, constant};
  for (const ScanTerm& term : form) {
    if (term.theta.empty()) throw InputError("scan form needs a non-empty component set");
    const Eigen::VectorXd w = window_vector(hp, n, term.tau);
    const double coef = term.weight * v2 / std::sqrt(2.0 * static_cast<double>(term.theta.size()));
    for (int i : term.theta) {
      const double s2 = scale.empty() ? 1.0 : scale[i] * scale[i];
      const double wa = w.dot(a.segment(static_cast<Eigen::Index>(i) * n, n));
      const double wb = w.dot(b.segment(static_cast<Eigen::Index>(i) * n, n));
      q.alpha += coef * wb * wb / s2;
      q.beta += 2.0 * coef * wb * wa / s2;
      q.gamma += coef * wa * wa / s2;
    }
  }
  return q;
}

namespace {

SequenceMatrix block_matrix(const Eigen::VectorXd& v, int d, int n) { return unvec(v, d, n); }

}  // namespace

LineGeometry::LineGeometry(const LineParametrization& line, const Hyperparameters& hp, int d, int n,
                           std::span<const double> scale)
    : offset_(block_matrix(line.a, d, n), hp, scale), slope_(block_matrix(line.b, d, n), hp, scale) {}

Detection LineProblem::detect_at(double z) const {
  return detect(unvec(line->point(z), components, locations), hp, component_scale);
}

namespace {

// Solution piece of lhs <= rhs around z, accepting rounding-level violations
// by stretching the piece to reach z.
struct PieceCheck {
  Interval piece;
  double violation = 0.0;  // in z, after rounding acceptance
};

PieceCheck check_piece(const Quadratic& lhs, const Quadratic& rhs, double z, double tolerance) {
  const Quadratic g = lhs - rhs;
  const QuadraticInequality ineq{g.c2, g.c1, g.c0};
  double dist = 0.0;
  Interval piece = solution_piece(ineq, z, dist);
  if (dist == 0.0) return {piece, 0.0};
  const double slack = 1e-10 * (lhs.magnitude(z) + rhs.magnitude(z));
  if (dist <= tolerance || ineq.value(z) <= slack) {
    if (!(piece.lo <= piece.hi)) return {Interval{}, 0.0};
    return {Interval{std::min(piece.lo, z), std::max(piece.hi, z)}, 0.0};
  }
  return {piece, dist};
}

[[noreturn]] void inconsistent(double z, double dist) {
  std::ostringstream msg;
  msg << "detector trace at z = " << z << " violates its own selection event by " << dist;
  throw NumericError(msg.str());
}

}  // namespace

RegionResult region_for_trace(const LineProblem& problem, const LineGeometry& geometry, double z) {
  RegionResult out{problem.detect_at(z), IntervalUnion::real_line()};
  for_each_trace_inequality(geometry, out.detection, problem.hp,
                            [&](const Quadratic& lhs, const Quadratic& rhs) {
                              const Quadratic g = lhs - rhs;
                              IntervalUnion set = solve_quadratic({g.c2, g.c1, g.c0});
                              if (!set.contains(z)) {
                                const PieceCheck c = check_piece(lhs, rhs, z, problem.tolerance);
                                if (c.violation > 0.0) inconsistent(z, c.violation);
                                set = set.unite(IntervalUnion(c.piece));
                              }
                              out.region = out.region.intersect(set);
                            });
  return out;
}

TracePiece trace_piece(const LineProblem& problem, const LineGeometry& geometry, double z,
                       double lo, double hi) {
  TracePiece out{problem.detect_at(z), Interval{lo, hi}};
  for_each_trace_inequality(geometry, out.detection, problem.hp,
                            [&](const Quadratic& lhs, const Quadratic& rhs) {
                              const PieceCheck c = check_piece(lhs, rhs, z, problem.tolerance);
                              if (c.violation > 0.0) inconsistent(z, c.violation);
                              out.piece.lo = std::max(out.piece.lo, c.piece.lo);
                              out.piece.hi = std::min(out.piece.hi, c.piece.hi);
                            });
  return out;
}

}  // namespace cpsi
