#include <doctest.h>

#include <random>

#include "cpsi/errors.hpp"
#include "cpsi/truncated_normal.hpp"
#include "oracles.hpp"

using namespace cpsi;

TEST_SUITE("truncated_normal") {

TEST_CASE("normal tails") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_sf(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
  // log Q(40) = -804.608442013754...; and mills-ratio branch continuity at 30.
  CHECK(log_normal_sf(40.0) == doctest::Approx(-804.6084420137538).epsilon(1e-13));
  CHECK(log_normal_sf(29.999999) == doctest::Approx(log_normal_sf(30.0)).epsilon(1e-6));
  CHECK(std::isfinite(log_normal_sf(1e4)));
  for (double p : {1e-12, 0.001, 0.025, 0.3, 0.5, 0.9, 0.99}) {
    CHECK(normal_quantile(p) == doctest::Approx(oracle::normal_quantile(p)).epsilon(1e-12));
  }
  // Near 1 the input itself carries ~1e-16 absolute error.
  CHECK(normal_quantile(0.999999) == doctest::Approx(-normal_quantile(1e-6)).epsilon(1e-9));
}

TEST_CASE("cdf on simple regions") {
  CHECK(truncated_normal_cdf(0.0, 0.0, 1.0, IntervalUnion::real_line()) == doctest::Approx(0.5));
  CHECK(truncated_normal_cdf(0.0, 0.0, 1.0, IntervalUnion(Interval{0.0, kInf})) == 0.0);
  const IntervalUnion two({{1, 2}, {3, 4}});
  const double m12 = normal_cdf(2) - normal_cdf(1);
  const double m34 = normal_cdf(4) - normal_cdf(3);
  CHECK(truncated_normal_cdf(2.5, 0.0, 1.0, two) == doctest::Approx(m12 / (m12 + m34)).epsilon(1e-12));
  CHECK(std::abs(truncated_normal_cdf(2.5, 0.0, 1.0, two) - oracle::truncated_cdf(2.5, 0.0, 1.0, two)) < 1e-10);
}

TEST_CASE("cdf matches quadrature on random multi-interval regions") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const double mu = 3.0 * g(rng);
    const double s2 = 0.1 + 4.0 * u(rng);
    const double s = std::sqrt(s2);
    std::vector<Interval> pieces;
    double at = mu + s * (-4.0 + 3.0 * g(rng));
    const int count = 1 + rep % 4;
    for (int i = 0; i < count; ++i) {
      const double lo = at + s * u(rng);
      const double hi = lo + s * (0.05 + 2.0 * u(rng));
      pieces.push_back({lo, hi});
      at = hi;
    }
    const IntervalUnion region(pieces);
    const double x = region.intervals().front().lo +
                     u(rng) * (region.intervals().back().hi - region.intervals().front().lo);
    const double v = truncated_normal_cdf(x, mu, s2, region);
    worst = std::max(worst, std::abs(v - oracle::truncated_cdf(x, mu, s2, region)));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("far tail regions") {
  const IntervalUnion r(Interval{8.0, 9.0});
  const double v = truncated_normal_cdf(8.5, 0.0, 1.0, r);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(std::abs(v - oracle::truncated_cdf(8.5, 0.0, 1.0, r)) < 1e-10);

  // Mass about 1e-282.
  const IntervalUnion deep(Interval{-37.0, -36.0});
  CHECK(std::abs(truncated_normal_cdf(-36.99, 0.0, 1.0, deep) - oracle::truncated_cdf(-36.99, 0.0, 1.0, deep)) <
        1e-10);
  CHECK(truncated_normal_sf(-36.99, 0.0, 1.0, deep) ==
        doctest::Approx(1.0 - truncated_normal_cdf(-36.99, 0.0, 1.0, deep)).epsilon(1e-12));
  // Mass about 1e-348: below the floor.
  CHECK_THROWS_AS(truncated_normal_cdf(-39.5, 0.0, 1.0, IntervalUnion(Interval{-40.0, -39.0})), NumericError);

  CHECK_THROWS_AS(truncated_normal_cdf(50.0, 0.0, 1.0, IntervalUnion(Interval{50.0, 51.0})), NumericError);
  // The survival form has no mass floor.
  const double sf = truncated_normal_sf(50.5, 0.0, 1.0, IntervalUnion(Interval{50.0, 51.0}));
  CHECK(sf > 0.0);
  CHECK(sf < 1.0);
  CHECK_THROWS_AS(truncated_normal_cdf(0.0, 0.0, 0.0, r), NumericError);
}

TEST_CASE("interval masses") {
  CHECK(std::exp(log_interval_mass(-1.0, 1.0, 0.0, 1.0)) == doctest::Approx(0.6826894921370859).epsilon(1e-13));
  CHECK(log_interval_mass(1.0, 0.0, 0.0, 1.0) == -kInf);
  CHECK(std::exp(log_interval_mass(-kInf, kInf, 2.0, 3.0)) == doctest::Approx(1.0));
}

}
