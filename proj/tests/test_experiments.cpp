#include <doctest.h>

#include <cmath>

#include "cpsi/errors.hpp"
#include "cpsi/experiments.hpp"
#include "oracles.hpp"

using namespace cpsi;

TEST_SUITE("experiments") {

TEST_CASE("substreams are deterministic and distinct") {
  CHECK(substream_seed(1, 0) == substream_seed(1, 0));
  CHECK(substream_seed(1, 0) != substream_seed(1, 1));
  CHECK(substream_seed(1, 0) != substream_seed(2, 0));
  auto a = trial_rng(5, 3);
  auto b = trial_rng(5, 3);
  CHECK(a() == b());
}

TEST_CASE("gen_null moments") {
  auto rng = trial_rng(1, 0);
  const CovarianceModel iid = CovarianceModel::iid(1, 1, 1.0);
  double acc = 0.0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) acc += gen_null(1, 1, iid, rng).at(0, 1);
  CHECK(std::abs(acc / n) < 3e-2);

  // Ten rows of 1000 locations: about 10^4 lag-1 pairs.
  const CovarianceModel ar = CovarianceModel::ar1(10, 1000, 1.0, 0.5);
  const SequenceMatrix x = gen_null(1000, 10, ar, rng);
  double s0 = 0.0;
  double s1 = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double mu = x.values().row(i).mean();
    for (int j = 1; j <= 1000; ++j) {
      const double c = x.at(i, j) - mu;
      s0 += c * c;
      if (j > 1) s1 += c * (x.at(i, j - 1) - mu);
    }
  }
  CHECK(std::abs(s1 / s0 - 0.5) < 0.03);
}

TEST_CASE("gen_null is reproducible") {
  const CovarianceModel cov = CovarianceModel::ar1(5, 30, 1.0, 0.5);
  auto r1 = trial_rng(9, 4);
  auto r2 = trial_rng(9, 4);
  CHECK(gen_null(30, 5, cov, r1).values() == gen_null(30, 5, cov, r2).values());
}

TEST_CASE("gen_gaussian covariance with a dense Xi") {
  std::mt19937_64 seed_rng(2);
  const Eigen::MatrixXd xi = oracle::random_psd(2, seed_rng);
  const CovarianceModel cov(xi, Ar1{1.0, 0.6}, 3);
  const Eigen::MatrixXd dense = oracle::dense_kron(xi, expand_sigma(Ar1{1.0, 0.6}, 3));
  auto rng = trial_rng(3, 0);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(6, 6);
  const int n = 40000;
  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd v = vec(gen_gaussian(RowMatrix::Zero(2, 3), cov, rng));
    acc += v * v.transpose();
  }
  acc /= n;
  CHECK((acc - dense).cwiseAbs().maxCoeff() < 0.06 * dense.cwiseAbs().maxCoeff());
}

TEST_CASE("power mean matrix") {
  const RowMatrix m = gen_power_mean(2.0);
  CHECK(m(0, 14) == 2.0);
  CHECK(m(0, 24) == 0.0);
  CHECK(m(3, 4) == 2.0);
  CHECK(m(3, 24) == 0.0);
  CHECK(m(0, 9) == 0.0);
  CHECK(m(1, 9) == 0.0);
  CHECK(m(1, 10) == 2.0);
  CHECK(m(2, 29) == 2.0);
  CHECK(m(4, 19) == 2.0);
  CHECK(m(4, 20) == 0.0);
  CHECK(gen_power_mean(0.0).isZero(0.0));
  const auto truth = power_truth();
  REQUIRE(truth.size() == 2);
  CHECK(truth[0].location == 10);
  CHECK(truth[0].components == std::vector<int>{0, 1, 2});
  CHECK(truth[1].location == 20);
  CHECK(truth[1].components == std::vector<int>{0, 3, 4});
}

TEST_CASE("ci mean matrix") {
  const RowMatrix m = gen_ci_mean();
  CHECK(m(0, 0) == 4.0);
  CHECK(m(0, 14) == 2.0);
  CHECK(m(0, 29) == 0.0);
  CHECK(m.row(3).isZero(0.0));
  CHECK(m.row(4).isZero(0.0));
  Eigen::VectorXd col(5);
  col << 4, 2, 2, 0, 0;
  CHECK(m.col(0) == col);
}

TEST_CASE("location matching") {
  const auto truth = power_truth();
  CHECK(match_locations({10, 20}, truth, 2) == std::vector<int>{0, 1});
  CHECK(match_locations({12, 19}, truth, 2) == std::vector<int>{0, 1});
  CHECK(match_locations({13, 25}, truth, 2) == std::vector<int>{-1, -1});
  // Both near location 10: the nearer one wins, the other is unmatched.
  CHECK(match_locations({9, 11}, std::vector<TrueChange>{{10, {0}}}, 2) == std::vector<int>{0, -1});
  CHECK(match_locations({8, 11}, std::vector<TrueChange>{{10, {0}}}, 2) == std::vector<int>{-1, 0});
}

TEST_CASE("binomial band") {
  // Quantiles by direct summation of the pmf.
  const int n = 1500;
  const double p = 0.05;
  const auto [lo, hi] = binomial_band(n, p);
  double cdf = 0.0;
  int ref_lo = -1;
  int ref_hi = -1;
  for (int k = 0; k <= n; ++k) {
    double lpmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                  (n - k) * std::log(1 - p);
    cdf += std::exp(lpmf);
    if (ref_lo < 0 && cdf >= 0.025) ref_lo = k;
    if (ref_hi < 0 && cdf >= 0.975) ref_hi = k;
  }
  CHECK(lo == ref_lo);
  CHECK(hi == ref_hi);
  CHECK(lo < 75);
  CHECK(hi > 75);
}

TEST_CASE("small null run is reproducible and order independent") {
  ExperimentConfig c = default_config(Scenario::null);
  c.n_trials = 30;
  c.seed = 123;
  c.keep_trials = true;
  const ExperimentReport a = run_fpr(c);
  c.jobs = 3;
  const ExperimentReport b = run_fpr(c);
  REQUIRE(a.methods.size() == 4);
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    CHECK(a.methods[i].tests == b.methods[i].tests);
    CHECK(a.methods[i].rate == b.methods[i].rate);
  }
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].p == b.records[i].p);
  // Each trial tests one location per method, all its components.
  for (const auto& s : a.methods) {
    CHECK(s.tests >= c.n_trials);
    CHECK(s.tests <= c.n_trials * c.components);
    CHECK(s.rate >= 0.0);
    CHECK(s.rate <= 1.0);
  }
  CHECK(a.summary(Method::mc).tests == a.summary(Method::oc).tests);
}

TEST_CASE("power run flags insufficiency without signal") {
  ExperimentConfig c = default_config(Scenario::power);
  c.n_trials = 20;
  c.delta_mu = 0.0;
  c.seed = 4;
  const ExperimentReport r = run_power(c);
  for (const auto& s : r.methods) {
    CHECK(s.tests < 20);
    CHECK(s.insufficient == (s.tests == 0));
  }
  c.delta_mu = 3.0;
  const ExperimentReport strong = run_power(c);
  CHECK(strong.summary(Method::mc).tests > 20);
  CHECK_FALSE(strong.summary(Method::mc).insufficient);
}

TEST_CASE("ci run") {
  ExperimentConfig c = default_config(Scenario::ci);
  CHECK(c.n_trials == 100);
  CHECK(c.hp.w == 1);
  c.n_trials = 5;
  c.keep_trials = true;
  const ExperimentReport r = run_ci(c);
  for (const auto& rec : r.records) {
    REQUIRE(rec.ci_lo.has_value());
    CHECK(*rec.ci_lo < *rec.ci_hi);
  }
  CHECK(r.summary(Method::mc).ci_count > 0);
}

TEST_CASE("scenario checks") {
  ExperimentConfig c = default_config(Scenario::power);
  CHECK_THROWS_AS(run_fpr(c), InputError);
  c.methods = {Method::ds};
  CHECK_THROWS_AS(run_power(c), InputError);
  c = default_config(Scenario::null);
  c.n_trials = 0;
  CHECK_THROWS_AS(run_fpr(c), InputError);
  CHECK_THROWS_AS(scenario_from_string("nope"), InputError);
  CHECK(method_from_string("ds") == Method::ds);
}

}
