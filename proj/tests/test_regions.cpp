#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <petc/regions.hpp>

#include <random>

#include "support/reactor.hpp"
#include "support/rk4.hpp"

using namespace petc;
using namespace petc::testing;

namespace {

TimingTables tables_from(const std::vector<Mat>& Ns) {
  TimingTables t;
  for (const auto& N : Ns) {
    t.M.push_back(Mat::Identity(N.rows(), N.cols()));
    t.N.push_back(N);
  }
  return t;
}

}  // namespace

TEST_CASE("effective bounds on the reactor loops") {
  {
    PlantLoop loop = reactor_loop(0.1);
    RegionSpec s = effective_bounds(timing_tables(loop), 1e-3);
    CHECK(s.k_min == 6);
    CHECK(s.k_max == 19);
    CHECK(s.region_count() == 14);
  }
  {
    PlantLoop loop = reactor_loop(0.05);
    RegionSpec s = effective_bounds(timing_tables(loop), 1e-3);
    CHECK(s.k_min == 4);
    CHECK(s.k_max == 16);
    CHECK(s.region_count() == 13);
  }
}

TEST_CASE("effective bounds, degenerate shapes") {
  Mat indef(2, 2);
  indef << 1, 0, 0, -1;
  RegionSpec s = effective_bounds(tables_from(std::vector<Mat>(9, indef)), 1e-3);
  CHECK(s.k_min == 1);
  CHECK(s.k_max == 9);  // never almost-PSD -> horizon

  Mat neg = -Mat::Identity(2, 2);
  s = effective_bounds(tables_from(std::vector<Mat>(5, neg)), 1e-3);
  CHECK(s.k_min == 5);
  CHECK(s.k_max == 5);  // single region

  // threshold must be positive
  CHECK_THROWS_AS(effective_bounds(tables_from({indef}), 0.0),
                  std::invalid_argument);
}

TEST_CASE("region membership basics") {
  PlantLoop loop = reactor_loop(0.1);
  TimingTables t = timing_tables(loop);
  RegionSpec spec = effective_bounds(t, 1e-3);

  // top eigenvector of N(k_min) definitely fires the first test
  Eigen::SelfAdjointEigenSolver<Mat> es(t.N[spec.k_min - 1]);
  Vec top = es.eigenvectors().col(3);
  REQUIRE(top.dot(t.N[spec.k_min - 1] * top) > 0.0);
  CHECK(region_of_state(top, t, spec) == spec.k_min);

  CHECK(region_of_state(Vec::Zero(4), t, spec) == spec.k_max);

  Vec bad = Vec::Zero(4);
  bad(1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(region_of_state(bad, t, spec), std::invalid_argument);
  CHECK_THROWS_AS(region_of_state(Vec::Zero(3), t, spec),
                  std::invalid_argument);
}

TEST_CASE("homogeneity and monotone consistency") {
  PlantLoop loop = reactor_loop(0.05);
  TimingTables t = timing_tables(loop);
  RegionSpec spec = effective_bounds(t, 1e-3);

  std::mt19937 rng(20260814);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> mag(-4.0, 4.0);
  for (int trial = 0; trial < 2000; ++trial) {
    Vec x(4);
    for (int i = 0; i < 4; ++i) x(i) = gauss(rng);
    const int k = region_of_state(x, t, spec);
    CHECK(k >= spec.k_min);
    CHECK(k <= spec.k_max);
    for (int j = spec.k_min; j < k; ++j)
      CHECK(x.dot(t.N[j - 1] * x) <= 0.0);

    double alpha = std::pow(10.0, mag(rng));
    if (trial % 2) alpha = -alpha;
    CHECK(region_of_state(alpha * x, t, spec) == k);
  }
}

TEST_CASE("regions agree with a continuous-trajectory reference") {
  PlantLoop loop = reactor_loop(0.1);
  TimingTables t = timing_tables(loop);
  RegionSpec spec = effective_bounds(t, 1e-3);
  const double h = loop.h.value();
  const int n = 4;

  Mat F = Mat::Zero(2 * n, 2 * n);
  F.topLeftCorner(n, n) = loop.A;
  F.topRightCorner(n, n) = loop.B * loop.K;

  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10000; ++trial) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = gauss(rng);
    x.normalize();

    // march the held-input flow and apply the raw event test at sampling
    // instants, independent of the matrix-exponential tables
    Vec z(2 * n);
    z << x, x;
    for (int step = 0; step < spec.k_min; ++step) z = rk4_linear(F, z, h, 100);
    int k_ref = spec.k_max;
    for (int k = spec.k_min; k < spec.k_max; ++k) {
      if (z.dot(loop.Q_trig * z) > 0.0) {
        k_ref = k;
        break;
      }
      z = rk4_linear(F, z, h, 100);
    }
    CHECK(region_of_state(x, t, spec) == k_ref);
  }
}
