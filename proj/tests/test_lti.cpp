#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <petc/lti.hpp>

#include "support/reactor.hpp"
#include "support/rk4.hpp"

using namespace petc;
using namespace petc::testing;

namespace {
double rel_err(const Mat& got, const Mat& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}
}  // namespace

TEST_CASE("matrix exponential, closed forms") {
  CHECK(matrix_exponential(Mat::Zero(3, 3), 7.0).isApprox(Mat::Identity(3, 3)));

  Mat a(1, 1);
  a << -2.5;
  CHECK(matrix_exponential(a, 2.0)(0, 0) == doctest::Approx(std::exp(-5.0)));

  // nilpotent: exp([[0,1],[0,0]] t) = [[1,t],[0,1]]
  Mat nil(2, 2);
  nil << 0, 1, 0, 0;
  Mat want(2, 2);
  want << 1, 3.25, 0, 1;
  CHECK(rel_err(matrix_exponential(nil, 3.25), want) < 1e-14);

  // rotation: exp([[0,-w],[w,0]] t) = [[cos wt, -sin wt],[sin wt, cos wt]]
  Mat rot(2, 2);
  rot << 0, -2, 2, 0;
  const double th = 2.0 * 0.7;
  want << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  CHECK(rel_err(matrix_exponential(rot, 0.7), want) < 1e-13);

  // large norm path (squaring): diag entries
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -40.0;
  Mat E = matrix_exponential(d, 1.0);
  CHECK(E(0, 0) == doctest::Approx(std::exp(3.0)).epsilon(1e-12));
  CHECK(E(1, 1) == doctest::Approx(std::exp(-40.0)).epsilon(1e-10));
  CHECK(E(0, 1) == 0.0);
}

TEST_CASE("matrix exponential, input validation") {
  CHECK_THROWS_AS(matrix_exponential(Mat::Zero(2, 3), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(matrix_exponential(Mat::Zero(2, 2), -1.0),
                  std::invalid_argument);
  Mat bad = Mat::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(matrix_exponential(bad, 1.0), std::invalid_argument);
}

TEST_CASE("hold transition, scalar closed form") {
  // x' = a x + b kappa xhat  =>  M(k) = e^{akh} + (e^{akh}-1)/a * b kappa
  PlantLoop loop;
  loop.A = Mat::Constant(1, 1, -1.5);
  loop.B = Mat::Constant(1, 1, 2.0);
  loop.K = Mat::Constant(1, 1, 0.25);
  loop.h = Rational(1, 10);
  loop.k_bar = 5;
  loop.Q_trig = Mat::Identity(2, 2);
  loop.validate();
  for (int k = 1; k <= 5; ++k) {
    const double t = 0.1 * k;
    const double e = std::exp(-1.5 * t);
    const double want = e + (e - 1.0) / (-1.5) * 2.0 * 0.25;
    CHECK(hold_transition(loop, k)(0, 0) == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK_THROWS_AS(hold_transition(loop, 0), std::invalid_argument);
  CHECK_THROWS_AS(hold_transition(loop, 6), std::invalid_argument);
}

TEST_CASE("hold transition matches RK4 on the reactor") {
  PlantLoop loop = reactor_loop(0.1);
  const TimingTables t = timing_tables(loop);
  Vec x0(4);
  x0 << 1.0, -0.6, 0.3, 2.0;
  for (int k : {1, 3, 7, 13, 20}) {
    const double tk = loop.h.value() * k;
    Vec ref = rk4_held(loop.A, loop.B, loop.K, x0, tk, 1000 * k);
    Vec got = t.M[k - 1] * x0;
    CHECK((got - ref).norm() / ref.norm() < 1e-8);
  }
}

TEST_CASE("timing tables: N(k) assembly and symmetry") {
  PlantLoop loop = reactor_loop(0.05);
  const TimingTables t = timing_tables(loop);
  REQUIRE(t.k_bar() == 20);
  const int n = 4;
  for (int k = 1; k <= 20; ++k) {
    const Mat& N = t.N[k - 1];
    CHECK((N - N.transpose()).norm() < 1e-12 * N.norm());
    Mat S(2 * n, n);
    S.topRows(n) = t.M[k - 1];
    S.bottomRows(n) = Mat::Identity(n, n);
    CHECK(rel_err(N, S.transpose() * loop.Q_trig * S) < 1e-12);
  }
}

TEST_CASE("lyapunov solve: scalar and 2x2 oracles") {
  // scalar: a = -1, q = 2 -> p = 1
  Mat a = Mat::Constant(1, 1, -1.0);
  Mat q = Mat::Constant(1, 1, 2.0);
  CHECK(solve_lyapunov(a, q)(0, 0) == doctest::Approx(1.0));

  Mat A(2, 2);
  A << 0, 1, -2, -3;
  Mat Q = Mat::Identity(2, 2);
  Mat P = solve_lyapunov(A, Q);
  CHECK((A.transpose() * P + P * A + Q).norm() < 1e-10);
  Eigen::LLT<Mat> llt(P);
  CHECK(llt.info() == Eigen::Success);  // P positive definite

  Mat unstable(2, 2);
  unstable << 1, 0, 0, -1;
  CHECK_THROWS_AS(solve_lyapunov(unstable, Q), design_error);
}

TEST_CASE("lqr: scalar closed forms") {
  // a=0,b=1,q=1,r=1: p^2 = 1 -> p = 1, k = 1
  Mat a = Mat::Zero(1, 1), b = Mat::Ones(1, 1), q = Mat::Ones(1, 1),
      r = Mat::Ones(1, 1);
  LqrResult g = lqr_gain(a, b, q, r);
  CHECK(g.P_care(0, 0) == doctest::Approx(1.0));
  CHECK(g.K(0, 0) == doctest::Approx(1.0));

  // a=1,b=1,q=0,r=1: 2p - p^2 = 0, stabilizing root p = 2 -> k = 2
  a << 1.0;
  q << 0.0;
  g = lqr_gain(a, b, q, r);
  CHECK(g.P_care(0, 0) == doctest::Approx(2.0));
  CHECK(g.K(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("lqr on the reactor: residual, stability, lyapunov identity") {
  const Mat A = reactor_A();
  const Mat B = reactor_B();
  const Mat Q = Mat::Identity(4, 4);
  for (double r : {0.1, 0.05}) {
    const Mat R = r * Mat::Identity(2, 2);
    LqrResult g = lqr_gain(A, B, Q, R);
    const Mat res = A.transpose() * g.P_care + g.P_care * A -
                    g.P_care * B * R.inverse() * B.transpose() * g.P_care + Q;
    CHECK(res.norm() / g.P_care.norm() < 1e-7);
    CHECK(is_hurwitz(A - B * g.K));

    // the CARE solution also solves the closed-loop lyapunov equation with
    // weight Q + K^T R K; cross-checks the two solvers against each other
    const Mat P2 = solve_lyapunov(A - B * g.K, Q + g.K.transpose() * R * g.K);
    CHECK(rel_err(P2, g.P_care) < 1e-9);
  }
}

TEST_CASE("triggering matrix structure") {
  const Mat A = reactor_A();
  const Mat B = reactor_B();
  const Mat Q = Mat::Identity(4, 4);
  const Mat R = 0.1 * Mat::Identity(2, 2);
  LqrResult g = lqr_gain(A, B, Q, R);
  const Mat K = -g.K;
  const Mat Qt = lyapunov_triggering_matrix(A, B, K, g.P_care, Q, 0.8);
  CHECK(Qt.rows() == 8);
  CHECK((Qt - Qt.transpose()).norm() < 1e-12 * Qt.norm());
  CHECK(Qt.bottomRightCorner(4, 4).norm() == 0.0);
  CHECK(rel_err(Qt.topRightCorner(4, 4), g.P_care * B * K) < 1e-12);
  CHECK_THROWS_AS(lyapunov_triggering_matrix(A, B, K, g.P_care, Q, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(lyapunov_triggering_matrix(A, B, K, g.P_care, Q, 1.0),
                  std::invalid_argument);
}

TEST_CASE("plant loop validation") {
  PlantLoop loop;
  loop.A = Mat::Constant(1, 1, 1.0);  // unstable plant
  loop.B = Mat::Ones(1, 1);
  loop.K = Mat::Zero(1, 1);           // no feedback -> A+BK not Hurwitz
  loop.h = Rational(1, 100);
  loop.k_bar = 10;
  loop.Q_trig = Mat::Identity(2, 2);
  CHECK_THROWS_AS(loop.validate(), design_error);

  loop.K = Mat::Constant(1, 1, -2.0);
  CHECK_NOTHROW(loop.validate());

  loop.Q_trig(0, 1) = 1.0;  // asymmetric
  CHECK_THROWS_AS(loop.validate(), std::invalid_argument);

  loop.Q_trig(0, 1) = 0.0;
  loop.h = Rational(0, 1);
  CHECK_THROWS_AS(loop.validate(), std::invalid_argument);
}

TEST_CASE("rationals") {
  CHECK(parse_rational("1/100") == Rational(1, 100));
  CHECK(parse_rational("0.01") == Rational(1, 100));
  CHECK(parse_rational("3") == Rational(3, 1));
  CHECK(parse_rational(" 2 / 8 ") == Rational(1, 4));
  CHECK(parse_rational("-0.5") == Rational(-1, 2));
  CHECK(parse_rational("1.25") == Rational(5, 4));
  CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1.2.3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("x"), std::invalid_argument);

  CHECK(format_rational(Rational(1, 100)) == "1/100");
  CHECK(format_rational(Rational(5, 1)) == "5");
  CHECK(parse_rational(format_rational(Rational(7, 3))) == Rational(7, 3));

  CHECK(rational_gcd(Rational(1, 100), Rational(1, 40)) == Rational(1, 200));
  CHECK(rational_ratio(Rational(1, 40), Rational(1, 200)) == 5);
  CHECK_THROWS_AS(rational_ratio(Rational(1, 3), Rational(1, 5)),
                  std::invalid_argument);
}
