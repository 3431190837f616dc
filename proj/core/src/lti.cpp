#include "petc/lti.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace petc {

bool is_hurwitz(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A);
  return (es.eigenvalues().real().array() < 0.0).all();
}

void PlantLoop::validate() {
  if (A.rows() == 0 || A.rows() != A.cols())
    throw std::invalid_argument("A must be square and nonempty");
  if (B.rows() != A.rows() || B.cols() == 0)
    throw std::invalid_argument("B row count must match A");
  if (K.rows() != B.cols() || K.cols() != A.rows())
    throw std::invalid_argument("K must be m x n");
  if (!h.positive()) throw std::invalid_argument("h must be positive");
  if (k_bar < 1) throw std::invalid_argument("k_bar must be at least 1");
  const int nn = 2 * n();
  if (Q_trig.rows() != nn || Q_trig.cols() != nn)
    throw std::invalid_argument("Q_trig must be 2n x 2n");
  const double scale = std::max(1.0, Q_trig.norm());
  if ((Q_trig - Q_trig.transpose()).norm() > 1e-9 * scale)
    throw std::invalid_argument("Q_trig must be symmetric");
  Q_trig = ((Q_trig + Q_trig.transpose()) / 2.0).eval();
  if (!A.allFinite() || !B.allFinite() || !K.allFinite() || !Q_trig.allFinite())
    throw std::invalid_argument("matrices must be finite");
  if (!is_hurwitz(A + B * K))
    throw design_error("A + B K is not Hurwitz");
}

// Higham's scaling-and-squaring: pick the smallest Pade order whose backward
// error bound covers ||At||, squaring only when even order 13 needs help.
namespace {

Mat pade_expm(const Mat& M) {
  static const double theta3 = 1.495585217958292e-2;
  static const double theta5 = 2.539398330063230e-1;
  static const double theta7 = 9.504178996162932e-1;
  static const double theta9 = 2.097847961257068e0;
  static const double theta13 = 5.371920351148152e0;

  const Eigen::Index n = M.rows();
  const Mat I = Mat::Identity(n, n);
  const double nrm = M.lpNorm<1>();

  Mat U, V;
  int squarings = 0;

  auto pade_uv = [&](const Mat& A2, const Mat& A4, const Mat& A6, const Mat& A,
                     const std::vector<double>& b) {
    // orders 3..9 share the same even/odd split
    Mat u = b[1] * I;
    Mat v = b[0] * I;
    if (b.size() > 3) { u += b[3] * A2; v += b[2] * A2; }
    if (b.size() > 5) { u += b[5] * A4; v += b[4] * A4; }
    if (b.size() > 7) { u += b[7] * A6; v += b[6] * A6; }
    if (b.size() > 9) { u += b[9] * A6 * A2; v += b[8] * A6 * A2; }
    U = A * u;
    V = v;
  };

  Mat A = M;
  if (nrm <= theta9) {
    const Mat A2 = A * A;
    const Mat A4 = A2 * A2;
    const Mat A6 = A4 * A2;
    if (nrm <= theta3)
      pade_uv(A2, A4, A6, A, {120, 60, 12, 1});
    else if (nrm <= theta5)
      pade_uv(A2, A4, A6, A, {30240, 15120, 3360, 420, 30, 1});
    else if (nrm <= theta7)
      pade_uv(A2, A4, A6, A,
              {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1});
    else
      pade_uv(A2, A4, A6, A,
              {17643225600, 8821612800, 2075673600, 302702400, 30270240,
               2162160, 110880, 3960, 90, 1});
  } else {
    squarings = std::max(0, static_cast<int>(
                                std::ceil(std::log2(nrm / theta13))));
    A = M / std::pow(2.0, squarings);
    static const double b[] = {64764752532480000., 32382376266240000.,
                               7771770303897600.,  1187353796428800.,
                               129060195264000.,   10559470521600.,
                               670442572800.,      33522128640.,
                               1323241920.,        40840800.,
                               960960.,            16380.,
                               182.,               1.};
    const Mat A2 = A * A;
    const Mat A4 = A2 * A2;
    const Mat A6 = A4 * A2;
    U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
             b[5] * A4 + b[3] * A2 + b[1] * I);
    V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 +
        b[2] * A2 + b[0] * I;
  }

  Mat R = (V - U).partialPivLu().solve(V + U);
  for (int s = 0; s < squarings; ++s) R = (R * R).eval();
  return R;
}

}  // namespace

Mat matrix_exponential(const Mat& A, double t) {
  if (A.rows() != A.cols()) throw std::invalid_argument("A must be square");
  if (!A.allFinite() || !std::isfinite(t))
    throw std::invalid_argument("matrix_exponential needs finite input");
  if (t < 0.0) throw std::invalid_argument("t must be nonnegative");
  if (t == 0.0 || A.rows() == 0) return Mat::Identity(A.rows(), A.cols());
  Mat R = pade_expm((A * t).eval());
  if (!R.allFinite()) throw numeric_error("matrix exponential overflowed");
  return R;
}

Mat hold_transition(const PlantLoop& loop, int k) {
  if (k < 1 || k > loop.k_bar) throw std::invalid_argument("k out of range");
  const int n = loop.n();
  Mat aug = Mat::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = loop.A;
  aug.topRightCorner(n, n) = loop.B * loop.K;
  const Mat E = matrix_exponential(aug, loop.h.value() * k);
  return E.topLeftCorner(n, n) + E.topRightCorner(n, n);
}

TimingTables timing_tables(const PlantLoop& loop) {
  TimingTables t;
  const int n = loop.n();
  t.M.reserve(loop.k_bar);
  t.N.reserve(loop.k_bar);
  Mat stacked(2 * n, n);
  for (int k = 1; k <= loop.k_bar; ++k) {
    Mat Mk = hold_transition(loop, k);
    stacked.topRows(n) = Mk;
    stacked.bottomRows(n) = Mat::Identity(n, n);
    Mat Nk = stacked.transpose() * loop.Q_trig * stacked;
    Nk = ((Nk + Nk.transpose()) / 2.0).eval();
    t.M.push_back(std::move(Mk));
    t.N.push_back(std::move(Nk));
  }
  return t;
}

Mat solve_lyapunov(const Mat& Acl, const Mat& Q) {
  const int n = static_cast<int>(Acl.rows());
  if (Acl.cols() != n) throw std::invalid_argument("Acl must be square");
  if (Q.rows() != n || Q.cols() != n)
    throw std::invalid_argument("Q dimension mismatch");
  if (!is_hurwitz(Acl)) throw design_error("Lyapunov solve needs Hurwitz Acl");

  // (I (x) Acl^T + Acl^T (x) I) vec(P) = -vec(Q), columns stacked
  const Mat At = Acl.transpose();
  Mat L = Mat::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i) {
    L.block(i * n, i * n, n, n) += At;
    for (int j = 0; j < n; ++j)
      L.block(i * n, j * n, n, n).diagonal().array() += At(i, j);
  }
  Vec q(n * n);
  for (int j = 0; j < n; ++j) q.segment(j * n, n) = -Q.col(j);
  Vec p = L.partialPivLu().solve(q);
  Mat P(n, n);
  for (int j = 0; j < n; ++j) P.col(j) = p.segment(j * n, n);
  P = ((P + P.transpose()) / 2.0).eval();

  const double res = (At * P + P * Acl + Q).norm();
  if (res > 1e-8 * std::max(1.0, Q.norm()))
    throw numeric_error("Lyapunov residual too large");
  return P;
}

LqrResult lqr_gain(const Mat& A, const Mat& B, const Mat& Q_lqr, const Mat& R) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n)
    throw std::invalid_argument("LQR dimension mismatch");
  if (Q_lqr.rows() != n || Q_lqr.cols() != n || R.rows() != B.cols() ||
      R.cols() != B.cols())
    throw std::invalid_argument("LQR weight dimension mismatch");

  const Mat Rinv = R.inverse();
  Mat H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = A;
  H.topRightCorner(n, n) = -B * Rinv * B.transpose();
  H.bottomLeftCorner(n, n) = -Q_lqr;
  H.bottomRightCorner(n, n) = -A.transpose();

  // sign(H) by determinant-scaled Newton iteration
  Mat Z = H;
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<Mat> lu(Z);
    const double det = std::abs(lu.determinant());
    if (!(det > 0.0) || !std::isfinite(det))
      throw numeric_error("sign iteration hit a singular iterate");
    const double c = std::pow(det, -1.0 / (2.0 * n));
    Mat Zinv = lu.inverse();
    Mat Znext = 0.5 * (c * Z + (1.0 / c) * Zinv);
    const double delta = (Znext - Z).norm();
    Z = std::move(Znext);
    if (delta <= 1e-13 * std::max(1.0, Z.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) throw numeric_error("sign iteration did not converge");

  // sign(H) + I annihilates the stable invariant subspace; P solves the
  // stacked least-squares system built from its blocks.
  const Mat S = Z;
  const Mat I = Mat::Identity(n, n);
  Mat lhs(2 * n, n), rhs(2 * n, n);
  lhs.topRows(n) = S.topRightCorner(n, n);
  lhs.bottomRows(n) = S.bottomRightCorner(n, n) + I;
  rhs.topRows(n) = -(S.topLeftCorner(n, n) + I);
  rhs.bottomRows(n) = -S.bottomLeftCorner(n, n);
  Mat P = lhs.colPivHouseholderQr().solve(rhs);
  P = ((P + P.transpose()) / 2.0).eval();

  const Mat res = A.transpose() * P + P * A -
                  P * B * Rinv * B.transpose() * P + Q_lqr;
  const double rel = res.norm() / std::max(1.0, P.norm());
  if (rel > 1e-7) throw numeric_error("Riccati residual too large");

  LqrResult out;
  out.K = Rinv * B.transpose() * P;
  out.P_care = P;
  if (!is_hurwitz(A - B * out.K))
    throw numeric_error("LQR closed loop is not Hurwitz");
  return out;
}

Mat lyapunov_triggering_matrix(const Mat& A, const Mat& B, const Mat& K,
                               const Mat& P, const Mat& Q_lyap, double rho) {
  const int n = static_cast<int>(A.rows());
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("rho must be in (0,1)");
  if (P.rows() != n || P.cols() != n || Q_lyap.rows() != n ||
      Q_lyap.cols() != n)
    throw std::invalid_argument("P/Q_lyap dimension mismatch");
  Mat Q = Mat::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n) =
      A.transpose() * P + P * A + rho * Q_lyap;
  Q.topRightCorner(n, n) = P * B * K;
  Q.bottomLeftCorner(n, n) = K.transpose() * B.transpose() * P;
  return ((Q + Q.transpose()) / 2.0).eval();
}

}  // namespace petc
