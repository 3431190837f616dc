#pragma once

#include <Eigen/Dense>
#include <vector>

#include "petc/errors.hpp"
#include "petc/rational.hpp"

namespace petc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// one sampled-and-held feedback loop: x' = A x + B u, u = K xhat, with the
// quadratic event test z^T Q_trig z > 0 on z = [x(kh); xhat] evaluated every h,
// and a hard cap of k_bar periods between communications.
struct PlantLoop {
  Mat A;       // n x n
  Mat B;       // n x m
  Mat K;       // m x n, A + B K Hurwitz
  Rational h;  // checking period
  int k_bar = 0;
  Mat Q_trig;  // 2n x 2n symmetric

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }

  // dimension/symmetry/stability checks; symmetrizes Q_trig in place
  void validate();
};

// per-k transition data: M(k) maps the held state to the continuous state k
// periods later; N(k) = [M(k); I]^T Q_trig [M(k); I] is the event test seen
// from the held state.
struct TimingTables {
  std::vector<Mat> M;  // index k-1, k = 1..k_bar
  std::vector<Mat> N;
  int k_bar() const { return static_cast<int>(M.size()); }
};

// e^{At} by scaling-and-squaring with the order-13 Pade approximant
Mat matrix_exponential(const Mat& A, double t);

// M(k) = e^{A kh} + (int_0^{kh} e^{A tau} dtau) B K, via the exponential of the
// augmented matrix [[A, BK],[0,0]] * kh (no quadrature)
Mat hold_transition(const PlantLoop& loop, int k);

TimingTables timing_tables(const PlantLoop& loop);

// Acl^T P + P Acl = -Q via the Kronecker linear system; requires Acl Hurwitz
Mat solve_lyapunov(const Mat& Acl, const Mat& Q);

struct LqrResult {
  Mat K;       // R^{-1} B^T P, so A - B K is Hurwitz
  Mat P_care;
};

// continuous-time LQR via the matrix sign function of the Hamiltonian
LqrResult lqr_gain(const Mat& A, const Mat& B, const Mat& Q_lqr, const Mat& R);

// [[A^T P + P A + rho Q_lyap, P B K],[K^T B^T P, 0]]; K in the A + B K convention
Mat lyapunov_triggering_matrix(const Mat& A, const Mat& B, const Mat& K,
                               const Mat& P, const Mat& Q_lyap, double rho);

bool is_hurwitz(const Mat& A);

}  // namespace petc
