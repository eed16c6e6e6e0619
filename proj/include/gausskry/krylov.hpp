#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gausskry/core.hpp"
#include "gausskry/pade.hpp"

namespace gausskry {

struct TraceRow {
  Index k = 0;
  double residual = 0.0;
  double energy_dev = 0.0;
  std::int64_t elapsed_ns = 0;
};

using IterationTrace = std::vector<TraceRow>;

struct LinearSolveReport {
  Vector iterate;
  double residual_euclid = 0.0;
  double energy_dev = 0.0;
  Index k = 0;
  bool converged = false;
  bool breakdown = false;
  /// Number of shifted tridiagonal (or banded) systems solved over the run.
  Index linear_solves = 0;
  IterationTrace trace;
};

enum class Orthogonalization {
  skew_lanczos,  // three-term recurrence, valid for A skew-adjoint in the Q-inner product
  full,          // classical Arnoldi loop in the Q-inner product (validation)
};

struct ArnoldiOptions {
  Orthogonalization mode = Orthogonalization::skew_lanczos;
  /// Second full Gram-Schmidt pass against all stored vectors.
  bool reorthogonalize = false;
  /// Lucky breakdown when ||w_k||_Q <= breakdown_rtol * ||A v_k||_Q.
  double breakdown_rtol = 1e-14;
};

/**
 * Q-Arnoldi process on K_k(A, v): builds V_k with V_k^T Q V_k = I and the
 * projected matrix H_k = V_k^T Q A V_k.
 *
 * For A in g_Q the projection is tridiagonal and skew-symmetric; in the
 * default skew_lanczos mode only h_{k+1,k} is computed per step and H_k is
 * represented by its subdiagonal. The operator and space must outlive the
 * process.
 */
class QArnoldi {
 public:
  QArnoldi(const QSpace& space, LinearAction a, const Vector& start, ArnoldiOptions options = {});

  /// Appends v_{k+1}; computes h_{k+2,k+1} and the next candidate vector.
  void extend();

  Index dim() const { return k_; }
  bool breakdown() const { return breakdown_; }
  double start_norm() const { return start_norm_; }

  /// n x k matrix V_k.
  Eigen::Block<const Matrix, Eigen::Dynamic, Eigen::Dynamic, true> basis() const { return basis_.leftCols(k_); }
  /// Dense k x k H_k.
  Matrix hessenberg() const;
  /// H_k as a banded matrix of semibandwidth 1 (skew_lanczos mode only).
  BandedMatrix<double> tridiagonal() const;
  /// Subdiagonal entries h_{2,1} .. h_{k,k-1}.
  std::vector<double> subdiagonal() const;
  /// h_{k+1,k}; zero after breakdown.
  double h_next() const { return h_next_; }
  /// v_{k+1}, absent after breakdown or before the first extend.
  std::optional<Vector> v_next() const;

 private:
  const QSpace* space_;
  LinearAction a_;
  ArnoldiOptions options_;
  double start_norm_;
  Matrix basis_;
  Index k_ = 0;
  Vector next_;
  bool has_next_ = true;
  bool breakdown_ = false;
  double h_next_ = 0.0;
  std::vector<double> beta_;  // beta_[i] = h_{i+2,i+1}
  Matrix full_h_;             // (k+1) x k, full mode only
};

/// Residual norm of a candidate iterate; supplied by the caller.
using ResidualFn = std::function<double(const Vector&)>;

struct QaaOptions {
  Index k_max = 200;
  /// Absolute tolerance on the Euclidean residual.
  double tol = 1e-12;
  /// Defaults to ||D_s(-A) x - D_s(A) y0||_2 evaluated through actions of A.
  ResidualFn residual;
  ArnoldiOptions arnoldi;
  bool record_time = true;
};

/// Nominator/denominator form: solve D_s(-H_k) xi = D_s(H_k) e_1 by banded LU.
LinearSolveReport qaa_v1(const QSpace& space, const LinearAction& a, const Vector& y0, const PadeData& p,
                         const QaaOptions& options = {});

/// Partial fraction form: one shifted tridiagonal solve per conjugate pair or
/// real pole, contributions of conjugate partners folded into a real part.
LinearSolveReport qaa_v2(const QSpace& space, const LinearAction& a, const Vector& y0, const PadeData& p,
                         const QaaOptions& options = {});

/**
 * Memory-lean V.2 for the midpoint rule (s = 1): the skew-Lanczos vectors and
 * the iterate are updated by short recurrences from the LU factors of
 * H_k - 2I, so only O(1) vectors are kept.
 */
LinearSolveReport qaa_v2_short_recurrence(const QSpace& space, const LinearAction& a, const Vector& y0,
                                          const QaaOptions& options = {});

struct ExpArnoldiOptions {
  /// Number of Arnoldi steps; the run ends earlier only on breakdown.
  Index k_fixed = 30;
  /// Optional residual for the trace; defaults to the a posteriori estimate
  /// h_{k+1,k} |e_k^T exp(H_k) e_1| ||v_{k+1}||_2 ||y0||_Q.
  ResidualFn residual;
  ArnoldiOptions arnoldi;
  bool record_time = true;
};

/// x_k = V_k exp(H_k) e_1 ||y0||_Q.
LinearSolveReport exp_arnoldi(const QSpace& space, const LinearAction& a, const Vector& y0,
                              const ExpArnoldiOptions& options = {});

struct GmresOptions {
  Index k_max = 200;
  /// Absolute tolerance on ||b - M x_k||_2.
  double tol = 1e-12;
  /// Energy deviations are measured against ||reference||_Q; defaults to b.
  std::optional<Vector> reference;
  bool record_time = true;
};

/// Non-restarted GMRES in the Euclidean inner product with x_0 = 0, modified
/// Gram-Schmidt and Givens rotations.
LinearSolveReport gmres_baseline(const QSpace& space, const LinearAction& m, const Vector& b,
                                 const GmresOptions& options = {});

/// sum_j a_j (sign * A)^j by repeated sparse multiplication.
SparseMatrix assemble_pade_matrix(const SparseMatrix& a, const PadeData& p, int sign);

/// ||D_s(-A) x - D_s(A) y0||_2 with both polynomial matrices assembled once.
class PadeResidual {
 public:
  PadeResidual(const SparseMatrix& a, const PadeData& p, const Vector& y0);
  double operator()(const Vector& x) const { return (minus_ * x - rhs_).norm(); }
  const SparseMatrix& denominator_matrix() const { return minus_; }
  const Vector& rhs() const { return rhs_; }

 private:
  SparseMatrix minus_;
  Vector rhs_;
};

/// Residual of the Padé system through actions of A.
ResidualFn make_action_residual(const LinearAction& a, const PadeData& p, const Vector& y0);

}  // namespace gausskry
