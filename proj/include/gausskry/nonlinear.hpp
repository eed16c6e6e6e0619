#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gausskry/models.hpp"
#include "gausskry/pade.hpp"
#include "gausskry/stepping.hpp"

namespace gausskry {

/// How the Cayley transform inside Phi_h is evaluated.
struct InnerSolve {
  /// Dense LU up to this dimension, Q-Arnoldi approximation (s = 1) above.
  Index dense_threshold = kDenseThreshold;
  double tol = 1e-14;
  Index k_max = 200;
};

/**
 * Midpoint-rule equation of one step y0 -> y1 of a Poisson model,
 *
 *   y1 = C(h/2 J((y0 + y1)/2) Q) y0 =: Phi_h(y1).
 *
 * The problem keeps a reference to the model.
 */
class MidpointProblem {
 public:
  MidpointProblem(const PoissonModel& model, Vector y0, double h, InnerSolve inner = {});

  const PoissonModel& model() const { return *model_; }
  const QSpace& space() const { return model_->space(); }
  const Vector& y0() const { return y0_; }
  double h() const { return h_; }

  /// Phi_h(x); its Q-norm equals ||y0||_Q for every x.
  Vector phi(const Vector& x) const;
  /// (I - h/2 J(m) Q) x - (I + h/2 J(m) Q) y0 with m = (y0 + x)/2.
  Vector residual(const Vector& x) const;
  /// h/2 J((y0 + x)/2) Q as a sparse matrix.
  SparseMatrix half_generator(const Vector& x) const;

 private:
  const PoissonModel* model_;
  Vector y0_;
  double h_;
  InnerSolve inner_;
  PadeData midpoint_;
};

Vector phi_apply(const MidpointProblem& prob, const Vector& x);
Vector residual_tilde(const MidpointProblem& prob, const Vector& x);

enum class NonlinearMethod { fixed_point, cayley_bfgs };

std::string to_string(NonlinearMethod m);
/// "fp", "fixed-point", "cayley-bfgs", "bfgs"
NonlinearMethod parse_nonlinear_method(const std::string& name);

struct NonlinearSolveReport {
  NonlinearMethod method = NonlinearMethod::fixed_point;
  /// Energy-bearing iterate at termination (x_k for FP, w_k for Cayley-BFGS).
  Vector solution;
  IterationTrace trace;
  /// Energy-bearing iterates in order: x_1, x_2, ... (FP) or w_0, w_1, ... (BFGS).
  std::vector<Vector> energy_iterates;
  /// Quasi-Newton iterates x_0, x_1, ... (BFGS only).
  std::vector<Vector> newton_iterates;
  /// Number of Phi_h evaluations.
  Index k_used = 0;
  bool converged = false;
  /// BFGS updates skipped on vanishing curvature.
  Index skipped_updates = 0;
};

/// x_{k+1} = Phi_h(x_k) until ||r~(x_k)||_2 <= tol.
NonlinearSolveReport fixed_point_solve(const MidpointProblem& prob, const Vector& x0, double tol, Index k_max,
                                       bool record_time = true);

/**
 * BFGS on F_h(x) = x - Phi_h(x) with inverse update and B_0^{-1} = I:
 *
 *   w_k = Phi_h(x_k),  x_{k+1} = x_k - B_k^{-1} (x_k - w_k),
 *
 * stopping on ||r~(w_k)||_2 <= tol and returning the Cayley iterate w_k.
 */
NonlinearSolveReport cayley_bfgs_solve(const MidpointProblem& prob, const Vector& x0, double tol, Index k_max,
                                       bool record_time = true);

struct NonlinearPolicy {
  double h = 0.1;
  NonlinearMethod method = NonlinearMethod::fixed_point;
  /// order mode stops at h^2.
  Tolerance tol;
  Index k_max = 200;
  InnerSolve inner;

  double effective_tol() const;
};

std::pair<Vector, NonlinearSolveReport> gauss_step_nonlinear(const PoissonModel& model, const Vector& y_prev,
                                                             const NonlinearPolicy& policy);

TrajectoryReport integrate_nonlinear(const PoissonModel& model, double t_end, const NonlinearPolicy& policy);

}  // namespace gausskry
