#pragma once

#include <optional>
#include <string>
#include <utility>

#include <Eigen/SparseLU>

#include "gausskry/krylov.hpp"
#include "gausskry/models.hpp"
#include "gausskry/pade.hpp"
#include "gausskry/trajectory.hpp"

namespace gausskry {

enum class LinearSolver { qaa_v1, qaa_v2, gmres, exp_arnoldi, dense_direct };

std::string to_string(LinearSolver s);
/// Accepts "qaa-v1", "qaa_v1", ..., "dense", "dense-direct".
LinearSolver parse_linear_solver(const std::string& name);

/// Stopping tolerance: either consistent with the integrator order or fixed.
struct Tolerance {
  enum class Mode { order, fixed };
  Mode mode = Mode::order;
  double value = 0.0;  // used in fixed mode

  static Tolerance order() { return {}; }
  static Tolerance fixed(double v) { return {Mode::fixed, v}; }
  /// "order" or "fixed:<value>"
  static Tolerance parse(const std::string& text);
  std::string to_string() const;
};

inline constexpr double kToleranceFloor = 1e-15;

struct StepPolicy {
  int s = 1;
  double h = 0.1;
  LinearSolver solver = LinearSolver::qaa_v1;
  Tolerance tol;
  double tol_floor = kToleranceFloor;
  Index k_max = 200;

  /// max(h^{2s} or fixed value, tol_floor)
  double effective_tol() const;
};

/**
 * One Gauss step y_1 = R_s(hJQ) y_0 of a linear model under a fixed policy.
 * The Padé matrices D_s(+-hJQ) are assembled once and reused for the
 * residual of every iterative solve.
 */
class LinearStepper {
 public:
  LinearStepper(const PoissonModel& model, StepPolicy policy);

  std::pair<Vector, LinearSolveReport> step(const Vector& y) const;

  const StepPolicy& policy() const { return policy_; }
  const SparseMatrix& generator() const { return a_; }

 private:
  const PoissonModel* model_;
  StepPolicy policy_;
  PadeData pade_;
  SparseMatrix a_;  // h J Q
  SparseMatrix minus_;
  SparseMatrix plus_;
  std::optional<Eigen::SparseLU<SparseMatrix>> direct_;
};

std::pair<Vector, LinearSolveReport> gauss_step_linear(const PoissonModel& model, const Vector& y_prev,
                                                       const StepPolicy& policy);

TrajectoryReport integrate_linear(const PoissonModel& model, double t_end, const StepPolicy& policy);

/// sqrt(h sum_i w_i ||y_i - ref_i||_2^2) with trapezoid weights.
double l2_error(const TrajectoryReport& traj, const TrajectoryReport& ref);

inline constexpr Index kDenseReferenceLimit = 2000;

/// Exact flow exp(t JQ) y0 on the grid through the eigendecomposition of the
/// skew-symmetric B = L^T J L in Cholesky coordinates.
TrajectoryReport reference_linear(const PoissonModel& model, const std::vector<double>& grid);

/// Least-squares slope of log(error) against log(h), skipping errors below
/// floor. Returns NaN with fewer than two usable points.
double fit_order(const std::vector<double>& hs, const std::vector<double>& errors, double floor = 1e-11);

}  // namespace gausskry
