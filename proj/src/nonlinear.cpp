#include "gausskry/nonlinear.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "gausskry/krylov.hpp"

namespace gausskry {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_since(Clock::time_point start, bool record) {
  if (!record) return 0;
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

void check_generator(const PoissonModel& model) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  const Matrix q = Matrix(model.q());
  for (int probe = 0; probe < 5; ++probe) {
    Vector z(model.dim());
    for (Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const Matrix qj = q * Matrix(model.structure(z));
    const Matrix qjq = qj * q;
    if (max_abs(qjq + qjq.transpose()) > 1e-12 * std::max(max_abs(qj), 1e-300)) {
      throw InvalidInput("MidpointProblem: J(z) Q is not skew-adjoint in the Q-inner product");
    }
  }
}

}  // namespace

MidpointProblem::MidpointProblem(const PoissonModel& model, Vector y0, double h, InnerSolve inner)
    : model_(&model), y0_(std::move(y0)), h_(h), inner_(inner), midpoint_(build_pade(1)) {
  if (y0_.size() != model.dim()) throw DimensionMismatch("MidpointProblem: y0 dimension");
  if (!(h_ >= 0.0)) throw InvalidInput("MidpointProblem: step size must be nonnegative");
  check_generator(model);
}

SparseMatrix MidpointProblem::half_generator(const Vector& x) const {
  if (x.size() != y0_.size()) throw DimensionMismatch("MidpointProblem: iterate dimension");
  const Vector m = 0.5 * (y0_ + x);
  return SparseMatrix((0.5 * h_) * SparseMatrix(model_->structure(m) * model_->q()));
}

Vector MidpointProblem::phi(const Vector& x) const {
  const SparseMatrix a = half_generator(x);
  const QSpace& sp = space();
  if (sp.dim() <= inner_.dense_threshold) {
    return cayley_apply(sp, [&a](const Vector& v) { return Vector(a * v); }, y0_, inner_.dense_threshold);
  }
  // C(A) = R_1(2A): every inner Q-Arnoldi iterate keeps the Q-norm of y0.
  QaaOptions opts;
  opts.k_max = inner_.k_max;
  opts.tol = inner_.tol * std::max(1.0, y0_.norm());
  opts.record_time = false;
  const LinearAction doubled = [&a](const Vector& v) { return Vector(2.0 * (a * v)); };
  return qaa_v1(sp, doubled, y0_, midpoint_, opts).iterate;
}

Vector MidpointProblem::residual(const Vector& x) const {
  const SparseMatrix a = half_generator(x);
  return x - a * x - y0_ - a * y0_;
}

Vector phi_apply(const MidpointProblem& prob, const Vector& x) { return prob.phi(x); }
Vector residual_tilde(const MidpointProblem& prob, const Vector& x) { return prob.residual(x); }

std::string to_string(NonlinearMethod m) {
  return m == NonlinearMethod::fixed_point ? "fp" : "cayley-bfgs";
}

NonlinearMethod parse_nonlinear_method(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "fp" || n == "fixed-point") return NonlinearMethod::fixed_point;
  if (n == "cayley-bfgs" || n == "bfgs") return NonlinearMethod::cayley_bfgs;
  throw InvalidInput("unknown nonlinear method '" + name + "'");
}

NonlinearSolveReport fixed_point_solve(const MidpointProblem& prob, const Vector& x0, double tol, Index k_max,
                                       bool record_time) {
  if (x0.size() != prob.y0().size()) throw DimensionMismatch("fixed_point_solve: starting vector dimension");
  if (k_max < 1) throw InvalidInput("fixed_point_solve: k_max must be positive");
  const auto start = Clock::now();
  const double norm0 = prob.space().norm(prob.y0());

  NonlinearSolveReport report;
  report.method = NonlinearMethod::fixed_point;
  Vector x = x0;
  while (report.k_used < k_max) {
    x = prob.phi(x);
    ++report.k_used;
    const double res = prob.residual(x).norm();
    const double dev = energy_deviation(prob.space(), x, norm0);
    report.trace.push_back({report.k_used, res, dev, elapsed_since(start, record_time)});
    report.energy_iterates.push_back(x);
    if (res <= tol) {
      report.converged = true;
      break;
    }
  }
  report.solution = std::move(x);
  return report;
}

NonlinearSolveReport cayley_bfgs_solve(const MidpointProblem& prob, const Vector& x0, double tol, Index k_max,
                                       bool record_time) {
  const Index n = prob.y0().size();
  if (x0.size() != n) throw DimensionMismatch("cayley_bfgs_solve: starting vector dimension");
  if (k_max < 1) throw InvalidInput("cayley_bfgs_solve: k_max must be positive");
  const auto start = Clock::now();
  const double norm0 = prob.space().norm(prob.y0());
  const Matrix eye = Matrix::Identity(n, n);

  NonlinearSolveReport report;
  report.method = NonlinearMethod::cayley_bfgs;
  Matrix inv_b = eye;
  Vector x = x0;
  // Phi_h(x_k) is evaluated once per iteration and shared by w_k, F_h(x_k)
  // and the residual.
  Vector w = prob.phi(x);
  Vector f = x - w;
  report.k_used = 1;

  while (true) {
    report.newton_iterates.push_back(x);
    report.energy_iterates.push_back(w);
    const double res = prob.residual(w).norm();
    const double dev = energy_deviation(prob.space(), w, norm0);
    report.trace.push_back({report.k_used, res, dev, elapsed_since(start, record_time)});
    if (res <= tol) {
      report.converged = true;
      break;
    }
    if (report.k_used >= k_max) break;

    const Vector x_new = x - inv_b * f;
    Vector w_new = prob.phi(x_new);
    ++report.k_used;
    const Vector f_new = x_new - w_new;
    const Vector s = x_new - x;
    const Vector z = f_new - f;
    const double zs = z.dot(s);
    if (std::abs(zs) > 1e-14 * z.norm() * s.norm()) {
      const Matrix left = eye - s * z.transpose() / zs;
      inv_b = left * inv_b * left.transpose() + s * s.transpose() / zs;
    } else {
      ++report.skipped_updates;
    }
    x = x_new;
    w = std::move(w_new);
    f = f_new;
  }
  report.solution = w;
  return report;
}

double NonlinearPolicy::effective_tol() const {
  const double base = tol.mode == Tolerance::Mode::order ? h * h : tol.value;
  return std::max(base, kToleranceFloor);
}

std::pair<Vector, NonlinearSolveReport> gauss_step_nonlinear(const PoissonModel& model, const Vector& y_prev,
                                                             const NonlinearPolicy& policy) {
  const MidpointProblem prob(model, y_prev, policy.h, policy.inner);
  NonlinearSolveReport report = policy.method == NonlinearMethod::fixed_point
                                    ? fixed_point_solve(prob, y_prev, policy.effective_tol(), policy.k_max)
                                    : cayley_bfgs_solve(prob, y_prev, policy.effective_tol(), policy.k_max);
  return {report.solution, std::move(report)};
}

TrajectoryReport integrate_nonlinear(const PoissonModel& model, double t_end, const NonlinearPolicy& policy) {
  const std::vector<double> grid = uniform_grid(t_end, policy.h);
  const QSpace& space = model.space();
  const double norm0 = space.norm(model.y0());

  TrajectoryReport traj;
  traj.times = grid;
  traj.states.push_back(model.y0());
  traj.energy_dev.push_back(0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    auto [y, report] = gauss_step_nonlinear(model, traj.states.back(), policy);
    const double dev = energy_deviation(space, y, norm0);
    traj.energy_dev.push_back(dev);
    traj.max_energy_dev = std::max(traj.max_energy_dev, dev);
    traj.iterations.push_back(report.k_used);
    traj.converged.push_back(report.converged);
    traj.states.push_back(std::move(y));
  }
  return traj;
}

}  // namespace gausskry
