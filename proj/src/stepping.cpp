#include "gausskry/stepping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gausskry {

std::string to_string(LinearSolver s) {
  switch (s) {
    case LinearSolver::qaa_v1: return "qaa-v1";
    case LinearSolver::qaa_v2: return "qaa-v2";
    case LinearSolver::gmres: return "gmres";
    case LinearSolver::exp_arnoldi: return "exp-arnoldi";
    case LinearSolver::dense_direct: return "dense";
  }
  return "unknown";
}

LinearSolver parse_linear_solver(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "qaa-v1") return LinearSolver::qaa_v1;
  if (n == "qaa-v2") return LinearSolver::qaa_v2;
  if (n == "gmres") return LinearSolver::gmres;
  if (n == "exp-arnoldi") return LinearSolver::exp_arnoldi;
  if (n == "dense" || n == "dense-direct") return LinearSolver::dense_direct;
  throw InvalidInput("unknown linear solver '" + name + "'");
}

Tolerance Tolerance::parse(const std::string& text) {
  if (text == "order") return order();
  const std::string prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text.substr(prefix.size()), &used);
    } catch (const std::exception&) {
      throw InvalidInput("tolerance '" + text + "' is not a number");
    }
    if (used != text.size() - prefix.size() || !(v > 0.0)) {
      throw InvalidInput("tolerance '" + text + "' must be a positive number");
    }
    return fixed(v);
  }
  throw InvalidInput("tolerance must be 'order' or 'fixed:<value>', got '" + text + "'");
}

std::string Tolerance::to_string() const {
  return mode == Mode::order ? "order" : "fixed:" + std::to_string(value);
}

double StepPolicy::effective_tol() const {
  const double base = tol.mode == Tolerance::Mode::order ? std::pow(h, 2 * s) : tol.value;
  return std::max(base, tol_floor);
}

std::vector<double> uniform_grid(double t_end, double h) {
  if (!(h > 0.0)) throw InvalidInput("step size must be positive");
  if (!(t_end > 0.0)) throw InvalidInput("horizon must be positive");
  const double ratio = t_end / h;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidInput("step size " + std::to_string(h) + " does not divide horizon " + std::to_string(t_end));
  }
  const auto count = static_cast<std::size_t>(steps);
  std::vector<double> grid(count + 1);
  for (std::size_t i = 0; i <= count; ++i) grid[i] = static_cast<double>(i) * h;
  grid.back() = t_end;
  return grid;
}

LinearStepper::LinearStepper(const PoissonModel& model, StepPolicy policy)
    : model_(&model), policy_(policy), pade_(build_pade(policy.s)) {
  if (!(policy_.h > 0.0)) throw InvalidInput("LinearStepper: step size must be positive");
  if (policy_.k_max < 1) throw InvalidInput("LinearStepper: k_max must be positive");
  a_ = policy_.h * SparseMatrix(model.constant_structure() * model.q());
  a_.makeCompressed();
  minus_ = assemble_pade_matrix(a_, pade_, -1);
  plus_ = assemble_pade_matrix(a_, pade_, 1);
  if (policy_.solver == LinearSolver::dense_direct) {
    direct_.emplace();
    direct_->compute(minus_);
    if (direct_->info() != Eigen::Success) throw SingularMatrix("LinearStepper: D_s(-hJQ) factorization failed");
  }
}

std::pair<Vector, LinearSolveReport> LinearStepper::step(const Vector& y) const {
  const QSpace& space = model_->space();
  if (y.size() != space.dim()) throw DimensionMismatch("LinearStepper::step");
  const Vector rhs = plus_ * y;
  const ResidualFn residual = [this, rhs](const Vector& x) { return (minus_ * x - rhs).norm(); };
  const LinearAction action = [this](const Vector& x) { return Vector(a_ * x); };
  const double tol = policy_.effective_tol();

  if (y.isZero(0.0)) {
    LinearSolveReport r;
    r.iterate = y;
    r.converged = true;
    return {y, r};
  }

  LinearSolveReport report;
  switch (policy_.solver) {
    case LinearSolver::qaa_v1:
    case LinearSolver::qaa_v2: {
      QaaOptions opts;
      opts.k_max = policy_.k_max;
      opts.tol = tol;
      opts.residual = residual;
      report = policy_.solver == LinearSolver::qaa_v1 ? qaa_v1(space, action, y, pade_, opts)
                                                      : qaa_v2(space, action, y, pade_, opts);
      break;
    }
    case LinearSolver::gmres: {
      GmresOptions opts;
      opts.k_max = policy_.k_max;
      opts.tol = tol;
      opts.reference = y;
      const LinearAction m = [this](const Vector& x) { return Vector(minus_ * x); };
      report = gmres_baseline(space, m, rhs, opts);
      break;
    }
    case LinearSolver::exp_arnoldi: {
      ExpArnoldiOptions opts;
      opts.k_fixed = policy_.k_max;
      opts.residual = residual;
      report = exp_arnoldi(space, action, y, opts);
      break;
    }
    case LinearSolver::dense_direct: {
      report.iterate = direct_->solve(rhs);
      report.k = 1;
      report.linear_solves = 1;
      report.residual_euclid = residual(report.iterate);
      report.energy_dev = energy_deviation(space, report.iterate, space.norm(y));
      report.converged = true;
      report.trace.push_back({1, report.residual_euclid, report.energy_dev, 0});
      break;
    }
  }
  return {report.iterate, std::move(report)};
}

std::pair<Vector, LinearSolveReport> gauss_step_linear(const PoissonModel& model, const Vector& y_prev,
                                                       const StepPolicy& policy) {
  return LinearStepper(model, policy).step(y_prev);
}

TrajectoryReport integrate_linear(const PoissonModel& model, double t_end, const StepPolicy& policy) {
  const std::vector<double> grid = uniform_grid(t_end, policy.h);
  const LinearStepper stepper(model, policy);
  const QSpace& space = model.space();
  const double norm0 = space.norm(model.y0());

  TrajectoryReport traj;
  traj.times = grid;
  traj.states.reserve(grid.size());
  traj.states.push_back(model.y0());
  traj.energy_dev.push_back(0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    auto [y, report] = stepper.step(traj.states.back());
    const double dev = energy_deviation(space, y, norm0);
    traj.energy_dev.push_back(dev);
    traj.max_energy_dev = std::max(traj.max_energy_dev, dev);
    traj.iterations.push_back(report.k);
    traj.converged.push_back(report.converged);
    traj.states.push_back(std::move(y));
  }
  return traj;
}

double l2_error(const TrajectoryReport& traj, const TrajectoryReport& ref) {
  const std::size_t m = traj.times.size();
  if (m != ref.times.size() || m != traj.states.size() || m != ref.states.size() || m < 2) {
    throw InvalidInput("l2_error: trajectories are not on the same grid");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (std::abs(traj.times[i] - ref.times[i]) > 1e-12 * std::max(1.0, std::abs(ref.times[i]))) {
      throw InvalidInput("l2_error: time grids differ");
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = (i == 0 || i + 1 == m) ? 0.5 : 1.0;
    const double dt = i + 1 < m ? traj.times[i + 1] - traj.times[i] : traj.times[i] - traj.times[i - 1];
    sum += w * dt * (traj.states[i] - ref.states[i]).squaredNorm();
  }
  return std::sqrt(sum);
}

double fit_order(const std::vector<double>& hs, const std::vector<double>& errors, double floor) {
  if (hs.size() != errors.size()) throw DimensionMismatch("fit_order");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (errors[i] >= floor && errors[i] > 0.0) {
      x.push_back(std::log(hs[i]));
      y.push_back(std::log(errors[i]));
    }
  }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace gausskry
