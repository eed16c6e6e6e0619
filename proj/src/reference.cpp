#include <algorithm>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include "gausskry/models.hpp"
#include "gausskry/stepping.hpp"

namespace gausskry {

TrajectoryReport reference_linear(const PoissonModel& model, const std::vector<double>& grid) {
  const Index n = model.dim();
  if (n > kDenseReferenceLimit) {
    throw InvalidInput("reference_linear: dimension " + std::to_string(n) +
                       " too large for the dense reference; use a smaller benchmark");
  }
  const QSpace& space = model.space();
  const Matrix l = Matrix(space.chol());
  const Matrix b = l.transpose() * Matrix(model.constant_structure()) * l;

  // i B is Hermitian: i B = U diag(lambda) U^H, so exp(t B) = U diag(exp(-i lambda t)) U^H.
  const CMatrix ib = Complex(0.0, 1.0) * b.cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(ib);
  if (es.info() != Eigen::Success) throw std::runtime_error("reference_linear: eigendecomposition failed");
  const CMatrix& u = es.eigenvectors();
  const Vector& lambda = es.eigenvalues();
  const CVector c = u.adjoint() * space.to_chol_coords(model.y0()).cast<Complex>();
  const double norm0 = space.norm(model.y0());

  TrajectoryReport ref;
  ref.times = grid;
  for (double t : grid) {
    CVector phase(n);
    for (Index i = 0; i < n; ++i) phase(i) = std::exp(Complex(0.0, -lambda(i) * t)) * c(i);
    const Vector coords = (u * phase).real();
    Vector y = space.from_chol_coords(coords);
    const double dev = energy_deviation(space, y, norm0);
    ref.energy_dev.push_back(dev);
    ref.max_energy_dev = std::max(ref.max_energy_dev, dev);
    ref.states.push_back(std::move(y));
  }
  return ref;
}

TrajectoryReport reference_nonlinear(const PoissonModel& model, const std::vector<double>& grid,
                                     double abs_tol) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<double>;
  if (grid.empty()) throw InvalidInput("reference_nonlinear: empty grid");
  if (!(abs_tol > 0.0)) throw InvalidInput("reference_nonlinear: tolerance must be positive");
  const Index n = model.dim();

  auto system = [&model, n](const State& x, State& dxdt, double) {
    const Vector f = model.rhs(Eigen::Map<const Vector>(x.data(), n));
    dxdt.assign(f.data(), f.data() + n);
  };

  TrajectoryReport ref;
  auto observer = [&ref, n](const State& x, double t) {
    ref.times.push_back(t);
    ref.states.emplace_back(Eigen::Map<const Vector>(x.data(), n));
  };

  State x(model.y0().data(), model.y0().data() + n);
  const double dt0 = grid.size() > 1 ? (grid[1] - grid[0]) / 16.0 : 1e-3;
  try {
    ode::integrate_times(ode::make_controlled(abs_tol, 0.0, ode::runge_kutta_fehlberg78<State>()), system, x,
                         grid.begin(), grid.end(), dt0, observer);
  } catch (const std::exception& e) {
    throw ToleranceNotAchievable(std::string("reference_nonlinear: ") + e.what());
  }

  const QSpace& space = model.space();
  const double norm0 = space.norm(model.y0());
  for (const Vector& y : ref.states) {
    const double dev = energy_deviation(space, y, norm0);
    ref.energy_dev.push_back(dev);
    ref.max_energy_dev = std::max(ref.max_energy_dev, dev);
  }
  const double drift_limit = std::max(1e-11, 1e3 * abs_tol);
  if (ref.max_energy_dev > drift_limit) {
    throw ToleranceNotAchievable("reference_nonlinear: energy drift " + std::to_string(ref.max_energy_dev) +
                                 " exceeds " + std::to_string(drift_limit));
  }
  return ref;
}

}  // namespace gausskry
