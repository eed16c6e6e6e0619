#include <chrono>

#include "gausskry/krylov.hpp"

namespace gausskry {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_since(Clock::time_point start, bool record) {
  if (!record) return 0;
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

struct Projection {
  Vector iterate;
  Index solves = 0;
};

// Shared driver: extend the Q-Arnoldi basis one vector at a time, form the
// projected iterate, record diagnostics, stop on tolerance, breakdown, k_max
// or the full dimension.
template <class Form, class Stop>
LinearSolveReport run_projection(const QSpace& space, const LinearAction& a, const Vector& y0,
                                 Index k_max, const ResidualFn& residual, const ArnoldiOptions& arnoldi,
                                 bool record_time, Form form, Stop stop) {
  if (y0.size() != space.dim()) throw DimensionMismatch("Krylov solve: start vector dimension");
  if (k_max < 1) throw InvalidInput("Krylov solve: k_max must be positive");
  const auto start = Clock::now();
  QArnoldi arn(space, a, y0, arnoldi);
  const double norm0 = arn.start_norm();
  const Index cap = std::min(k_max, space.dim());

  LinearSolveReport report;
  while (true) {
    arn.extend();
    Projection proj = form(arn, norm0);
    report.linear_solves += proj.solves;
    report.iterate = std::move(proj.iterate);
    report.k = arn.dim();
    report.breakdown = arn.breakdown();
    report.residual_euclid = residual(report.iterate);
    report.energy_dev = energy_deviation(space, report.iterate, norm0);
    report.trace.push_back({report.k, report.residual_euclid, report.energy_dev,
                            elapsed_since(start, record_time)});
    const bool hit = stop(report);
    if (hit || report.breakdown) {
      report.converged = true;
      break;
    }
    if (report.k >= cap) break;
  }
  return report;
}

ResidualFn residual_or_default(const QaaOptions& options, const LinearAction& a, const PadeData& p,
                               const Vector& y0) {
  return options.residual ? options.residual : make_action_residual(a, p, y0);
}

Vector unit(Index k) { return Vector::Unit(k, 0); }

}  // namespace

ResidualFn make_action_residual(const LinearAction& a, const PadeData& p, const Vector& y0) {
  Vector rhs = apply_polynomial(p, a, y0, 1.0);
  return [a, p, rhs = std::move(rhs)](const Vector& x) {
    return (apply_polynomial(p, a, x, -1.0) - rhs).norm();
  };
}

LinearSolveReport qaa_v1(const QSpace& space, const LinearAction& a, const Vector& y0, const PadeData& p,
                         const QaaOptions& options) {
  auto form = [&p](const QArnoldi& arn, double norm0) {
    const BandedMatrix<double> h = arn.tridiagonal();
    const Index k = h.order();
    // eta = D_s(H_k) e_1
    Vector eta = p.coeffs.back() * unit(k);
    for (int j = p.degree - 1; j >= 0; --j) eta = h.multiply(eta) + p.coeffs[static_cast<std::size_t>(j)] * unit(k);
    // D_k = D_s(-H_k), semibandwidth s
    const BandedMatrix<double> minus_h = h.scaled(-1.0);
    BandedMatrix<double> d = BandedMatrix<double>::identity(k).scaled(p.coeffs.back());
    for (int j = p.degree - 1; j >= 0; --j) {
      d = banded_multiply(d, minus_h).shifted(p.coeffs[static_cast<std::size_t>(j)]);
    }
    const Vector xi = banded_solve(d, eta);
    return Projection{arn.basis() * xi * norm0, 1};
  };
  const double tol = options.tol;
  return run_projection(space, a, y0, options.k_max, residual_or_default(options, a, p, y0), options.arnoldi,
                        options.record_time, form,
                        [tol](const LinearSolveReport& r) { return r.residual_euclid <= tol; });
}

LinearSolveReport qaa_v2(const QSpace& space, const LinearAction& a, const Vector& y0, const PadeData& p,
                         const QaaOptions& options) {
  const std::vector<std::size_t> reps = p.representative_poles();
  auto form = [&p, &reps, &y0](const QArnoldi& arn, double norm0) {
    const BandedMatrix<double> h = arn.tridiagonal();
    const Index k = h.order();
    Vector c = Vector::Zero(k);
    for (std::size_t j : reps) {
      const Complex tau = p.poles[j];
      const Complex w = p.weights[j];
      if (p.is_real_pole(j)) {
        const Vector zeta = banded_solve(h.shifted(-tau.real()), Vector(unit(k)));
        c += w.real() * zeta;
      } else {
        const CVector zeta = banded_solve(h.cast<Complex>().shifted(-tau), CVector(unit(k).cast<Complex>()));
        c += 2.0 * (w * zeta).real();
      }
    }
    return Projection{p.sign() * y0 + arn.basis() * c * norm0, static_cast<Index>(reps.size())};
  };
  const double tol = options.tol;
  return run_projection(space, a, y0, options.k_max, residual_or_default(options, a, p, y0), options.arnoldi,
                        options.record_time, form,
                        [tol](const LinearSolveReport& r) { return r.residual_euclid <= tol; });
}

LinearSolveReport qaa_v2_short_recurrence(const QSpace& space, const LinearAction& a, const Vector& y0,
                                          const QaaOptions& options) {
  if (y0.size() != space.dim()) throw DimensionMismatch("qaa_v2_short_recurrence");
  if (options.k_max < 1) throw InvalidInput("qaa_v2_short_recurrence: k_max must be positive");
  const PadeData p = build_pade(1);
  const ResidualFn residual = residual_or_default(options, a, p, y0);
  const auto start = Clock::now();
  const double norm0 = space.norm(y0);
  if (!(norm0 > 0.0)) throw InvalidInput("qaa_v2_short_recurrence: start vector must be nonzero");
  const Index cap = std::min(options.k_max, space.dim());

  // H_k - 2I = L U without pivoting: u_1 = -2, l_i = beta_i / u_i,
  // u_{i+1} = -2 + l_i beta_i, so |u_i| >= 2 throughout.
  Vector v_prev = Vector::Zero(y0.size());
  Vector v = y0 / norm0;
  Vector p_dir;
  Vector sum = Vector::Zero(y0.size());
  double beta_prev = 0.0;
  double u = -2.0;
  double z = 1.0;

  LinearSolveReport report;
  for (Index k = 1;; ++k) {
    if (k == 1) {
      p_dir = v / u;
    } else {
      const double l = beta_prev / u;
      u = -2.0 + l * beta_prev;
      z = -l * z;
      p_dir = (v + beta_prev * p_dir) / u;
    }
    sum += z * p_dir;
    ++report.linear_solves;

    report.iterate = -y0 - 4.0 * norm0 * sum;
    report.k = k;

    Vector w = a(v);
    const double norm_av = space.norm(w);
    w += beta_prev * v_prev;
    const double beta = space.norm(w);
    report.breakdown = beta <= options.arnoldi.breakdown_rtol * norm_av;

    report.residual_euclid = residual(report.iterate);
    report.energy_dev = energy_deviation(space, report.iterate, norm0);
    report.trace.push_back({k, report.residual_euclid, report.energy_dev, elapsed_since(start, options.record_time)});
    if (report.residual_euclid <= options.tol || report.breakdown) {
      report.converged = true;
      break;
    }
    if (k >= cap) break;
    v_prev = std::move(v);
    v = w / beta;
    beta_prev = beta;
  }
  return report;
}

LinearSolveReport exp_arnoldi(const QSpace& space, const LinearAction& a, const Vector& y0,
                              const ExpArnoldiOptions& options) {
  // Default residual: ODE residual of the projected flow at t = 1,
  // h_{k+1,k} |e_k^T exp(H_k) e_1| ||v_{k+1}||_2 ||y0||_Q.
  double estimate = 0.0;
  auto form = [&estimate](const QArnoldi& arn, double norm0) {
    const Matrix e = small_skew_expm(arn.hessenberg());
    const Index k = e.rows();
    const auto next = arn.v_next();
    estimate = next ? arn.h_next() * std::abs(e(k - 1, 0)) * next->norm() * norm0 : 0.0;
    return Projection{arn.basis() * e.col(0) * norm0, 0};
  };
  ResidualFn residual = options.residual ? options.residual : ResidualFn([&estimate](const Vector&) { return estimate; });
  const Index k_fixed = options.k_fixed;
  return run_projection(space, a, y0, k_fixed, residual, options.arnoldi, options.record_time, form,
                        [k_fixed](const LinearSolveReport& r) { return r.k >= k_fixed; });
}

SparseMatrix assemble_pade_matrix(const SparseMatrix& a, const PadeData& p, int sign) {
  if (a.rows() != a.cols()) throw DimensionMismatch("assemble_pade_matrix: matrix must be square");
  if (sign != 1 && sign != -1) throw InvalidInput("assemble_pade_matrix: sign must be +1 or -1");
  SparseMatrix eye(a.rows(), a.cols());
  eye.setIdentity();
  const SparseMatrix signed_a = static_cast<double>(sign) * a;
  SparseMatrix acc = p.coeffs.back() * eye;
  for (int j = p.degree - 1; j >= 0; --j) {
    acc = SparseMatrix(acc * signed_a) + p.coeffs[static_cast<std::size_t>(j)] * eye;
  }
  acc.prune(0.0);
  acc.makeCompressed();
  return acc;
}

PadeResidual::PadeResidual(const SparseMatrix& a, const PadeData& p, const Vector& y0)
    : minus_(assemble_pade_matrix(a, p, -1)), rhs_(assemble_pade_matrix(a, p, 1) * y0) {}

}  // namespace gausskry
