#include <chrono>
#include <cmath>

#include "gausskry/krylov.hpp"

namespace gausskry {

LinearSolveReport gmres_baseline(const QSpace& space, const LinearAction& m, const Vector& b,
                                 const GmresOptions& options) {
  using Clock = std::chrono::steady_clock;
  const Index n = b.size();
  if (n != space.dim()) throw DimensionMismatch("gmres_baseline: right-hand side dimension");
  if (options.k_max < 1) throw InvalidInput("gmres_baseline: k_max must be positive");
  const double beta = b.norm();
  if (!(beta > 0.0)) throw InvalidInput("gmres_baseline: right-hand side must be nonzero");
  const double ref_norm = space.norm(options.reference ? *options.reference : b);
  const auto start = Clock::now();
  const Index cap = std::min(options.k_max, n);

  Matrix v(n, cap + 1);
  Matrix r = Matrix::Zero(cap + 1, cap);  // Hessenberg, rotated in place into R
  Vector cs = Vector::Zero(cap);
  Vector sn = Vector::Zero(cap);
  Vector g = Vector::Zero(cap + 1);
  g(0) = beta;
  v.col(0) = b / beta;

  LinearSolveReport report;
  for (Index j = 0; j < cap; ++j) {
    Vector w = m(v.col(j));
    const double norm_w = w.norm();
    for (Index i = 0; i <= j; ++i) {
      r(i, j) = w.dot(v.col(i));
      w -= r(i, j) * v.col(i);
    }
    r(j + 1, j) = w.norm();
    const bool breakdown = r(j + 1, j) <= 1e-14 * norm_w;
    if (!breakdown) v.col(j + 1) = w / r(j + 1, j);

    for (Index i = 0; i < j; ++i) {
      const double x = r(i, j);
      const double y = r(i + 1, j);
      r(i, j) = cs(i) * x + sn(i) * y;
      r(i + 1, j) = -sn(i) * x + cs(i) * y;
    }
    const double x = r(j, j);
    const double y = r(j + 1, j);
    const double den = std::hypot(x, y);
    cs(j) = x / den;
    sn(j) = y / den;
    r(j, j) = den;
    r(j + 1, j) = 0.0;
    g(j + 1) = -sn(j) * g(j);
    g(j) = cs(j) * g(j);

    const Index k = j + 1;
    const Vector coef = r.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    report.iterate = v.leftCols(k) * coef;
    report.k = k;
    report.breakdown = breakdown;
    report.residual_euclid = (b - m(report.iterate)).norm();
    report.energy_dev = energy_deviation(space, report.iterate, ref_norm);
    const std::int64_t ns =
        options.record_time ? std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count() : 0;
    report.trace.push_back({k, report.residual_euclid, report.energy_dev, ns});
    if (report.residual_euclid <= options.tol || breakdown) {
      report.converged = true;
      break;
    }
  }
  return report;
}

}  // namespace gausskry
