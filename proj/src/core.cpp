#include "gausskry/core.hpp"

#include <Eigen/SparseCholesky>

namespace gausskry {

namespace {

bool exactly_symmetric(const SparseMatrix& q) {
  const SparseMatrix qt = q.transpose();
  const SparseMatrix diff = q - qt;
  for (Index k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
      if (it.value() != 0.0) return false;
  return true;
}

}  // namespace

QSpace::QSpace(SparseMatrix q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols()) throw DimensionMismatch("QSpace: Q must be square");
  if (q_.rows() == 0) throw InvalidInput("QSpace: empty Q");
  q_.makeCompressed();
  if (!exactly_symmetric(q_)) throw InvalidInput("QSpace: Q is not symmetric");

  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(q_);
  if (llt.info() != Eigen::Success) throw InvalidInput("QSpace: Q is not positive definite");
  chol_ = llt.matrixL();
  chol_.makeCompressed();
}

QSpace::QSpace(const Matrix& q) : QSpace(SparseMatrix(q.sparseView())) {}

void QSpace::check_dim(const Vector& x) const {
  if (x.size() != dim()) {
    throw DimensionMismatch("QSpace: vector of size " + std::to_string(x.size()) +
                            " in space of dimension " + std::to_string(dim()));
  }
}

double QSpace::inner(const Vector& x, const Vector& y) const {
  check_dim(x);
  check_dim(y);
  // Through the Cholesky factor so that inner(x, y) == inner(y, x) bitwise
  // and inner(x, x) == norm(x)^2 up to rounding.
  return Vector(chol_.transpose() * x).dot(Vector(chol_.transpose() * y));
}

double QSpace::norm(const Vector& x) const {
  check_dim(x);
  return (chol_.transpose() * x).norm();
}

double QSpace::energy(const Vector& y) const {
  const double r = norm(y);
  return 0.5 * r * r;
}

Vector QSpace::to_chol_coords(const Vector& x) const {
  check_dim(x);
  return chol_.transpose() * x;
}

Vector QSpace::from_chol_coords(const Vector& u) const {
  check_dim(u);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(u);
}

double QSpace::op_norm(const Matrix& m) const {
  if (m.rows() != dim() || m.cols() != dim()) throw DimensionMismatch("QSpace::op_norm");
  const Matrix lt = Matrix(chol_.transpose());
  // L^T M L^{-T} = (L^{-1} (L^T M)^T)^T
  const Matrix ltm = lt * m;
  const Matrix inner = lt.transpose().triangularView<Eigen::Lower>().solve(ltm.transpose()).transpose();
  Eigen::JacobiSVD<Matrix> svd(inner);
  return svd.singularValues()(0);
}

double q_inner(const QSpace& space, const Vector& x, const Vector& y) { return space.inner(x, y); }
double q_norm(const QSpace& space, const Vector& x) { return space.norm(x); }
double energy(const QSpace& space, const Vector& y) { return space.energy(y); }

double energy_deviation(const QSpace& space, const Vector& x, double ref_norm) {
  return std::abs(1.0 - space.norm(x) / ref_norm);
}

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

Matrix dense_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) throw DimensionMismatch("dense_solve");
  Eigen::PartialPivLU<Matrix> lu(a);
  const double threshold = kPivotRtol * max_abs(a);
  const auto diag = lu.matrixLU().diagonal();
  for (Index i = 0; i < diag.size(); ++i) {
    if (!(std::abs(diag(i)) > threshold)) throw SingularMatrix("dense LU: pivot vanished");
  }
  return lu.solve(b);
}

}  // namespace gausskry
