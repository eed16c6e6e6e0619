#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gausskry/error.hpp"

namespace gausskry {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Complex = std::complex<double>;

/// Action x -> A x of a linear operator that is only available matrix-free.
using LinearAction = std::function<Vector(const Vector&)>;

/// Pivots with |p| <= kPivotRtol * max|a_ij| are treated as singular.
inline constexpr double kPivotRtol = 1e-14;

/**
 * Euclidean space R^n equipped with the inner product <x,y>_Q = x^T Q y of a
 * symmetric positive definite matrix Q.
 *
 * The Cholesky factor Q = L L^T is computed once at construction; the Q-norm
 * is evaluated as ||L^T x||_2, which stays accurate for vectors that are
 * nearly Q-null. Instances are immutable and may be shared across threads.
 */
class QSpace {
 public:
  explicit QSpace(SparseMatrix q);
  explicit QSpace(const Matrix& q);

  Index dim() const { return q_.rows(); }
  const SparseMatrix& matrix() const { return q_; }
  /// Lower-triangular L with L L^T = Q.
  const SparseMatrix& chol() const { return chol_; }

  double inner(const Vector& x, const Vector& y) const;
  double norm(const Vector& x) const;
  double energy(const Vector& y) const;

  /// u = L^T x.
  Vector to_chol_coords(const Vector& x) const;
  /// x = L^{-T} u.
  Vector from_chol_coords(const Vector& u) const;

  /// Operator norm of a dense n x n matrix induced by the Q-norm,
  /// ||L^T M L^{-T}||_2.
  double op_norm(const Matrix& m) const;

 private:
  void check_dim(const Vector& x) const;

  SparseMatrix q_;
  SparseMatrix chol_;
};

double q_inner(const QSpace& space, const Vector& x, const Vector& y);
double q_norm(const QSpace& space, const Vector& x);
/// H(y) = 1/2 y^T Q y.
double energy(const QSpace& space, const Vector& y);

/// |1 - ||x||_Q / ||ref||_Q|.
double energy_deviation(const QSpace& space, const Vector& x, double ref_norm);

/**
 * Square banded matrix with equal lower and upper semibandwidth, stored by
 * diagonals: diagonal d in [-p, p] occupies a stride-n slot and holds
 * A(i, i + d) at position i. Reads outside the band return exact zero.
 */
template <class T>
class BandedMatrix {
 public:
  using Dense = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  BandedMatrix(Index order, Index semibandwidth)
      : n_(order), p_(semibandwidth), diags_(static_cast<std::size_t>((2 * semibandwidth + 1) * order), T(0)) {
    if (order < 0 || semibandwidth < 0) throw InvalidInput("BandedMatrix: negative size");
  }

  static BandedMatrix identity(Index order, Index semibandwidth = 0) {
    BandedMatrix m(order, semibandwidth);
    for (Index i = 0; i < order; ++i) m.at(i, i) = T(1);
    return m;
  }

  Index order() const { return n_; }
  Index semibandwidth() const { return p_; }

  bool in_band(Index i, Index j) const {
    return i >= 0 && j >= 0 && i < n_ && j < n_ && std::abs(j - i) <= p_;
  }

  T operator()(Index i, Index j) const {
    return in_band(i, j) ? diags_[slot(i, j)] : T(0);
  }

  T& at(Index i, Index j) {
    if (!in_band(i, j)) throw InvalidInput("BandedMatrix: write outside band");
    return diags_[slot(i, j)];
  }

  double max_abs() const {
    double m = 0.0;
    for (Index i = 0; i < n_; ++i)
      for (Index j = std::max<Index>(0, i - p_); j <= std::min(n_ - 1, i + p_); ++j)
        m = std::max(m, static_cast<double>(std::abs((*this)(i, j))));
    return m;
  }

  Vec multiply(const Vec& x) const {
    if (x.size() != n_) throw DimensionMismatch("BandedMatrix::multiply");
    Vec y = Vec::Zero(n_);
    for (Index i = 0; i < n_; ++i)
      for (Index j = std::max<Index>(0, i - p_); j <= std::min(n_ - 1, i + p_); ++j)
        y(i) += (*this)(i, j) * x(j);
    return y;
  }

  Dense to_dense() const {
    Dense d = Dense::Zero(n_, n_);
    for (Index i = 0; i < n_; ++i)
      for (Index j = std::max<Index>(0, i - p_); j <= std::min(n_ - 1, i + p_); ++j)
        d(i, j) = (*this)(i, j);
    return d;
  }

  /// this + alpha * I
  BandedMatrix shifted(T alpha) const {
    BandedMatrix r = *this;
    for (Index i = 0; i < n_; ++i) r.at(i, i) += alpha;
    return r;
  }

  BandedMatrix scaled(T alpha) const {
    BandedMatrix r = *this;
    for (auto& v : r.diags_) v *= alpha;
    return r;
  }

  template <class U>
  BandedMatrix<U> cast() const {
    BandedMatrix<U> r(n_, p_);
    for (Index i = 0; i < n_; ++i)
      for (Index j = std::max<Index>(0, i - p_); j <= std::min(n_ - 1, i + p_); ++j)
        r.at(i, j) = static_cast<U>((*this)(i, j));
    return r;
  }

 private:
  std::size_t slot(Index i, Index j) const {
    return static_cast<std::size_t>((j - i + p_) * n_ + i);
  }

  Index n_;
  Index p_;
  std::vector<T> diags_;
};

/// Product of two banded matrices; the semibandwidths add.
template <class T>
BandedMatrix<T> banded_multiply(const BandedMatrix<T>& a, const BandedMatrix<T>& b) {
  if (a.order() != b.order()) throw DimensionMismatch("banded_multiply");
  const Index n = a.order();
  const Index pa = a.semibandwidth();
  const Index pb = b.semibandwidth();
  BandedMatrix<T> c(n, std::min(pa + pb, std::max<Index>(n - 1, 0)));
  for (Index i = 0; i < n; ++i) {
    for (Index l = std::max<Index>(0, i - pa); l <= std::min(n - 1, i + pa); ++l) {
      const T ail = a(i, l);
      if (ail == T(0)) continue;
      for (Index j = std::max<Index>(0, l - pb); j <= std::min(n - 1, l + pb); ++j) {
        c.at(i, j) += ail * b(l, j);
      }
    }
  }
  return c;
}

/**
 * LU factorization with partial pivoting of a banded matrix.
 *
 * Uses the column-major band layout of LAPACK's gbtrf: the upper band of U
 * grows to 2p through row interchanges, so the working array carries 3p + 1
 * diagonals.
 */
template <class T>
class BandedLU {
 public:
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  explicit BandedLU(const BandedMatrix<T>& m)
      : n_(m.order()), kl_(m.semibandwidth()), ku_(2 * m.semibandwidth()),
        ld_(kl_ + ku_ + 1), ab_(static_cast<std::size_t>(ld_ * n_), T(0)),
        piv_(static_cast<std::size_t>(n_)) {
    const double scale = m.max_abs();
    for (Index j = 0; j < n_; ++j)
      for (Index i = std::max<Index>(0, j - kl_); i <= std::min(n_ - 1, j + kl_); ++i)
        ref(i, j) = m(i, j);
    const double threshold = kPivotRtol * scale;

    for (Index c = 0; c < n_; ++c) {
      const Index last = std::min(n_ - 1, c + kl_);
      Index r = c;
      double best = std::abs(ref(c, c));
      for (Index i = c + 1; i <= last; ++i) {
        if (std::abs(ref(i, c)) > best) {
          best = std::abs(ref(i, c));
          r = i;
        }
      }
      if (!(best > threshold)) {
        throw SingularMatrix("banded LU: pivot " + std::to_string(c) + " vanished");
      }
      piv_[static_cast<std::size_t>(c)] = r;
      const Index jend = std::min(n_ - 1, c + ku_);
      if (r != c) {
        for (Index j = c; j <= jend; ++j) std::swap(ref(r, j), ref(c, j));
      }
      const T pivot = ref(c, c);
      for (Index i = c + 1; i <= last; ++i) {
        const T l = ref(i, c) / pivot;
        ref(i, c) = l;
        if (l == T(0)) continue;
        for (Index j = c + 1; j <= jend; ++j) ref(i, j) -= l * ref(c, j);
      }
    }
  }

  Vec solve(const Vec& b) const {
    if (b.size() != n_) throw DimensionMismatch("BandedLU::solve");
    Vec x = b;
    for (Index c = 0; c < n_; ++c) {
      const Index r = piv_[static_cast<std::size_t>(c)];
      if (r != c) std::swap(x(r), x(c));
      const Index last = std::min(n_ - 1, c + kl_);
      for (Index i = c + 1; i <= last; ++i) x(i) -= cref(i, c) * x(c);
    }
    for (Index c = n_ - 1; c >= 0; --c) {
      const Index jend = std::min(n_ - 1, c + ku_);
      T acc = x(c);
      for (Index j = c + 1; j <= jend; ++j) acc -= cref(c, j) * x(j);
      x(c) = acc / cref(c, c);
    }
    return x;
  }

 private:
  T& ref(Index i, Index j) { return ab_[static_cast<std::size_t>(ku_ + i - j + j * ld_)]; }
  const T& cref(Index i, Index j) const { return ab_[static_cast<std::size_t>(ku_ + i - j + j * ld_)]; }

  Index n_;
  Index kl_;
  Index ku_;
  Index ld_;
  std::vector<T> ab_;
  std::vector<Index> piv_;
};

/// Solves M x = b with banded LU; throws SingularMatrix on a vanishing pivot.
template <class T>
Eigen::Matrix<T, Eigen::Dynamic, 1> banded_solve(const BandedMatrix<T>& m,
                                                 const Eigen::Matrix<T, Eigen::Dynamic, 1>& b) {
  if (b.size() != m.order()) throw DimensionMismatch("banded_solve");
  return BandedLU<T>(m).solve(b);
}

/// Dense solve A X = B by partial-pivoting LU with the same pivot rule as the
/// banded solver.
Matrix dense_solve(const Matrix& a, const Matrix& b);

/**
 * exp(H) for a skew-symmetric H by scaling and squaring with the degree-13
 * diagonal Padé kernel. The Padé kernel of a skew matrix is orthogonal, so the
 * result is orthogonal up to rounding.
 */
Matrix small_skew_expm(const Matrix& h);

/// max_ij |a_ij|
double max_abs(const Matrix& a);

}  // namespace gausskry
