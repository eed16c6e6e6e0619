#include "gausskry/krylov.hpp"

namespace gausskry {

QArnoldi::QArnoldi(const QSpace& space, LinearAction a, const Vector& start, ArnoldiOptions options)
    : space_(&space), a_(std::move(a)), options_(options), start_norm_(space.norm(start)) {
  if (!(start_norm_ > 0.0)) throw InvalidInput("QArnoldi: start vector must be nonzero");
  next_ = start / start_norm_;
  basis_.resize(space.dim(), std::min<Index>(space.dim(), 16));
}

void QArnoldi::extend() {
  if (breakdown_) throw InvalidState("QArnoldi: extend after breakdown");
  if (!has_next_) throw InvalidState("QArnoldi: no candidate vector");

  if (k_ == basis_.cols()) basis_.conservativeResize(Eigen::NoChange, std::max<Index>(2 * k_, 1));
  basis_.col(k_) = next_;
  ++k_;

  Vector w = a_(basis_.col(k_ - 1));
  const double norm_av = space_->norm(w);

  if (options_.mode == Orthogonalization::skew_lanczos) {
    // h_{k-1,k} = -h_{k,k-1}, h_{k,k} = 0
    if (k_ > 1) w += beta_[static_cast<std::size_t>(k_ - 2)] * basis_.col(k_ - 2);
  } else {
    full_h_.conservativeResize(k_ + 1, k_);
    full_h_.row(k_).setZero();
    full_h_.col(k_ - 1).setZero();
    for (Index i = 0; i < k_; ++i) {
      const double hik = space_->inner(basis_.col(i), w);
      full_h_(i, k_ - 1) = hik;
      w -= hik * basis_.col(i);
    }
  }
  if (options_.reorthogonalize) {
    for (Index i = 0; i < k_; ++i) {
      const double c = space_->inner(basis_.col(i), w);
      if (options_.mode == Orthogonalization::full) full_h_(i, k_ - 1) += c;
      w -= c * basis_.col(i);
    }
  }

  const double beta = space_->norm(w);
  if (beta <= options_.breakdown_rtol * norm_av) {
    breakdown_ = true;
    has_next_ = false;
    h_next_ = 0.0;
    return;
  }
  beta_.push_back(beta);
  if (options_.mode == Orthogonalization::full) full_h_(k_, k_ - 1) = beta;
  h_next_ = beta;
  next_ = w / beta;
}

std::vector<double> QArnoldi::subdiagonal() const {
  const auto count = static_cast<std::size_t>(std::max<Index>(k_ - 1, 0));
  return {beta_.begin(), beta_.begin() + static_cast<std::ptrdiff_t>(count)};
}

BandedMatrix<double> QArnoldi::tridiagonal() const {
  if (options_.mode != Orthogonalization::skew_lanczos) {
    throw InvalidState("QArnoldi::tridiagonal requires skew_lanczos mode");
  }
  BandedMatrix<double> t(k_, 1);
  for (Index i = 0; i + 1 < k_; ++i) {
    const double b = beta_[static_cast<std::size_t>(i)];
    t.at(i + 1, i) = b;
    t.at(i, i + 1) = -b;
  }
  return t;
}

Matrix QArnoldi::hessenberg() const {
  if (options_.mode == Orthogonalization::full) return full_h_.topRows(k_);
  return tridiagonal().to_dense();
}

std::optional<Vector> QArnoldi::v_next() const {
  if (k_ == 0 || !has_next_) return std::nullopt;
  return next_;
}

}  // namespace gausskry
