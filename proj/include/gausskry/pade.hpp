#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "gausskry/core.hpp"

namespace gausskry {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline constexpr int kMaxPadeDegree = 8;

/**
 * Diagonal degree-s Padé approximation R_s(z) = D_s(z) / D_s(-z) of exp(z),
 * together with its partial fraction form
 *
 *   R_s(z) = (-1)^s + sum_j weights[j] / (z - poles[j]).
 *
 * Conjugate pole pairs are stored adjacently, the member with negative
 * imaginary part first, pairs ordered by real part; a real pole (odd s) comes
 * last. Paired entries are exact conjugates of each other.
 */
struct PadeData {
  int degree = 0;
  std::vector<Rational> exact_coeffs;  // a_0 .. a_s
  std::vector<double> coeffs;
  std::vector<Complex> poles;
  std::vector<Complex> weights;
  double kappa = 0.0;  // Lipschitz constant of R_s on the Q-skew matrices

  double sign() const { return degree % 2 == 0 ? 1.0 : -1.0; }
  /// D_s(z) by Horner.
  Complex numerator(Complex z) const;
  /// D_s'(z) by Horner.
  Complex numerator_derivative(Complex z) const;
  /// Indices of poles that carry their own solve: one per conjugate pair, one
  /// per real pole.
  std::vector<std::size_t> representative_poles() const;
  bool is_real_pole(std::size_t j) const { return poles[j].imag() == 0.0; }
};

/// Builds the degree-s data for 1 <= s <= 8.
PadeData build_pade(int s);

/// sum_j |w_j| / Re(tau_j)^2
double lipschitz_constant(const std::vector<Complex>& poles, const std::vector<Complex>& weights);

Complex eval_scalar(const PadeData& p, Complex z);
Complex eval_scalar_pfd(const PadeData& p, Complex z);

/// D_s(sign * A) v evaluated through actions of A.
Vector apply_polynomial(const PadeData& p, const LinearAction& a, const Vector& v, double sign);

/// D_s(sign * A) as a dense matrix.
Matrix polynomial_dense(const PadeData& p, const Matrix& a, double sign);

/// R_s(A) = D_s(-A)^{-1} D_s(A) as a dense matrix.
Matrix eval_dense(const PadeData& p, const Matrix& a);

/// Dimension up to which cayley_apply materializes A and factors densely.
inline constexpr Index kDenseThreshold = 64;

/**
 * Cayley transform C(A) y = (I - A)^{-1} (I + A) y for a small operator given
 * by its action. A is assembled column by column and factored by dense LU.
 * R_1(A) = C(A / 2).
 */
Vector cayley_apply(const QSpace& space, const LinearAction& a, const Vector& y,
                    Index dense_threshold = kDenseThreshold);

nlohmann::json to_json(const PadeData& p);

}  // namespace gausskry
