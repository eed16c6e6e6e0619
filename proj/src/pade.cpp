#include "gausskry/pade.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace gausskry {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("Padé coefficient overflow");
  return r;
}

std::int64_t factorial(int n) {
  std::int64_t r = 1;
  for (int i = 2; i <= n; ++i) r = checked_mul(r, i);
  return r;
}

// a_j = s! (2s-j)! / ((2s)! j! (s-j)!)
Rational coefficient(int s, int j) {
  const std::int64_t num = checked_mul(factorial(s), factorial(2 * s - j));
  const std::int64_t den = checked_mul(checked_mul(factorial(2 * s), factorial(j)), factorial(s - j));
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

// D_s(-z) and its derivative d/dz D_s(-z) = -D_s'(-z).
Complex denominator(const PadeData& p, Complex z) { return p.numerator(-z); }
Complex denominator_derivative(const PadeData& p, Complex z) {
  return -p.numerator_derivative(-z);
}

struct Reference {
  std::vector<Complex> poles;
  std::vector<Complex> weights;
};

// Published constants for the low degrees; computed data must reproduce them.
Reference reference_constants(int s) {
  const double r3 = std::sqrt(3.0);
  switch (s) {
    case 1:
      return {{Complex(2.0, 0.0)}, {Complex(-4.0, 0.0)}};
    case 2:
      return {{Complex(3.0, -r3), Complex(3.0, r3)}, {Complex(6.0, 6.0 * r3), Complex(6.0, -6.0 * r3)}};
    case 3: {
      const Complex t1(3.67781464537391, -3.50876191956744);
      const Complex w1(16.6012701235744, -20.5831842793869);
      return {{t1, std::conj(t1), Complex(4.64437070925217, 0.0)},
              {w1, std::conj(w1), Complex(-57.2025402471486, 0.0)}};
    }
    default:
      return {};
  }
}

std::vector<Complex> polished_roots(const PadeData& p) {
  const int s = p.degree;
  // Monic companion matrix of D_s(-z) = sum_j a_j (-1)^j z^j.
  std::vector<double> c(static_cast<std::size_t>(s + 1));
  for (int j = 0; j <= s; ++j) c[static_cast<std::size_t>(j)] = p.coeffs[static_cast<std::size_t>(j)] * (j % 2 == 0 ? 1.0 : -1.0);
  const double lead = c[static_cast<std::size_t>(s)];
  Matrix comp = Matrix::Zero(s, s);
  for (int i = 1; i < s; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < s; ++i) comp(i, s - 1) = -c[static_cast<std::size_t>(i)] / lead;

  Eigen::EigenSolver<Matrix> es(comp, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("Padé: companion eigenvalues failed");
  std::vector<Complex> roots;
  for (Index i = 0; i < s; ++i) {
    Complex z = es.eigenvalues()(i);
    z -= denominator(p, z) / denominator_derivative(p, z);
    roots.push_back(z);
  }
  return roots;
}

}  // namespace

Complex PadeData::numerator(Complex z) const {
  Complex acc = coeffs.back();
  for (int j = degree - 1; j >= 0; --j) acc = acc * z + coeffs[static_cast<std::size_t>(j)];
  return acc;
}

Complex PadeData::numerator_derivative(Complex z) const {
  Complex acc = static_cast<double>(degree) * coeffs.back();
  for (int j = degree - 1; j >= 1; --j) acc = acc * z + static_cast<double>(j) * coeffs[static_cast<std::size_t>(j)];
  return acc;
}

std::vector<std::size_t> PadeData::representative_poles() const {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < poles.size(); ++j) {
    if (is_real_pole(j) || poles[j].imag() < 0.0) idx.push_back(j);
  }
  return idx;
}

double lipschitz_constant(const std::vector<Complex>& poles, const std::vector<Complex>& weights) {
  double k = 0.0;
  for (std::size_t j = 0; j < poles.size(); ++j) k += std::abs(weights[j]) / (poles[j].real() * poles[j].real());
  return k;
}

PadeData build_pade(int s) {
  if (s < 1 || s > kMaxPadeDegree) {
    throw InvalidInput("build_pade: degree " + std::to_string(s) + " outside supported range 1.." +
                       std::to_string(kMaxPadeDegree));
  }
  PadeData p;
  p.degree = s;
  for (int j = 0; j <= s; ++j) {
    p.exact_coeffs.push_back(coefficient(s, j));
    p.coeffs.push_back(p.exact_coeffs.back().value());
  }

  const std::vector<Complex> roots = polished_roots(p);
  std::vector<Complex> real_roots;
  std::vector<Complex> lower;  // Im < 0 members of conjugate pairs
  for (const Complex& z : roots) {
    if (std::abs(z.imag()) <= 1e-8 * std::abs(z)) {
      real_roots.emplace_back(z.real(), 0.0);
    } else if (z.imag() < 0.0) {
      lower.push_back(z);
    }
  }
  if (2 * lower.size() + real_roots.size() != static_cast<std::size_t>(s)) {
    throw std::runtime_error("Padé: poles are not closed under conjugation");
  }
  auto by_real = [](const Complex& a, const Complex& b) { return a.real() < b.real(); };
  std::sort(lower.begin(), lower.end(), by_real);
  std::sort(real_roots.begin(), real_roots.end(), by_real);

  auto residue = [&](Complex tau) { return p.numerator(tau) / denominator_derivative(p, tau); };
  for (const Complex& tau : lower) {
    const Complex w = residue(tau);
    p.poles.push_back(tau);
    p.poles.push_back(std::conj(tau));
    p.weights.push_back(w);
    p.weights.push_back(std::conj(w));
  }
  for (const Complex& tau : real_roots) {
    p.poles.push_back(tau);
    p.weights.emplace_back(residue(tau).real(), 0.0);
  }
  p.kappa = lipschitz_constant(p.poles, p.weights);

  const Reference ref = reference_constants(s);
  for (std::size_t j = 0; j < ref.poles.size(); ++j) {
    if (std::abs(ref.poles[j] - p.poles[j]) > 1e-10 || std::abs(ref.weights[j] - p.weights[j]) > 1e-10) {
      throw std::logic_error("build_pade: computed poles disagree with reference constants");
    }
  }
  return p;
}

Complex eval_scalar(const PadeData& p, Complex z) {
  const Complex den = p.numerator(-z);
  if (std::abs(den) <= 1e-300) throw PoleHit("eval_scalar: argument is a pole");
  return p.numerator(z) / den;
}

Complex eval_scalar_pfd(const PadeData& p, Complex z) {
  if (std::abs(p.numerator(-z)) <= 1e-300) throw PoleHit("eval_scalar_pfd: argument is a pole");
  Complex acc = p.sign();
  for (std::size_t j = 0; j < p.poles.size(); ++j) acc += p.weights[j] / (z - p.poles[j]);
  return acc;
}

Vector apply_polynomial(const PadeData& p, const LinearAction& a, const Vector& v, double sign) {
  Vector acc = p.coeffs.back() * v;
  for (int j = p.degree - 1; j >= 0; --j) acc = sign * a(acc) + p.coeffs[static_cast<std::size_t>(j)] * v;
  return acc;
}

Matrix polynomial_dense(const PadeData& p, const Matrix& a, double sign) {
  if (a.rows() != a.cols()) throw DimensionMismatch("polynomial_dense");
  const Matrix eye = Matrix::Identity(a.rows(), a.cols());
  Matrix acc = p.coeffs.back() * eye;
  for (int j = p.degree - 1; j >= 0; --j) acc = sign * (acc * a) + p.coeffs[static_cast<std::size_t>(j)] * eye;
  return acc;
}

Matrix eval_dense(const PadeData& p, const Matrix& a) {
  return dense_solve(polynomial_dense(p, a, -1.0), polynomial_dense(p, a, 1.0));
}

Vector cayley_apply(const QSpace& space, const LinearAction& a, const Vector& y, Index dense_threshold) {
  const Index n = space.dim();
  if (y.size() != n) throw DimensionMismatch("cayley_apply");
  if (n > dense_threshold) {
    throw InvalidInput("cayley_apply: dimension " + std::to_string(n) + " exceeds dense threshold");
  }
  Matrix am(n, n);
  for (Index j = 0; j < n; ++j) am.col(j) = a(Vector::Unit(n, j));
  const Matrix eye = Matrix::Identity(n, n);
  return dense_solve(eye - am, y + am * y);
}

nlohmann::json to_json(const PadeData& p) {
  nlohmann::json j;
  j["degree"] = p.degree;
  j["coefficients"] = p.coeffs;
  nlohmann::json exact = nlohmann::json::array();
  for (const auto& r : p.exact_coeffs) exact.push_back({r.num, r.den});
  j["coefficients_exact"] = exact;
  nlohmann::json poles = nlohmann::json::array();
  nlohmann::json weights = nlohmann::json::array();
  for (std::size_t i = 0; i < p.poles.size(); ++i) {
    poles.push_back({p.poles[i].real(), p.poles[i].imag()});
    weights.push_back({p.weights[i].real(), p.weights[i].imag()});
  }
  j["poles"] = poles;
  j["weights"] = weights;
  j["kappa"] = p.kappa;
  return j;
}

}  // namespace gausskry
