#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "gausskry/models.hpp"
#include "gausskry/pade.hpp"

using namespace gausskry;

namespace {

const double kSqrt3 = std::sqrt(3.0);

Matrix random_matrix(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal;
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = normal(rng);
  return m;
}

Matrix random_spd(std::mt19937_64& rng, Index n) {
  const Matrix b = random_matrix(rng, n);
  const Matrix m = b * b.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
  return 0.5 * (m + m.transpose());
}

// Random element S Q of the Lie algebra with S skew.
Matrix random_algebra(std::mt19937_64& rng, const Matrix& q, double scale) {
  const Matrix b = random_matrix(rng, q.rows());
  return scale * (b - b.transpose()) * q;
}

// Independent closed form of a_j = s!(2s-j)!/((2s)! j! (s-j)!).
double coefficient_oracle(int s, int j) {
  return std::exp(std::lgamma(s + 1.0) + std::lgamma(2.0 * s - j + 1.0) - std::lgamma(2.0 * s + 1.0) -
                  std::lgamma(j + 1.0) - std::lgamma(s - j + 1.0));
}

}  // namespace

TEST_CASE("degree 1: midpoint rule constants") {
  const PadeData p = build_pade(1);
  REQUIRE(p.coeffs.size() == 2);
  CHECK(p.coeffs[0] == 1.0);
  CHECK(p.coeffs[1] == 0.5);
  REQUIRE(p.poles.size() == 1);
  CHECK(std::abs(p.poles[0] - Complex(2.0, 0.0)) <= 1e-12);
  CHECK(std::abs(p.weights[0] - Complex(-4.0, 0.0)) <= 1e-12);
  CHECK(std::abs(p.kappa - 1.0) <= 1e-12);
}

TEST_CASE("degree 2: poles 3 -+ sqrt(3) i with weights 6 +- 6 sqrt(3) i") {
  const PadeData p = build_pade(2);
  CHECK(p.coeffs[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  REQUIRE(p.poles.size() == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    const double sign = p.poles[j].imag() < 0 ? 1.0 : -1.0;
    CHECK(std::abs(p.poles[j] - Complex(3.0, -sign * kSqrt3)) <= 1e-12);
    CHECK(std::abs(p.weights[j] - Complex(6.0, sign * 6.0 * kSqrt3)) <= 1e-12);
  }
}

TEST_CASE("degree 3: printed pole and weight values") {
  const PadeData p = build_pade(3);
  CHECK(p.coeffs[2] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(p.coeffs[3] == doctest::Approx(1.0 / 120.0).epsilon(1e-15));
  const Complex tau1(3.67781464537391, -3.50876191956744);
  const Complex omega1(16.6012701235744, -20.5831842793869);
  const Complex tau2(4.64437070925217, 0.0);
  const Complex omega2(-57.2025402471486, 0.0);
  REQUIRE(p.poles.size() == 3);
  bool found_pair = false;
  bool found_real = false;
  for (std::size_t j = 0; j < 3; ++j) {
    if (std::abs(p.poles[j] - tau1) <= 1e-10) {
      found_pair = true;
      CHECK(std::abs(p.weights[j] - omega1) <= 1e-10);
    }
    if (std::abs(p.poles[j] - std::conj(tau1)) <= 1e-10) CHECK(std::abs(p.weights[j] - std::conj(omega1)) <= 1e-10);
    if (std::abs(p.poles[j] - tau2) <= 1e-10) {
      found_real = true;
      CHECK(std::abs(p.weights[j] - omega2) <= 1e-10);
    }
  }
  CHECK(found_pair);
  CHECK(found_real);
}

TEST_CASE("coefficients follow the closed formula for every supported degree") {
  for (int s = 1; s <= kMaxPadeDegree; ++s) {
    const PadeData p = build_pade(s);
    REQUIRE(p.coeffs.size() == static_cast<std::size_t>(s + 1));
    CHECK(p.coeffs[0] == 1.0);
    for (int j = 0; j <= s; ++j) {
      CHECK(p.coeffs[j] == doctest::Approx(coefficient_oracle(s, j)).epsilon(1e-13));
      const Rational r = p.exact_coeffs[j];
      CHECK(r.value() == p.coeffs[j]);
    }
  }
}

TEST_CASE("unsupported degrees are rejected") {
  CHECK_THROWS_AS(build_pade(0), InvalidInput);
  CHECK_THROWS_AS(build_pade(kMaxPadeDegree + 1), InvalidInput);
}

TEST_CASE("poles: right half-plane, distinct, conjugate-closed with their weights") {
  for (int s = 1; s <= kMaxPadeDegree; ++s) {
    const PadeData p = build_pade(s);
    REQUIRE(p.poles.size() == static_cast<std::size_t>(s));
    for (std::size_t a = 0; a < p.poles.size(); ++a) {
      CHECK(p.poles[a].real() > 0.0);
      // a root of D_s(-z)
      CHECK(std::abs(p.numerator(-p.poles[a])) <= 1e-9 * std::abs(p.numerator_derivative(-p.poles[a])));
      bool partner = p.poles[a].imag() == 0.0 && std::abs(p.weights[a].imag()) <= 1e-10;
      for (std::size_t b = 0; b < p.poles.size(); ++b) {
        if (a == b) continue;
        CHECK(std::abs(p.poles[a] - p.poles[b]) > 1e-6);
        if (std::abs(p.poles[b] - std::conj(p.poles[a])) <= 1e-10 &&
            std::abs(p.weights[b] - std::conj(p.weights[a])) <= 1e-10) {
          partner = true;
        }
      }
      CHECK(partner);
    }
  }
}

TEST_CASE("kappa matches the pole/weight formula") {
  for (int s = 1; s <= kMaxPadeDegree; ++s) {
    const PadeData p = build_pade(s);
    double kappa = 0.0;
    for (std::size_t j = 0; j < p.poles.size(); ++j) kappa += std::abs(p.weights[j]) / std::pow(p.poles[j].real(), 2);
    CHECK(std::abs(p.kappa - kappa) <= 1e-10 * kappa);
    CHECK(std::abs(lipschitz_constant(p.poles, p.weights) - kappa) <= 1e-10 * kappa);
  }
}

TEST_CASE("eval_scalar examples") {
  for (int s = 1; s <= kMaxPadeDegree; ++s) CHECK(std::abs(eval_scalar(build_pade(s), 0.0) - 1.0) <= 1e-15);
  const Complex r = eval_scalar(build_pade(1), Complex(0.0, 2.0));
  CHECK(std::abs(r - Complex(0.0, 1.0)) <= 1e-15);
  CHECK(std::abs(std::abs(r) - 1.0) <= 1e-15);
  CHECK(std::abs(eval_scalar(build_pade(3), 0.1) - std::exp(0.1)) <= 1e-9);
}

TEST_CASE("eval_scalar signals pole hits") {
  const PadeData p = build_pade(1);
  CHECK_THROWS_AS(eval_scalar(p, Complex(2.0, 0.0)), PoleHit);
  CHECK_THROWS_AS(eval_scalar_pfd(p, Complex(2.0, 0.0)), PoleHit);
}

TEST_CASE("partial fractions agree with the quotient form") {
  CHECK(std::abs(eval_scalar_pfd(build_pade(2), 0.0) - 1.0) <= 1e-13);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-50.0, 50.0);
  for (int s = 1; s <= 3; ++s) {
    const PadeData p = build_pade(s);
    for (int i = 0; i < 50; ++i) {
      const Complex z(0.0, unif(rng));
      const Complex q = eval_scalar(p, z);
      CHECK(std::abs(eval_scalar_pfd(p, z) - q) <= 1e-10 * std::abs(q));
    }
  }
  const Complex z(0.0, 1e3);
  const Complex pfd = eval_scalar_pfd(build_pade(1), z);
  CHECK(std::abs(pfd - (-1.0 - 4.0 / (z - 2.0))) <= 1e-15);
  CHECK(std::abs(std::abs(pfd) - 1.0) <= 1e-12);
}

TEST_CASE("R_s has unit modulus on the imaginary axis") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(-1e3, 1e3);
  for (int s = 1; s <= kMaxPadeDegree; ++s) {
    const PadeData p = build_pade(s);
    for (int i = 0; i < 100; ++i) CHECK(std::abs(std::abs(eval_scalar(p, Complex(0.0, unif(rng)))) - 1.0) <= 1e-11);
  }
}

TEST_CASE("cayley_apply examples") {
  const QSpace eye(Matrix(Matrix::Identity(2, 2)));
  Vector y(2);
  y << 0.3, -1.7;
  CHECK((cayley_apply(eye, [](const Vector& v) { return Vector(Vector::Zero(v.size())); }, y) - y).norm() == 0.0);

  Matrix rot(2, 2);
  rot << 0.0, 0.8, -0.8, 0.0;
  const Vector c = cayley_apply(eye, [&rot](const Vector& v) { return Vector(rot * v); }, y);
  CHECK(std::abs(c.norm() - y.norm()) <= 1e-13);

  const PoissonModel body = rigid_body();
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    Vector v(3);
    for (Index i = 0; i < 3; ++i) v(i) = normal(rng);
    const Matrix a = 0.05 * rigid_body_structure(v) * Matrix(body.q());
    const Matrix eye3 = Matrix::Identity(3, 3);
    const Vector oracle = (eye3 - a).inverse() * (eye3 + a) * body.y0();
    const Vector got = cayley_apply(body.space(), [&a](const Vector& x) { return Vector(a * x); }, body.y0());
    CHECK((got - oracle).norm() <= 1e-12 * oracle.norm());
  }
}

TEST_CASE("cayley_apply refuses large operators") {
  const Index n = kDenseThreshold + 1;
  const QSpace eye(Matrix(Matrix::Identity(n, n)));
  CHECK_THROWS_AS(cayley_apply(eye, [](const Vector& v) { return v; }, Vector::Ones(n)), InvalidInput);
}

TEST_CASE("R_1(A) equals the Cayley transform of A/2") {
  std::mt19937_64 rng(14);
  const Matrix q = random_spd(rng, 6);
  const QSpace space(q);
  const Matrix a = random_algebra(rng, q, 0.1);
  const Vector y = Vector::LinSpaced(6, -1.0, 1.0);
  const Vector r1 = eval_dense(build_pade(1), a) * y;
  const Vector c = cayley_apply(space, [&a](const Vector& v) { return Vector(0.5 * a * v); }, y);
  CHECK((r1 - c).norm() <= 1e-12 * r1.norm());
}

TEST_CASE("R_s maps the Lie algebra into the quadratic group") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 11;
    const Matrix q = random_spd(rng, n);
    const Matrix a = random_algebra(rng, q, 0.2);
    for (int s = 1; s <= 3; ++s) {
      const Matrix b = eval_dense(build_pade(s), a);
      CHECK(max_abs(b.transpose() * q * b - q) <= 1e-10 * max_abs(q));
    }
  }
}

TEST_CASE("R_s is Lipschitz with constant kappa_s in the Q-norm") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + trial % 9;
    const Matrix q = random_spd(rng, n);
    const QSpace space(q);
    const Matrix a = random_algebra(rng, q, 0.3);
    const Matrix b = random_algebra(rng, q, 0.3);
    for (int s = 1; s <= 3; ++s) {
      const PadeData p = build_pade(s);
      const double lhs = space.op_norm(eval_dense(p, a) - eval_dense(p, b));
      CHECK(lhs <= p.kappa * space.op_norm(a - b) * (1.0 + 1e-8));
    }
  }
}

TEST_CASE("JSON export") {
  const auto j = to_json(build_pade(2));
  CHECK(j["degree"] == 2);
  CHECK(j["coefficients"].size() == 3);
  CHECK(j["poles"].size() == 2);
  CHECK(j["poles"][0].size() == 2);
  CHECK(j["kappa"].get<double>() == doctest::Approx(8.0 / 3.0));
}
