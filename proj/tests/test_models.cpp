#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Geometry>

#include "gausskry/core.hpp"
#include "gausskry/models.hpp"
#include "gausskry/stepping.hpp"

using namespace gausskry;

namespace {

// Written out entry by entry from the displayed chain matrices, with no
// loops shared with the generator.
Matrix chain_q_oracle(Index n_osc, double m, double k) {
  Matrix q = Matrix::Zero(2 * n_osc, 2 * n_osc);
  if (n_osc == 1) {
    q(0, 0) = k;
    q(1, 1) = 1 / m;
  } else if (n_osc == 2) {
    q(0, 0) = k;     q(0, 2) = -k;
    q(2, 0) = -k;    q(2, 2) = k + k;
    q(1, 1) = 1 / m; q(3, 3) = 1 / m;
  } else if (n_osc == 3) {
    q(0, 0) = k;  q(0, 2) = -k;
    q(2, 0) = -k; q(2, 2) = k + k; q(2, 4) = -k;
    q(4, 2) = -k; q(4, 4) = k + k;
    q(1, 1) = 1 / m; q(3, 3) = 1 / m; q(5, 5) = 1 / m;
  } else if (n_osc == 4) {
    q(0, 0) = k;  q(0, 2) = -k;
    q(2, 0) = -k; q(2, 2) = k + k; q(2, 4) = -k;
    q(4, 2) = -k; q(4, 4) = k + k; q(4, 6) = -k;
    q(6, 4) = -k; q(6, 6) = k + k;
    q(1, 1) = 1 / m; q(3, 3) = 1 / m; q(5, 5) = 1 / m; q(7, 7) = 1 / m;
  }
  return q;
}

Matrix chain_j_oracle(Index n_osc) {
  Matrix j = Matrix::Zero(2 * n_osc, 2 * n_osc);
  for (Index i = 0; i < n_osc; ++i) {
    j(2 * i, 2 * i + 1) = 1.0;
    j(2 * i + 1, 2 * i) = -1.0;
  }
  return j;
}

Vector random_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("mass-spring chain matches the displayed pattern for N = 1..4") {
  for (Index n_osc = 1; n_osc <= 4; ++n_osc) {
    CAPTURE(n_osc);
    const PoissonModel chain = mass_spring_chain(n_osc);
    CHECK(chain.dim() == 2 * n_osc);
    CHECK(max_abs(Matrix(chain.q()) - chain_q_oracle(n_osc, 0.5, 124.0)) == 0.0);
    CHECK(max_abs(Matrix(chain.constant_structure()) - chain_j_oracle(n_osc)) == 0.0);
    CHECK(chain.y0() == Vector::Unit(2 * n_osc, 0));
  }
  const PoissonModel other = mass_spring_chain(3, 2.0, 5.0);
  CHECK(max_abs(Matrix(other.q()) - chain_q_oracle(3, 2.0, 5.0)) == 0.0);
}

TEST_CASE("default three-oscillator chain entries") {
  const Matrix q = Matrix(mass_spring_chain(3).q());
  CHECK(q(0, 0) == 124.0);
  CHECK(q(0, 2) == -124.0);
  CHECK(q(1, 1) == 2.0);
  CHECK(q(4, 4) == 248.0);
}

TEST_CASE("single oscillator degenerates to diag(k, 1/m)") {
  const PoissonModel one = mass_spring_chain(1, 0.25, 9.0);
  Matrix expected(2, 2);
  expected << 9.0, 0.0, 0.0, 4.0;
  CHECK(max_abs(Matrix(one.q()) - expected) == 0.0);
  // JQ is skew-adjoint in the Q-inner product: Q(JQ) is skew-symmetric.
  const Matrix qjq = Matrix(one.q()) * Matrix(one.constant_structure()) * Matrix(one.q());
  CHECK(max_abs(qjq + qjq.transpose()) == 0.0);
}

TEST_CASE("chain with individual masses and springs") {
  const PoissonModel chain = mass_spring_chain({1.0, 2.0, 4.0}, {3.0, 5.0, 7.0});
  const Matrix q = Matrix(chain.q());
  CHECK(q(0, 0) == 3.0);
  CHECK(q(2, 2) == 8.0);
  CHECK(q(4, 4) == 12.0);
  CHECK(q(0, 2) == -3.0);
  CHECK(q(2, 4) == -5.0);
  CHECK(q(5, 5) == 0.25);
}

TEST_CASE("chain parameters are validated") {
  CHECK_THROWS_AS(mass_spring_chain(0), InvalidInput);
  CHECK_THROWS_AS(mass_spring_chain(3, -1.0), InvalidInput);
  CHECK_THROWS_AS(mass_spring_chain(3, 0.5, 0.0), InvalidInput);
  CHECK_THROWS_AS(mass_spring_chain({1.0, 1.0}, {1.0}), InvalidInput);
  CHECK_THROWS_AS(mass_spring_chain(std::vector<double>{}, std::vector<double>{}), InvalidInput);
}

TEST_CASE("generated models have skew-adjoint generators for any size") {
  std::mt19937_64 rng(11);
  for (Index n_osc : {1, 2, 5, 17, 100}) {
    const PoissonModel chain = mass_spring_chain(n_osc);
    const SparseMatrix j = chain.constant_structure();
    CHECK(max_abs(Matrix(j) + Matrix(j).transpose()) == 0.0);
    const Vector x = random_vector(rng, chain.dim());
    const Vector y = random_vector(rng, chain.dim());
    const Vector jqx = j * (chain.q() * x);
    const Vector jqy = j * (chain.q() * y);
    const double lhs = q_inner(chain.space(), jqx, y);
    const double rhs = -q_inner(chain.space(), x, jqy);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + 1.0));
  }
}

TEST_CASE("rigid body structure and defaults") {
  const Matrix j3 = rigid_body_structure(Vector::Unit(3, 2));
  Matrix expected(3, 3);
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  CHECK(max_abs(j3 - expected) == 0.0);

  const PoissonModel body = rigid_body();
  CHECK_FALSE(body.is_linear());
  CHECK(body.dim() == 3);
  const Vector diag = Matrix(body.q()).diagonal();
  CHECK(diag(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(diag(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(diag(2) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(energy(body.space(), body.y0()) == doctest::Approx(9.75).epsilon(1e-14));
  CHECK_THROWS_AS(body.constant_structure(), InvalidState);

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector y = random_vector(rng, 3);
    CHECK((rigid_body_structure(y) * y).norm() <= 1e-14 * y.squaredNorm());
    const Vector x = random_vector(rng, 3);
    CHECK((rigid_body_structure(y) * x - Eigen::Vector3d(y).cross(Eigen::Vector3d(x))).norm() <= 1e-14);
    // Energy and Casimir are first integrals of the vector field.
    const Vector f = body.rhs(y);
    CHECK(std::abs(y.dot(body.q() * f)) <= 1e-12 * y.squaredNorm() * f.norm());
    CHECK(std::abs(y.dot(f)) <= 1e-12 * y.norm() * f.norm());
  }
}

TEST_CASE("rigid body parameters are validated") {
  CHECK_THROWS_AS(rigid_body(0.0), InvalidInput);
  CHECK_THROWS_AS(rigid_body(1.0, -1.0), InvalidInput);
  CHECK_THROWS_AS(rigid_body_structure(Vector::Zero(2)), DimensionMismatch);
}

TEST_CASE("non-skew structure matrices are rejected") {
  SparseMatrix j(2, 2);
  j.insert(0, 1) = 1.0;
  j.insert(1, 0) = 1.0;
  SparseMatrix q(2, 2);
  q.setIdentity();
  CHECK_THROWS_AS(PoissonModel::linear("bad", j, q, Vector::Unit(2, 0)), InvalidInput);
  CHECK_THROWS_AS(PoissonModel::linear("bad", j, q, Vector::Unit(3, 0)), DimensionMismatch);

  const auto sym = [](const Vector& y) {
    SparseMatrix m(2, 2);
    m.insert(0, 1) = y(0);
    m.insert(1, 0) = y(0);
    return m;
  };
  CHECK_THROWS_AS(PoissonModel::nonlinear("bad", 2, sym, q, Vector::Unit(2, 0)), InvalidInput);
}

TEST_CASE("describe and MatrixMarket export") {
  const PoissonModel chain = mass_spring_chain(2);
  const auto d = chain.describe();
  CHECK(d.at("label") == "mass-spring");
  CHECK(d.at("n") == 4);
  CHECK(d.at("parameters").at("oscillators") == 2);
  CHECK(rigid_body().describe().at("parameters").at("inertia").size() == 3);

  std::ostringstream out;
  write_matrix_market(out, chain.constant_structure());
  const std::string text = out.str();
  CHECK(text.rfind("%%MatrixMarket matrix coordinate real general\n4 4 4\n", 0) == 0);
  CHECK(text.find("1 2 1\n") != std::string::npos);
  CHECK(text.find("2 1 -1\n") != std::string::npos);
}

TEST_CASE("nonlinear reference starts at y0 and conserves energy") {
  const PoissonModel body = rigid_body();
  const std::vector<double> grid = uniform_grid(1.0, 0.1);
  const TrajectoryReport ref = reference_nonlinear(body, grid);
  REQUIRE(ref.states.size() == grid.size());
  CHECK(ref.states.front() == body.y0());
  CHECK(ref.max_energy_dev <= 1e-11);
  double casimir = 0.0;
  for (const Vector& y : ref.states) casimir = std::max(casimir, std::abs(y.norm() - body.y0().norm()));
  CHECK(casimir <= 1e-11);

  // Self-convergence of the oracle.
  const TrajectoryReport tighter = reference_nonlinear(body, grid, 5e-14);
  CHECK((ref.states.back() - tighter.states.back()).norm() <= 1e-11);

  CHECK_THROWS_AS(reference_nonlinear(body, {}), InvalidInput);
  CHECK_THROWS_AS(reference_nonlinear(body, grid, 0.0), InvalidInput);
}

TEST_CASE("nonlinear reference agrees with the exact flow for a linear model") {
  const PoissonModel chain = mass_spring_chain(2, 1.0, 1.0);
  const std::vector<double> grid = uniform_grid(1.0, 0.25);
  const TrajectoryReport rk = reference_nonlinear(chain, grid);
  const TrajectoryReport exact = reference_linear(chain, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK((rk.states[i] - exact.states[i]).norm() <= 1e-11);
}
