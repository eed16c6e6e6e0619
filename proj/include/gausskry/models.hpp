#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gausskry/core.hpp"
#include "gausskry/trajectory.hpp"

namespace gausskry {

/**
 * Poisson system y' = J(y) Q y with skew-symmetric structure matrix J(y) and
 * quadratic Hamiltonian H(y) = 1/2 y^T Q y.
 *
 * Construction validates skew-symmetry of J on random probes and positive
 * definiteness of Q.
 */
class PoissonModel {
 public:
  using StructureFn = std::function<SparseMatrix(const Vector&)>;

  static PoissonModel linear(std::string label, SparseMatrix j, SparseMatrix q, Vector y0,
                             nlohmann::json parameters = nlohmann::json::object(), std::uint64_t seed = 0);
  static PoissonModel nonlinear(std::string label, Index n, StructureFn j, SparseMatrix q, Vector y0,
                                nlohmann::json parameters = nlohmann::json::object(), std::uint64_t seed = 0);

  Index dim() const { return space_.dim(); }
  const std::string& label() const { return label_; }
  const QSpace& space() const { return space_; }
  const SparseMatrix& q() const { return space_.matrix(); }
  const Vector& y0() const { return y0_; }
  bool is_linear() const { return constant_j_.has_value(); }

  /// J for a linear model; throws InvalidState for state-dependent models.
  const SparseMatrix& constant_structure() const;
  SparseMatrix structure(const Vector& y) const;
  /// J(y) Q y
  Vector rhs(const Vector& y) const;

  /// {"label", "n", "parameters"}
  nlohmann::json describe() const;

 private:
  PoissonModel(std::string label, QSpace space, Vector y0, nlohmann::json parameters)
      : label_(std::move(label)), space_(std::move(space)), y0_(std::move(y0)), parameters_(std::move(parameters)) {}
  void validate(std::uint64_t seed) const;

  std::string label_;
  QSpace space_;
  Vector y0_;
  nlohmann::json parameters_;
  std::optional<SparseMatrix> constant_j_;
  StructureFn j_fn_;
};

inline constexpr double kDefaultMass = 0.5;
inline constexpr double kDefaultSpring = 124.0;

/// Chain of N harmonic oscillators, state ordered (q_1, p_1, ..., q_N, p_N),
/// y0 = e_1.
/// The seed drives the randomized structure checks at construction.
PoissonModel mass_spring_chain(Index oscillators, double mass = kDefaultMass, double spring = kDefaultSpring,
                               std::uint64_t seed = 0);
PoissonModel mass_spring_chain(const std::vector<double>& masses, const std::vector<double>& springs,
                               std::uint64_t seed = 0);

/// Free rigid body (Euler equations) in body angular momentum, y0 = (3, 3, 2).
PoissonModel rigid_body(double i1 = 2.0, double i2 = 1.0, double i3 = 2.0 / 3.0, std::uint64_t seed = 0);

/// Cross-product matrix: J(y) x = y × x.
Matrix rigid_body_structure(const Vector& y);

/**
 * High-accuracy reference trajectory of a (nonlinear) model on the given grid
 * from an embedded Runge-Kutta-Fehlberg 7(8) pair with adaptive step control.
 * Throws ToleranceNotAchievable if the relative energy drift exceeds
 * max(1e-11, 1e3 * abs_tol).
 */
TrajectoryReport reference_nonlinear(const PoissonModel& model, const std::vector<double>& grid,
                                     double abs_tol = 1e-13);

/// MatrixMarket coordinate real general.
void write_matrix_market(std::ostream& out, const SparseMatrix& m);

}  // namespace gausskry
