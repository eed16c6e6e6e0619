#include "gausskry/models.hpp"

#include <ostream>
#include <random>

namespace gausskry {

namespace {

constexpr int kProbes = 5;
constexpr double kSkewTol = 1e-13;

SparseMatrix diagonal(const std::vector<double>& d) {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 0; i < d.size(); ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), d[i]);
  SparseMatrix m(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

PoissonModel PoissonModel::linear(std::string label, SparseMatrix j, SparseMatrix q, Vector y0,
                                  nlohmann::json parameters, std::uint64_t seed) {
  if (j.rows() != q.rows() || j.cols() != q.cols() || y0.size() != q.rows()) {
    throw DimensionMismatch("PoissonModel: J, Q and y0 dimensions disagree");
  }
  PoissonModel m(std::move(label), QSpace(std::move(q)), std::move(y0), std::move(parameters));
  j.makeCompressed();
  m.constant_j_ = std::move(j);
  m.validate(seed);
  return m;
}

PoissonModel PoissonModel::nonlinear(std::string label, Index n, StructureFn j, SparseMatrix q, Vector y0,
                                     nlohmann::json parameters, std::uint64_t seed) {
  if (q.rows() != n || y0.size() != n) throw DimensionMismatch("PoissonModel: Q and y0 dimensions disagree");
  if (!j) throw InvalidInput("PoissonModel: missing structure function");
  PoissonModel m(std::move(label), QSpace(std::move(q)), std::move(y0), std::move(parameters));
  m.j_fn_ = std::move(j);
  m.validate(seed);
  return m;
}

void PoissonModel::validate(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int probe = 0; probe < kProbes; ++probe) {
    Vector y(dim());
    for (Index i = 0; i < dim(); ++i) y(i) = normal(rng);
    const Matrix j = Matrix(structure(y));
    if (j.rows() != dim() || j.cols() != dim()) throw DimensionMismatch("PoissonModel: J has wrong shape");
    const double scale = std::max(max_abs(j), 1.0);
    if (max_abs(j + j.transpose()) > kSkewTol * scale) {
      throw InvalidInput("PoissonModel '" + label_ + "': structure matrix is not skew-symmetric");
    }
    if (is_linear()) break;
  }
}

const SparseMatrix& PoissonModel::constant_structure() const {
  if (!constant_j_) throw InvalidState("PoissonModel '" + label_ + "' has a state-dependent structure");
  return *constant_j_;
}

SparseMatrix PoissonModel::structure(const Vector& y) const {
  if (y.size() != dim()) throw DimensionMismatch("PoissonModel::structure");
  return constant_j_ ? *constant_j_ : j_fn_(y);
}

Vector PoissonModel::rhs(const Vector& y) const { return structure(y) * (q() * y); }

nlohmann::json PoissonModel::describe() const {
  return {{"label", label_}, {"n", dim()}, {"parameters", parameters_}};
}

PoissonModel mass_spring_chain(Index oscillators, double mass, double spring, std::uint64_t seed) {
  if (oscillators < 1) throw InvalidInput("mass_spring_chain: need at least one oscillator");
  const auto count = static_cast<std::size_t>(oscillators);
  return mass_spring_chain(std::vector<double>(count, mass), std::vector<double>(count, spring), seed);
}

PoissonModel mass_spring_chain(const std::vector<double>& masses, const std::vector<double>& springs,
                               std::uint64_t seed) {
  const auto n_osc = static_cast<Index>(masses.size());
  if (n_osc < 1 || springs.size() != masses.size()) {
    throw InvalidInput("mass_spring_chain: need N >= 1 masses and N spring constants");
  }
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] > 0.0) || !(springs[i] > 0.0)) {
      throw InvalidInput("mass_spring_chain: masses and spring constants must be positive");
    }
  }
  const Index n = 2 * n_osc;
  std::vector<Eigen::Triplet<double>> jt;
  std::vector<Eigen::Triplet<double>> qt;
  for (Index i = 0; i < n_osc; ++i) {
    const Index pos = 2 * i;
    const Index mom = pos + 1;
    const auto ui = static_cast<std::size_t>(i);
    jt.emplace_back(pos, mom, 1.0);
    jt.emplace_back(mom, pos, -1.0);
    // position block: sum_{i<N} k_i (e_i - e_{i+1})(e_i - e_{i+1})^T + k_N e_N e_N^T
    const double diag = (i == 0 ? 0.0 : springs[ui - 1]) + springs[ui];
    qt.emplace_back(pos, pos, diag);
    if (i + 1 < n_osc) {
      qt.emplace_back(pos, pos + 2, -springs[ui]);
      qt.emplace_back(pos + 2, pos, -springs[ui]);
    }
    qt.emplace_back(mom, mom, 1.0 / masses[ui]);
  }
  SparseMatrix j(n, n);
  SparseMatrix q(n, n);
  j.setFromTriplets(jt.begin(), jt.end());
  q.setFromTriplets(qt.begin(), qt.end());

  nlohmann::json params;
  params["oscillators"] = n_osc;
  params["masses"] = masses;
  params["springs"] = springs;
  return PoissonModel::linear("mass-spring", std::move(j), std::move(q), Vector::Unit(n, 0), params,
                              seed);
}

Matrix rigid_body_structure(const Vector& y) {
  if (y.size() != 3) throw DimensionMismatch("rigid_body_structure: state must have 3 components");
  Matrix j(3, 3);
  j << 0.0, -y(2), y(1),
       y(2), 0.0, -y(0),
       -y(1), y(0), 0.0;
  return j;
}

PoissonModel rigid_body(double i1, double i2, double i3, std::uint64_t seed) {
  if (!(i1 > 0.0) || !(i2 > 0.0) || !(i3 > 0.0)) {
    throw InvalidInput("rigid_body: moments of inertia must be positive");
  }
  Vector y0(3);
  y0 << 3.0, 3.0, 2.0;
  nlohmann::json params;
  params["inertia"] = {i1, i2, i3};
  return PoissonModel::nonlinear(
      "rigid-body", 3, [](const Vector& y) { return SparseMatrix(rigid_body_structure(y).sparseView()); },
      diagonal({1.0 / i1, 1.0 / i2, 1.0 / i3}), y0, params, seed);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  SparseMatrix c = m;
  c.makeCompressed();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << c.nonZeros() << '\n';
  out.precision(17);
  for (Index k = 0; k < c.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(c, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace gausskry
