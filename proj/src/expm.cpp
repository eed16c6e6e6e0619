#include <cmath>

#include "gausskry/core.hpp"

namespace gausskry {

namespace {

constexpr double kTheta13 = 5.371920351148152;
constexpr double kB13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                           1187353796428800.0,  129060195264000.0,   10559470521600.0,
                           670442572800.0,      33522128640.0,       1323241920.0,
                           40840800.0,          960960.0,            16380.0,
                           182.0,               1.0};

}  // namespace

Matrix small_skew_expm(const Matrix& h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("small_skew_expm: matrix must be square");
  const Index k = h.rows();
  const double scale = max_abs(h);
  if (max_abs(h + h.transpose()) > 1e-13 * scale) {
    throw InvalidInput("small_skew_expm: matrix is not skew-symmetric");
  }
  const Matrix eye = Matrix::Identity(k, k);
  if (scale == 0.0) return eye;

  const double norm1 = h.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const Matrix a = h / std::ldexp(1.0, squarings);

  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const auto& b = kB13;
  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                         b[3] * a2 + b[1] * eye;
  const Matrix u = a * u_inner;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                   b[2] * a2 + b[0] * eye;

  Matrix r = dense_solve(v - u, v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace gausskry
