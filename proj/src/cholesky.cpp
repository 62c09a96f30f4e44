#include "hdi/cholesky.hpp"

#include <cmath>
#include <string>

namespace hdi {

Matrix cholesky_lower(const Matrix& S, double sym_tol) {
  const Index p = S.rows();
  if (S.cols() != p || p < 1) {
    throw InputError("cholesky_lower: matrix must be square and non-empty");
  }
  require_finite(S, "cholesky_lower");
  double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > sym_tol) {
    throw InputError("cholesky_lower: matrix not symmetric (max deviation " +
                     std::to_string(asym) + ")");
  }

  Matrix L = Matrix::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    double d = S(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) {
      throw FactorizationError(
          "cholesky_lower: non-positive pivot at index " + std::to_string(j),
          j);
    }
    L(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < p; ++i) {
      L(i, j) = (S(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    }
  }
  return L;
}

}  // namespace hdi
