#pragma once

#include "hdi/types.hpp"

namespace hdi {

/// Lower-triangular Cholesky factor L with L L^T = S.
///
/// S must be symmetric within `sym_tol` element-wise and positive definite.
/// A non-positive pivot raises FactorizationError carrying the index of the
/// failing pivot.
Matrix cholesky_lower(const Matrix& S, double sym_tol = 1e-10);

}  // namespace hdi
