#pragma once

#include "cfisac/linalg.hpp"

namespace cfisac::localization {

struct HermitianEig {
  RVec values;   // ascending
  CMat vectors;  // column i pairs with values[i]
};

/// Cyclic Jacobi on the real symmetric embedding [[A, -B], [B, A]] of M = A + jB.
/// Throws std::invalid_argument for non-square or non-Hermitian input.
HermitianEig hermitian_eig(const CMat& m, double tol = 1e-12);

/// Real symmetric eigendecomposition by cyclic Jacobi, ascending order.
void jacobi_symmetric(RMat a, RVec& values, RMat& vectors, double tol = 1e-12);

}  // namespace cfisac::localization
