#pragma once

#include <vector>

#include "pregma/rational.hpp"

namespace pregma {

using Matrix = std::vector<std::vector<Rational>>;

/// Solves A X = B exactly by Gaussian elimination with the first nonzero pivot.
/// A is n x n, B is n x m. Throws Error if A is singular.
Matrix solve_linear(Matrix a, Matrix b);

}  // namespace pregma
