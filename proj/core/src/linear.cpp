#include "pregma/linear.hpp"

namespace pregma {

Matrix solve_linear(Matrix a, Matrix b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw Error("solve_linear: dimension mismatch");
  const std::size_t m = n ? b[0].size() : 0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw Error("solve_linear: singular system");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    const Rational inv = 1 / a[col][col];
    for (std::size_t k = col; k < n; ++k) a[col][k] *= inv;
    for (std::size_t k = 0; k < m; ++k) b[col][k] *= inv;
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const Rational f = a[row][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
      for (std::size_t k = 0; k < m; ++k) b[row][k] -= f * b[col][k];
    }
  }
  return b;
}

}  // namespace pregma
