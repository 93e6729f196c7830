#ifndef SMANAKOV_BLOCK_TRIDIAG_HPP
#define SMANAKOV_BLOCK_TRIDIAG_HPP

#include <cmath>
#include <string>
#include <vector>

#include "smanakov/errors.hpp"
#include "smanakov/field.hpp"
#include "smanakov/small_matrix.hpp"

namespace smanakov {

inline constexpr double singular_pivot_threshold = 1e-300;

/// Adjugate over determinant.
inline Block2 invert2(const Block2& b) {
  const cplx det = b.det();
  if (!(std::abs(det) >= singular_pivot_threshold)) {
    throw SingularPivot("2x2 block has |det| = " + std::to_string(std::abs(det)));
  }
  const cplx inv = 1.0 / det;
  return {b.d * inv, -b.b * inv, -b.c * inv, b.a * inv};
}

/// Square matrix with 2x2 blocks on three block diagonals.
/// Row j reads sub[j-1] X[j-1] + diag[j] X[j] + super[j] X[j+1].
struct BlockTridiagonalMatrix {
  std::vector<Block2> sub;
  std::vector<Block2> diag;
  std::vector<Block2> super;

  BlockTridiagonalMatrix() = default;
  explicit BlockTridiagonalMatrix(std::size_t m)
      : sub(m > 0 ? m - 1 : 0), diag(m), super(m > 0 ? m - 1 : 0) {}

  std::size_t size() const { return diag.size(); }

  void validate() const {
    const std::size_t m = diag.size();
    if (m == 0 || sub.size() != m - 1 || super.size() != m - 1) {
      throw DimensionMismatch("block tridiagonal dimensions are inconsistent");
    }
  }

  static BlockTridiagonalMatrix identity(std::size_t m) {
    BlockTridiagonalMatrix A(m);
    for (auto& d : A.diag) d = Block2::identity();
    return A;
  }
};

/// Y = A X; the implied neighbours beyond either end are zero.
inline FieldState matvec(const BlockTridiagonalMatrix& A, const FieldState& X) {
  A.validate();
  const std::size_t m = A.size();
  if (X.size() != m) throw DimensionMismatch("matvec: matrix and field sizes differ");
  FieldState Y(X);
  for (std::size_t j = 0; j < m; ++j) {
    Spinor y = A.diag[j] * X[j];
    if (j > 0) y += A.sub[j - 1] * X[j - 1];
    if (j + 1 < m) y += A.super[j] * X[j + 1];
    Y[j] = y;
  }
  return Y;
}

/// Block Thomas factorization without pivoting. Factor once, solve many right-hand sides.
/// Refactoring a matrix of the same size reuses the existing storage.
class BlockThomasFactorization {
public:
  BlockThomasFactorization() = default;
  explicit BlockThomasFactorization(const BlockTridiagonalMatrix& A) { factor(A); }

  void factor(const BlockTridiagonalMatrix& A) {
    A.validate();
    const std::size_t m = A.size();
    pivot_inv_.resize(m);
    multiplier_.resize(m > 0 ? m - 1 : 0);
    super_ = A.super;
    pivot_inv_[0] = invert2(A.diag[0]);
    for (std::size_t j = 1; j < m; ++j) {
      multiplier_[j - 1] = A.sub[j - 1] * pivot_inv_[j - 1];
      Block2 pivot = A.diag[j] - multiplier_[j - 1] * A.super[j - 1];
      pivot_inv_[j] = invert2(pivot);
    }
  }

  std::size_t size() const { return pivot_inv_.size(); }

  FieldState solve(const FieldState& B) const {
    FieldState X(B);
    solve_in_place(X);
    return X;
  }

  /// Overwrites X = B with A^{-1} B; no allocation.
  void solve_in_place(FieldState& X) const {
    const std::size_t m = size();
    if (X.size() != m) throw DimensionMismatch("solve: matrix and field sizes differ");
    for (std::size_t j = 1; j < m; ++j) X[j] -= multiplier_[j - 1] * X[j - 1];
    X[m - 1] = pivot_inv_[m - 1] * X[m - 1];
    for (std::size_t j = m - 1; j-- > 0;) {
      X[j] = pivot_inv_[j] * (X[j] - super_[j] * X[j + 1]);
    }
  }

private:
  std::vector<Block2> pivot_inv_;
  std::vector<Block2> multiplier_;
  std::vector<Block2> super_;
};

inline FieldState solve(const BlockTridiagonalMatrix& A, const FieldState& B) {
  return BlockThomasFactorization(A).solve(B);
}

} // namespace smanakov

#endif // SMANAKOV_BLOCK_TRIDIAG_HPP
