#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>

namespace greedynet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Smallest admissible Cholesky pivot (before the square root). Anything at or
/// below this is treated as a linearly dependent column.
inline constexpr double kPivotTolerance = 1e-12;

/// Lower-triangular Cholesky factor L of a Gram matrix G = L·Lᵀ that can grow
/// one row/column at a time.
///
/// Storage is over-allocated so that repeated append() calls along an OMP
/// support path do not reallocate; only the leading order()×order() block is
/// meaningful.
class CholFactor {
public:
  CholFactor() = default;
  explicit CholFactor(Index capacity);

  Index order() const { return order_; }

  /// Copy of the leading order()×order() lower factor.
  Matrix lower() const;

  /// Extends the factor by one atom. gram_col holds the inner products of the
  /// new atom with the current ones, gram_diag its squared norm.
  /// Throws NotPositiveDefinite if the Schur-complement pivot is ≤ kPivotTolerance;
  /// the factor is left unchanged in that case.
  void append(const Eigen::Ref<const Vector>& gram_col, double gram_diag);

  /// Solves (L·Lᵀ) z = rhs.
  Vector solve(const Eigen::Ref<const Vector>& rhs) const;

  /// (L·Lᵀ)⁻¹, the explicit inverse of the factored Gram matrix.
  Matrix inverse() const;

  /// L·Lᵀ.
  Matrix reconstruct() const;

private:
  friend CholFactor cholesky(const Matrix& gram);

  void reserve(Index capacity);

  Matrix storage_;
  Index order_ = 0;
};

/// Full factorization of a symmetric positive-definite matrix.
/// Throws ShapeMismatch if G is not square or not symmetric within 1e-9 and
/// NotPositiveDefinite when a pivot falls to kPivotTolerance or below.
CholFactor cholesky(const Matrix& gram);

/// Functional form of CholFactor::append.
CholFactor cholesky_append(CholFactor factor, const Vector& gram_col, double gram_diag);

/// argmin_z ‖x − D_S z‖₂² via the Cholesky factor of D_Sᵀ D_S.
/// Rank deficiency surfaces as NotPositiveDefinite; no ridge term is added.
Vector ls_solve(const Matrix& sub_dict, const Vector& x);

/// Gradient of a loss with respect to A given its gradient with respect to A⁻¹:
/// −A⁻ᵀ · upstream · A⁻ᵀ.
Matrix inverse_gradient(const Matrix& a_inv, const Matrix& upstream);

/// Columns of `dict` listed in `indices`, in that order.
Matrix gather_columns(const Matrix& dict, std::span<const Index> indices);

/// Index of the largest |v_i| among entries with mask[i] == 0 (or all
/// entries when mask is empty). Ties go to the lowest index. Returns -1 when no
/// entry is eligible.
Index argmax_abs(const Eigen::Ref<const Vector>& v, std::span<const std::uint8_t> mask = {});

} // namespace greedynet
