#pragma once

#include "greedynet/linalg.hpp"

#include <optional>
#include <vector>

namespace greedynet {

/// Dense n×m atom matrix with cached atom norms.
///
/// Correlations are weighted by W_D = diag(1/‖d_i‖) so that unnormalized
/// (learned) atoms compete fairly. An optional DC atom is exempt: its weight
/// is exactly 1.
class Dictionary {
public:
  Dictionary() = default;

  /// Throws ZeroAtom if any column has zero norm, ValidationError on
  /// non-finite entries or an out-of-range dc_index.
  explicit Dictionary(Matrix atoms, std::optional<Index> dc_index = std::nullopt);

  const Matrix& atoms() const { return atoms_; }
  Index signal_dim() const { return atoms_.rows(); }
  Index size() const { return atoms_.cols(); }

  const Vector& atom_norms() const { return norms_; }
  /// Diagonal of W_D.
  const Vector& weights() const { return weights_; }
  std::optional<Index> dc_index() const { return dc_index_; }

  auto atom(Index i) const { return atoms_.col(i); }

  /// W_D ⊙ (Dᵀ r).
  Vector weighted_correlations(const Eigen::Ref<const Vector>& r) const;

private:
  Matrix atoms_;
  Vector norms_;
  Vector weights_;
  std::optional<Index> dc_index_;
};

/// Sparse representation over an ambient space of `ambient_dim` atoms.
/// `support` is kept in selection order and `coeffs` is aligned with it.
struct SparseCode {
  Index ambient_dim = 0;
  std::vector<Index> support;
  std::vector<double> coeffs;

  Index cardinality() const { return static_cast<Index>(support.size()); }
  Vector to_dense() const;
};

} // namespace greedynet
