#pragma once

#include "greedynet/linalg.hpp"

#include <span>
#include <vector>

namespace greedynet {

struct CoherencePair {
  double value = 0.0;
  Index i = 0;
  Index j = 1;
};

/// max_{i≠j} |d_iᵀd_j| / (‖d_i‖‖d_j‖) with the attaining pair (first pair in
/// row-major order on ties). Throws ZeroAtom on a zero column and
/// ValidationError with fewer than two columns.
CoherencePair coherence_pair(const Matrix& dict);
double mutual_coherence(const Matrix& dict);
/// Subgradient of mutual_coherence through the attaining pair.
Matrix mutual_coherence_gradient(const Matrix& dict);

enum class LossKind { SumL2, LogSumL2 };

struct LossConfig {
  LossKind kind = LossKind::SumL2;
  double xi = 0.0;

  void validate() const;
};

struct LossResult {
  double value = 0.0;
  /// Σ‖x* − x̂‖² over the batch.
  double squared_error = 0.0;
  double coherence = 0.0;
  /// ∂L/∂outputs, same shape as outputs.
  Matrix output_grad;
  /// ∂L/∂D for each dictionary passed in.
  std::vector<Matrix> dict_grads;
};

/// sum-l2: Σ‖x* − x̂‖² + ξΣμ(D); log-sum-l2: log(Σ‖x* − x̂‖²) + ξΣμ(D).
/// Signals are columns. Throws EmptyBatch on zero columns.
LossResult loss(const Matrix& outputs, const Matrix& targets,
                std::span<const Matrix* const> dicts, const LossConfig& cfg);

} // namespace greedynet
