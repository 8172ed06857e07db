#pragma once

#include "greedynet/attention.hpp"
#include "greedynet/pursuit.hpp"

#include <optional>
#include <string>
#include <vector>

namespace greedynet {

/// Dual dictionaries of an unrolled greedy network. `analysis` drives atom
/// selection and the least-squares step, `synthesis` rebuilds the signal from
/// the same coefficients. With a DC atom, that column of both dictionaries is
/// a constant vector whose value is the matching dc scale.
struct LgmParams {
  Dictionary analysis;
  Dictionary synthesis;
  double dc_scale_analysis = 0.0;
  double dc_scale_synthesis = 0.0;

  LgmParams() = default;
  /// Throws ShapeMismatch when the two dictionaries differ in shape or DC slot.
  LgmParams(Dictionary analysis, Dictionary synthesis);

  /// D = D₂.
  static LgmParams tied(const Matrix& atoms);
  /// `base` with a constant DC column appended to both dictionaries.
  static LgmParams with_dc(const Matrix& base, double dc_scale = 2.5);

  Index signal_dim() const { return analysis.signal_dim(); }
  Index size() const { return analysis.size(); }
  std::optional<Index> dc_index() const { return analysis.dc_index(); }

  /// Replaces both atom matrices; DC columns are rebuilt from the scales.
  void assign(Matrix analysis_atoms, Matrix synthesis_atoms);
};

/// Atom choice per layer.
struct SelectionPolicy {
  bool random = false;
  double tau_factor = 0.8;
  std::uint64_t seed = 0;
};

/// Per-layer record of one forward pass.
struct UnrolledTrace {
  /// Atom chosen by each executed layer (MP-style nets may repeat).
  std::vector<Index> selected;
  /// x̂_k per layer. With attention this has exactly s entries; layers past an
  /// early numerical stop repeat the last reconstruction.
  std::vector<Vector> reconstructions;
  /// r_k = x − D_S·α_k on the analysis atoms, aligned with reconstructions.
  /// Equals x − x̂_k when D = D₂.
  std::vector<Vector> residuals;
  /// Gap between the winning and runner-up |u_i| per executed layer.
  std::vector<double> margins;
  /// Attention weights (empty without attention).
  Vector weights;
  /// Dense code: the final layer's coefficients, or the attention-weighted
  /// combination of every layer's coefficients.
  Vector code;
  Vector output;

  Index layers() const { return static_cast<Index>(selected.size()); }
  /// Nonzeros in `code`.
  Index cardinality() const;
};

/// Everything reverse mode needs from one forward pass. The parameters the
/// tape was recorded with must outlive it.
struct GradientTape {
  enum class Kind { None, Lgm, Lmp };
  Kind kind = Kind::None;
  const LgmParams* params = nullptr;
  const AttentionParams* attention = nullptr;
  Vector x;
  std::vector<Index> path;
  // LGM: selected analysis/synthesis columns, the support Cholesky factor
  // (its leading k×k block factors layer k's Gram matrix) and α_k per layer.
  Matrix sub_analysis;
  Matrix sub_synthesis;
  Matrix chol_lower;
  std::vector<Vector> coeffs;
  std::vector<Vector> reconstructions;
  Index unrolled = 0;
  AttentionCache attention_cache;
  // L-MP: dense α_0..α_K.
  std::vector<Vector> dense_codes;
  Vector output;
};

struct LgmGradients {
  Matrix analysis;
  Matrix synthesis;
  double dc_scale_analysis = 0.0;
  double dc_scale_synthesis = 0.0;
  std::optional<AttentionParams> attention;

  static LgmGradients zeros_like(const LgmParams& params, const AttentionParams* attention);
  LgmGradients& operator+=(const LgmGradients& other);
  LgmGradients& operator*=(double scale);
};

struct LgmOptions {
  /// When set, exactly s layers run and the output is Σ p_k x̂_k.
  const AttentionParams* attention = nullptr;
  SelectionPolicy policy;
};

/// Unrolled OMP. Each layer selects argmax |W_D·Dᵀr| over unselected atoms
/// (r_0 = x), solves α = (D_SᵀD_S)⁻¹D_Sᵀx on the analysis atoms, updates the
/// residual r_k = x − D_S α and emits x̂_k = D₂_S α. Without attention it
/// stops on ‖r_k‖ ≤ ε or k = s.
UnrolledTrace lgm_forward(const LgmParams& params, const Vector& x, const PursuitConfig& cfg,
                          const LgmOptions& opts = {}, GradientTape* tape = nullptr);

/// Recomputes the recorded pass with the recorded selection path. With the
/// parameters it was recorded with, the output matches bit for bit.
Vector lgm_replay(const GradientTape& tape);

/// Reverse pass for a fixed selection path. Throws TapeMissing on an empty or
/// non-LGM tape.
LgmGradients lgm_backward(const GradientTape& tape, const Vector& output_grad);
/// Same, accumulating into `grads` (only touched columns are written).
void lgm_backward_accumulate(const GradientTape& tape, const Vector& output_grad,
                             LgmGradients& grads);

/// Randomized LGM average: T random-selection passes (seed derive_seed(seed, i))
/// plus the greedy pass when include_map. Tapes, when requested, are resized
/// to one per pass; each pass contributes output/terms.
struct LgmMmseOptions {
  Index draws = 5;
  double tau_factor = 0.8;
  std::uint64_t seed = 0;
  bool include_map = true;
};
struct LgmMmseResult {
  Vector output;
  Vector code;
  Index terms = 0;
};
LgmMmseResult lgm_mmse(const LgmParams& params, const Vector& x, const PursuitConfig& cfg,
                       const LgmMmseOptions& opts, std::vector<GradientTape>* tapes = nullptr);

} // namespace greedynet
