#pragma once

#include "greedynet/dictionary.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace greedynet {

enum class StopMode {
  /// Stop once ‖r‖₂ ≤ ε or the support reaches s atoms.
  ThresholdOrMax,
  /// Ignore ε and run until s atoms (or a numerically zero residual).
  ExactCardinality,
};

struct PursuitConfig {
  Index max_cardinality = 1;
  double residual_threshold = 0.0;
  StopMode stop_mode = StopMode::ThresholdOrMax;

  /// Throws ValidationError unless 1 ≤ s ≤ m (or 0 ≤ s when allow_zero) and ε ≥ 0.
  void validate(Index atom_count, bool allow_zero = false) const;
  bool should_stop(Index iteration, double residual_norm) const;
};

/// Engines stop early when every correlation magnitude falls to this fraction
/// of the largest initial correlation; the residual is then numerically
/// orthogonal to the whole dictionary and no atom can make progress.
inline constexpr double kCorrelationFloor = 1e-10;

struct PursuitResult {
  SparseCode code;
  Vector reconstruction;
  /// ‖r_k‖₂ for k = 0..iterations; entry 0 is ‖x‖₂.
  std::vector<double> residual_norms;
  Index iterations = 0;
  /// Atoms chosen in each iteration (one for OMP/MP, a group for GCMP, the
  /// pruned support for SP).
  std::vector<std::vector<Index>> selections;
  /// Set when SP stopped at its iteration cap instead of converging.
  bool iteration_cap_hit = false;
};

struct RandConfig {
  double tau_factor = 0.8;
  Index draws = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Orthogonal matching pursuit with W_D-weighted correlations. Already
/// selected atoms are masked from later scans. A selection that would make the
/// support rank deficient is masked and replaced by the next-best atom once;
/// a second failure throws RankDeficientSupport.
PursuitResult omp(const Dictionary& dict, const Vector& x, const PursuitConfig& cfg);

/// Matching pursuit: α_k = α_{k−1} + W_D·MPT(W_D·Dᵀr_{k−1}). Atoms may be
/// chosen more than once; repeated picks accumulate into one support entry.
PursuitResult mp(const Dictionary& dict, const Vector& x, const PursuitConfig& cfg);

struct SpOptions {
  /// Safety cap on refinement iterations.
  Index max_iterations = 50;
};

/// Subspace pursuit with exactly s atoms. Refinement stops when the residual
/// grows (returning the previous iterate), when the support stops changing, or
/// at the iteration cap (flagged in the result).
PursuitResult sp(const Dictionary& dict, const Vector& x, Index s, const SpOptions& opts = {});

/// OMP over the columns of X sharing DᵀD and DᵀX, with a progressive Cholesky
/// factorization of the support Gram matrix. Matches omp() column by column.
std::vector<PursuitResult> batch_omp(const Dictionary& dict, const Matrix& signals,
                                     const PursuitConfig& cfg, unsigned threads = 1);

/// Random-selection OMP: correlations below tau_factor·‖u‖∞ are discarded and
/// the atom is drawn with probability ∝ |u_i| among the survivors, using an
/// engine seeded with rand.seed. rand.draws is ignored here.
PursuitResult rand_omp(const Dictionary& dict, const Vector& x, const PursuitConfig& cfg,
                       const RandConfig& rand);

struct MmseOptions {
  /// Add the deterministic OMP run to the average (T+1 terms).
  bool include_map = true;
  /// Dictionary used for the reconstruction; `dict` when null.
  const Dictionary* synthesis = nullptr;
};

struct MmseEstimate {
  /// Average of the dense representation vectors.
  Vector code;
  Vector reconstruction;
};

/// Averages rand.draws Random-OMP runs; run i is seeded with
/// derive_seed(rand.seed, i).
MmseEstimate mmse_estimate(const Dictionary& dict, const Vector& x, const PursuitConfig& cfg,
                           const RandConfig& rand, const MmseOptions& opts = {});

/// Orthogonal projection of x onto span{d_i : i ∈ support}.
/// Throws RankDeficientSupport when those atoms are linearly dependent.
Vector oracle_estimate(const Dictionary& dict, const std::vector<Index>& support, const Vector& x);

} // namespace greedynet
