#pragma once

#include "greedynet/linalg.hpp"

#include <cstdint>
#include <vector>

namespace greedynet {

/// Overcomplete cosine dictionary: column j samples cos(π·j·(i + 0.5)/m) over
/// rows i; columns j > 0 are mean-removed; every column has unit norm.
Matrix make_dct_dictionary(Index n, Index m);

/// Gaussian random dictionary with unit-norm columns.
Matrix random_dictionary(Index n, Index m, std::uint64_t seed);

struct SyntheticSpec {
  Index n = 100;
  Index m = 400;
  std::vector<Index> cardinalities{10};
  Index train_per_cardinality = 10000;
  Index test_per_cardinality = 2000;
  std::vector<double> sigmas{0.04, 0.06, 0.08, 0.1, 0.12, 0.14};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Signals as columns. Clean signals satisfy clean = D·codes exactly up to
/// rounding and ‖clean_j‖∞ = 1.
struct LabeledDataset {
  Matrix clean;
  Matrix noisy;
  Matrix codes;
  std::vector<std::vector<Index>> supports;
  double sigma = 0.0;

  Index size() const { return clean.cols(); }
  Index cardinality(Index j) const {
    return static_cast<Index>(supports[static_cast<std::size_t>(j)].size());
  }
  /// Columns listed in `indices`, in that order.
  LabeledDataset subset(const std::vector<Index>& indices) const;
};

/// `per_cardinality` signals for each cardinality, supports uniform without
/// replacement, magnitudes uniform on (0, 1], random signs, then ∞-norm
/// normalization. Noise is N(0, σ²) from an independent stream.
LabeledDataset gen_dataset(const Matrix& d_true, const std::vector<Index>& cardinalities,
                           Index per_cardinality, double sigma, std::uint64_t seed);

/// Train/test pair for one noise level of `spec`. Clean signals depend only on
/// the spec seed, so every σ shares them.
struct SplitDataset {
  LabeledDataset train;
  LabeledDataset test;
};
SplitDataset gen_split(const SyntheticSpec& spec, const Matrix& d_true, double sigma);

/// Mean over true atoms of 1 − max_j |⟨d̃_j, d_i⟩| with both dictionaries
/// column-normalized. Lies in [0, 1].
double dictionary_distance(const Matrix& d_true, const Matrix& d_approx);

} // namespace greedynet
