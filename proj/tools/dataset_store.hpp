#pragma once

#include "greedynet/synthetic.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace greedynet::cli {

/// On-disk synthetic dataset: a manifest.json plus one matrix file pair per
/// stored matrix. Clean signals and codes are shared by every noise level, so
/// only the noisy signals are stored per σ.
struct DatasetManifest {
  SyntheticSpec spec;
  std::string dictionary_kind;  // "dct" or "random"
  std::uint64_t dictionary_seed = 0;
};

void save_dataset(const std::filesystem::path& dir, const DatasetManifest& manifest,
                  const Matrix& d_true);

DatasetManifest load_manifest(const std::filesystem::path& dir);
Matrix load_true_dictionary(const std::filesystem::path& dir);

/// Train/test pair for the stored noise level equal to `sigma`. Throws
/// ValidationError when the dataset has no such level.
SplitDataset load_split(const std::filesystem::path& dir, double sigma);

} // namespace greedynet::cli
