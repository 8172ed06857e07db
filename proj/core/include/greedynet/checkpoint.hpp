#pragma once

#include "greedynet/denoiser.hpp"
#include "greedynet/train.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace greedynet {

/// Named tensors plus string metadata. On disk: a JSON header listing each
/// tensor and the matrix file (header + raw payload) that stores it. Values
/// round-trip bit for bit.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  void add(std::string name, Matrix value) { tensors.emplace_back(std::move(name), std::move(value)); }
  /// Throws ValidationError when absent.
  const Matrix& at(const std::string& name) const;
  const std::string& meta_at(const std::string& key) const;
};

void save_checkpoint(const std::filesystem::path& header, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& header);

Checkpoint to_checkpoint(const Model& model);
Model model_from_checkpoint(const Checkpoint& ckpt);

Checkpoint to_checkpoint(const DenoiserModel& model);
DenoiserModel denoiser_from_checkpoint(const Checkpoint& ckpt);

} // namespace greedynet
