#include "dataset_store.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/matrix_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace greedynet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";

std::string noisy_name(const char* part, std::size_t level) {
  return std::string(part) + "_noisy_" + std::to_string(level) + ".json";
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw CorruptHeader(path.string() + ": " + e.what());
  }
}

LabeledDataset assemble(const fs::path& dir, const char* part, std::size_t level, double sigma) {
  LabeledDataset data;
  data.clean = load_matrix(dir / (std::string(part) + "_clean.json"));
  data.codes = load_matrix(dir / (std::string(part) + "_codes.json"));
  data.noisy = load_matrix(dir / noisy_name(part, level));
  data.sigma = sigma;
  if (data.clean.cols() != data.codes.cols() || data.clean.cols() != data.noisy.cols() ||
      data.clean.rows() != data.noisy.rows()) {
    throw CorruptHeader(dir.string() + ": inconsistent " + part + " matrices");
  }
  data.supports.resize(static_cast<std::size_t>(data.codes.cols()));
  for (Index j = 0; j < data.codes.cols(); ++j) {
    for (Index i = 0; i < data.codes.rows(); ++i) {
      if (data.codes(i, j) != 0.0) {
        data.supports[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  return data;
}

} // namespace

void save_dataset(const fs::path& dir, const DatasetManifest& manifest, const Matrix& d_true) {
  manifest.spec.validate();
  fs::create_directories(dir);
  save_matrix(dir / "D_true.json", d_true);

  const auto& spec = manifest.spec;
  for (std::size_t level = 0; level < spec.sigmas.size(); ++level) {
    const SplitDataset split = gen_split(spec, d_true, spec.sigmas[level]);
    if (level == 0) {
      save_matrix(dir / "train_clean.json", split.train.clean);
      save_matrix(dir / "train_codes.json", split.train.codes);
      save_matrix(dir / "test_clean.json", split.test.clean);
      save_matrix(dir / "test_codes.json", split.test.codes);
    }
    save_matrix(dir / noisy_name("train", level), split.train.noisy);
    save_matrix(dir / noisy_name("test", level), split.test.noisy);
  }

  const json j = {
      {"n", spec.n},
      {"m", spec.m},
      {"cardinalities", spec.cardinalities},
      {"train_per_cardinality", spec.train_per_cardinality},
      {"test_per_cardinality", spec.test_per_cardinality},
      {"sigmas", spec.sigmas},
      {"seed", spec.seed},
      {"dictionary", {{"kind", manifest.dictionary_kind}, {"seed", manifest.dictionary_seed},
                      {"file", "D_true.json"}}},
  };
  std::ofstream out(dir / kManifest);
  if (!out) {
    throw IoError("cannot write " + (dir / kManifest).string());
  }
  out << j.dump(2) << '\n';
}

DatasetManifest load_manifest(const fs::path& dir) {
  const json j = read_json(dir / kManifest);
  DatasetManifest m;
  try {
    m.spec.n = j.at("n").get<Index>();
    m.spec.m = j.at("m").get<Index>();
    m.spec.cardinalities = j.at("cardinalities").get<std::vector<Index>>();
    m.spec.train_per_cardinality = j.at("train_per_cardinality").get<Index>();
    m.spec.test_per_cardinality = j.at("test_per_cardinality").get<Index>();
    m.spec.sigmas = j.at("sigmas").get<std::vector<double>>();
    m.spec.seed = j.at("seed").get<std::uint64_t>();
    m.dictionary_kind = j.at("dictionary").at("kind").get<std::string>();
    m.dictionary_seed = j.at("dictionary").at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw CorruptHeader((dir / kManifest).string() + ": " + e.what());
  }
  return m;
}

Matrix load_true_dictionary(const fs::path& dir) { return load_matrix(dir / "D_true.json"); }

SplitDataset load_split(const fs::path& dir, double sigma) {
  const DatasetManifest m = load_manifest(dir);
  for (std::size_t level = 0; level < m.spec.sigmas.size(); ++level) {
    if (std::abs(m.spec.sigmas[level] - sigma) <= 1e-12) {
      return {assemble(dir, "train", level, m.spec.sigmas[level]),
              assemble(dir, "test", level, m.spec.sigmas[level])};
    }
  }
  std::string available;
  for (double s : m.spec.sigmas) {
    available += (available.empty() ? "" : ", ") + std::to_string(s);
  }
  throw ValidationError("dataset " + dir.string() + " has no sigma " + std::to_string(sigma) +
                        " (available: " + available + ")");
}

} // namespace greedynet::cli
