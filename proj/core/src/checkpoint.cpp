#include "greedynet/checkpoint.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/matrix_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace greedynet {

using nlohmann::json;

const Matrix& Checkpoint::at(const std::string& name) const {
  for (const auto& [key, value] : tensors) {
    if (key == name) {
      return value;
    }
  }
  throw ValidationError("checkpoint has no tensor '" + name + "'");
}

const std::string& Checkpoint::meta_at(const std::string& key) const {
  const auto it = meta.find(key);
  if (it == meta.end()) {
    throw ValidationError("checkpoint has no metadata '" + key + "'");
  }
  return it->second;
}

void save_checkpoint(const std::filesystem::path& header, const Checkpoint& ckpt) {
  json doc;
  doc["format"] = "greedynet-checkpoint";
  doc["version"] = 1;
  doc["meta"] = ckpt.meta;
  doc["tensors"] = json::array();
  const std::string stem = header.stem().string();
  for (std::size_t k = 0; k < ckpt.tensors.size(); ++k) {
    const auto& [name, value] = ckpt.tensors[k];
    const std::string file = stem + ".t" + std::to_string(k) + ".json";
    save_matrix(header.parent_path() / file, value);
    doc["tensors"].push_back({{"name", name}, {"file", file}});
  }
  std::ofstream out(header);
  if (!out) {
    throw IoError("cannot write " + header.string());
  }
  out << doc.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& header) {
  std::ifstream in(header);
  if (!in) {
    throw IoError("cannot open " + header.string());
  }
  Checkpoint ckpt;
  try {
    const json doc = json::parse(in);
    if (doc.at("format") != "greedynet-checkpoint") {
      throw CorruptHeader(header.string() + ": not a checkpoint header");
    }
    ckpt.meta = doc.at("meta").get<std::map<std::string, std::string>>();
    for (const auto& t : doc.at("tensors")) {
      const auto file = t.at("file").get<std::string>();
      ckpt.add(t.at("name").get<std::string>(), load_matrix(header.parent_path() / file));
    }
  } catch (const json::exception& e) {
    throw CorruptHeader(header.string() + ": " + e.what());
  }
  return ckpt;
}

namespace {

void add_lgm(Checkpoint& ckpt, const LgmParams& p) {
  ckpt.add("analysis", p.analysis.atoms());
  ckpt.add("synthesis", p.synthesis.atoms());
  Matrix dc(2, 1);
  dc << p.dc_scale_analysis, p.dc_scale_synthesis;
  ckpt.add("dc_scales", dc);
  ckpt.meta["dc_index"] = p.dc_index() ? std::to_string(*p.dc_index()) : "none";
}

LgmParams read_lgm(const Checkpoint& ckpt) {
  const std::string& dc_text = ckpt.meta_at("dc_index");
  std::optional<Index> dc;
  if (dc_text != "none") {
    dc = std::stol(dc_text);
  }
  LgmParams p(Dictionary(ckpt.at("analysis"), dc), Dictionary(ckpt.at("synthesis"), dc));
  if (dc) {
    p.dc_scale_analysis = ckpt.at("dc_scales")(0, 0);
    p.dc_scale_synthesis = ckpt.at("dc_scales")(1, 0);
  }
  return p;
}

} // namespace

Checkpoint to_checkpoint(const Model& model) {
  Checkpoint ckpt;
  ckpt.meta["model"] = to_string(model.kind);
  if (model.kind == ModelKind::Lista) {
    ckpt.add("w", model.lista.w);
    ckpt.add("d1", model.lista.d1);
    ckpt.add("d2", model.lista.d2);
    ckpt.add("theta", model.lista.theta);
    ckpt.meta["layers"] = std::to_string(model.lista.layers);
  } else {
    add_lgm(ckpt, model.lgm);
  }
  return ckpt;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Model model;
  model.kind = parse_model_kind(ckpt.meta_at("model"));
  if (model.kind == ModelKind::Lista) {
    model.lista.w = ckpt.at("w");
    model.lista.d1 = ckpt.at("d1");
    model.lista.d2 = ckpt.at("d2");
    model.lista.theta = ckpt.at("theta").col(0);
    model.lista.layers = std::stol(ckpt.meta_at("layers"));
    model.lista.validate();
  } else {
    model.lgm = read_lgm(ckpt);
  }
  return model;
}

Checkpoint to_checkpoint(const DenoiserModel& model) {
  Checkpoint ckpt;
  ckpt.meta["model"] = "denoiser";
  ckpt.meta["patch"] = std::to_string(model.patch);
  ckpt.meta["layers"] = std::to_string(model.layers);
  add_lgm(ckpt, model.lgm);
  const auto names = AttentionParams::tensor_names();
  const auto tensors = model.attention.tensors();
  for (std::size_t k = 0; k < names.size(); ++k) {
    ckpt.add(names[k], *tensors[k]);
  }
  return ckpt;
}

DenoiserModel denoiser_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta_at("model") != "denoiser") {
    throw ValidationError("checkpoint does not hold a denoiser");
  }
  DenoiserModel model;
  model.patch = std::stol(ckpt.meta_at("patch"));
  model.layers = std::stol(ckpt.meta_at("layers"));
  model.lgm = read_lgm(ckpt);
  const auto names = AttentionParams::tensor_names();
  auto tensors = model.attention.tensors();
  for (std::size_t k = 0; k < names.size(); ++k) {
    *tensors[k] = ckpt.at(names[k]);
  }
  model.validate();
  return model;
}

} // namespace greedynet
