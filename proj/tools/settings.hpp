#pragma once

#include "greedynet/errors.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace greedynet::cli {

/// Keyed settings for one subcommand. Each key is both a `--key` flag and a
/// field of the optional JSON config file. Resolution order: built-in
/// default, then the config file, then flags given on the command line.
class Settings {
public:
  explicit Settings(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON config file; flags override its fields")
        ->check(CLI::ExistingFile);
  }

  template <class T>
  CLI::Option* add(const std::string& key, T fallback, const std::string& help) {
    // The holder is only read when the flag was given, so it starts empty;
    // CLI11 would otherwise append list flags to the default.
    auto holder = std::make_shared<T>();
    defaults_[key] = fallback;
    CLI::Option* opt = nullptr;
    if constexpr (std::is_same_v<T, bool>) {
      opt = app_->add_flag("--" + key, *holder, help);
    } else {
      opt = app_->add_option("--" + key, *holder, help);
      opt->default_str(nlohmann::json(fallback).dump());
    }
    if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
      opt->delimiter(',');
    }
    entries_.push_back({key, opt, [holder] { return nlohmann::json(*holder); }});
    return opt;
  }

  /// Merged configuration. Throws ValidationError on unreadable config files
  /// or keys this subcommand does not know.
  nlohmann::json resolve() const {
    nlohmann::json merged = defaults_;
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      nlohmann::json file;
      try {
        file = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config " + config_path_ + ": " + e.what());
      }
      if (!file.is_object()) {
        throw ValidationError("config " + config_path_ + ": expected a JSON object");
      }
      for (const auto& [key, value] : file.items()) {
        if (!merged.contains(key)) {
          throw ValidationError("config " + config_path_ + ": unknown key '" + key + "'");
        }
        merged[key] = value;
      }
    }
    for (const Entry& e : entries_) {
      if (e.option->count() > 0) {
        merged[e.key] = e.value();
      }
    }
    return merged;
  }

private:
  struct Entry {
    std::string key;
    CLI::Option* option;
    std::function<nlohmann::json()> value;
  };

  CLI::App* app_;
  std::string config_path_;
  nlohmann::json defaults_ = nlohmann::json::object();
  std::vector<Entry> entries_;
};

/// Typed read of a resolved setting; type mismatches become ValidationError.
template <class T>
T get(const nlohmann::json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("setting '" + key + "': " + e.what());
  }
}

/// Writes the resolved configuration (plus the subcommand name) as JSON.
inline void write_snapshot(const std::filesystem::path& path, const std::string& command,
                           nlohmann::json cfg) {
  cfg["command"] = command;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << cfg.dump(2) << '\n';
}

/// Snapshot location for a single output file: `<file>.config.json`.
inline std::filesystem::path snapshot_for(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".config.json";
  return p;
}

} // namespace greedynet::cli
