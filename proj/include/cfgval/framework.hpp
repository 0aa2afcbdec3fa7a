#pragma once

// The framework config document: backend choice and settings, pipeline
// knobs, and where to find parameter specs and the shot database.
// Schema: docs/config-format.md

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "cfgval/dataset.hpp"
#include "cfgval/llm_backend.hpp"
#include "cfgval/pipeline.hpp"
#include "json.hpp"

namespace cfgval {

enum class BackendKind { Http, Mock };

struct FrameworkConfig {
  BackendKind backend = BackendKind::Mock;
  BackendConfig backend_config;
  MockScript mock;
  PipelineConfig pipeline;
  /// Spec files, or directories whose *.json files are specs.
  std::vector<std::filesystem::path> spec_paths;
  /// Dataset directory whose shot pool supplies the shots.
  std::optional<std::filesystem::path> shot_db;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown keys are rejected. Relative paths resolve against `base_dir`.
FrameworkConfig framework_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json framework_config_to_json(const FrameworkConfig& c);
/// Throws ConfigError when the file is unreadable or invalid.
FrameworkConfig load_framework_config(const std::filesystem::path& path);

/// Loads every spec named by `paths` (files, or directories scanned for
/// *.json in name order).
std::vector<SpecSet> load_specs(const std::vector<std::filesystem::path>& paths);

/// `truth` feeds the mock's ground-truth behaviours and is ignored for HTTP.
std::unique_ptr<Backend> make_backend(const FrameworkConfig& c, TruthLookup truth = {});

}  // namespace cfgval
