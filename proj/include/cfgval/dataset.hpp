#pragma once

// Multi-project corpora on disk: `<root>/<project>/<split>/<slug>/<id>.xml`
// plus `<root>/manifest.json` carrying labels and ground truth.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfgval/misconfig_gen.hpp"
#include "json.hpp"

namespace cfgval {

enum class Split { ShotPool, EvalSet };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

struct DatasetRecord {
  std::string project;
  Split split = Split::EvalSet;
  LabeledFile labeled;
  /// Relative to the dataset root, '/'-separated.
  std::string path;
};

struct Dataset {
  std::uint64_t seed = 0;
  std::vector<std::string> projects;
  std::vector<DatasetRecord> records;

  std::vector<const DatasetRecord*> select(Split split) const;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs build_dataset for every project, each on its own stream forked from
/// `seed` by project name, so adding a project leaves the others unchanged.
Dataset generate_corpus(const std::vector<SpecSet>& specs, std::uint64_t seed,
                        const GenerationOptions& options = {});

nlohmann::json manifest_json(const Dataset& d);

/// Writes the file tree and manifest. Existing files are overwritten.
void write_dataset(const Dataset& d, const std::filesystem::path& root);

/// Reads the manifest and every file it lists; throws DatasetError when a
/// file is missing or its entries disagree with the manifest.
Dataset load_dataset(const std::filesystem::path& root);

}  // namespace cfgval
