#pragma once

// Labeled corpus generation: valid values, rule-driven invalid values,
// dependency and version faults, and the shot-pool / eval-set split.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfgval/config_model.hpp"
#include "cfgval/constraints.hpp"
#include "cfgval/response.hpp"
#include "cfgval/rng.hpp"

namespace cfgval {

enum class Label { ValidConfig, Misconfig };

std::string_view to_string(Label l);
Label label_from_string(std::string_view s);

struct InjectedFault {
  std::string parameter;
  Subcategory subcategory = Subcategory::SyntaxDataType;
  std::string reason;

  Category category() const { return category_of(subcategory); }
  friend bool operator==(const InjectedFault&, const InjectedFault&) = default;
};

struct LabeledFile {
  std::string id;
  ConfigFile file;
  Label label = Label::ValidConfig;
  std::optional<InjectedFault> injected;
  /// Sub-category the file was generated for (also set on ValidConfig files).
  Subcategory origin = Subcategory::SyntaxDataType;

  friend bool operator==(const LabeledFile&, const LabeledFile&) = default;
};

/// The answer a perfect validator gives for this file.
ValidationResponse ground_truth_answer(const LabeledFile& f);

struct DatasetSplit {
  std::vector<LabeledFile> shot_pool;
  std::vector<LabeledFile> eval_set;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerationOptions {
  /// Parameters sampled per sub-category; with a full sample one becomes a
  /// shot and the rest evaluation files.
  std::size_t sample_per_subcategory = 5;
  /// Entries per generated file (sampled parameter plus valid companions).
  std::size_t entries_per_file = 8;
};

/// A value violating `sub`'s rule for `spec`. Throws GenerationError when
/// `sub` is not assigned to `spec` or is a dependency sub-category (those
/// are injected at file level). For the version sub-category the value is
/// an ordinary valid value: the fault lies in the file's version.
std::string generate_invalid_value(const ParameterSpec& spec, Subcategory sub, Rng& rng);

/// A value accepted by the spec. Throws GenerationError when none exists.
std::string generate_valid_value(const ParameterSpec& spec, Rng& rng);

/// Rewrites `file` so that `c` is violated and nothing else is. The
/// returned file names c's flagged parameter as the injected fault.
LabeledFile inject_dependency_misconfig(const DependencyConstraint& c, const ConfigFile& file,
                                        const SpecSet& specs, Rng& rng);

/// A file with exactly one fault of sub-category `sub` on `parameter`.
LabeledFile make_misconfig_file(const SpecSet& specs, const std::string& parameter, Subcategory sub,
                                Rng& rng, const GenerationOptions& options = {});

/// A fully valid file built around `parameter`, tagged with `sub`.
LabeledFile make_valid_file(const SpecSet& specs, const std::string& parameter, Subcategory sub,
                            Rng& rng, const GenerationOptions& options = {});

/// Parameters eligible for each sub-category, in spec order.
std::vector<std::string> eligible_parameters(const SpecSet& specs, Subcategory sub);

DatasetSplit build_dataset(const SpecSet& specs, Rng& rng, const GenerationOptions& options = {});

}  // namespace cfgval
