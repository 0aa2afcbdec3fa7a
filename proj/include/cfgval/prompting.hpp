#pragma once

// Few-shot prompt assembly: the shot database, shot selection, the
// directive question and token-budget enforcement.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfgval/dataset.hpp"
#include "cfgval/misconfig_gen.hpp"
#include "cfgval/response.hpp"
#include "cfgval/rng.hpp"
#include "cfgval/tokens.hpp"

namespace cfgval {

struct Shot {
  LabeledFile labeled;
  ValidationResponse answer;
  std::string source_project;
};

/// Builds a shot whose answer is the file's ground truth.
Shot make_shot(LabeledFile labeled);

class ShotDatabase {
 public:
  ShotDatabase() = default;
  explicit ShotDatabase(std::vector<Shot> shots);
  /// Every shot-pool record of the dataset.
  static ShotDatabase from_dataset(const Dataset& d);

  const std::vector<Shot>& shots() const { return shots_; }
  std::size_t size() const { return shots_.size(); }

 private:
  std::vector<Shot> shots_;
};

struct ShotCombination {
  std::size_t valid_count = 1;
  std::size_t misconfig_count = 3;

  std::size_t total() const { return valid_count + misconfig_count; }
  friend bool operator==(const ShotCombination&, const ShotCombination&) = default;
};

/// Every (valid, misconfig) split with valid + misconfig <= max_total,
/// ordered by total then by misconfig count.
std::vector<ShotCombination> shot_sweep(std::size_t max_total = 5);

enum class SelectionStrategy { Random, SameSubcategory, CosineSimilarity };

std::string_view to_string(SelectionStrategy s);
SelectionStrategy strategy_from_string(std::string_view s);

/// What is known about the file being validated. SameSubcategory needs
/// `subcategory`; CosineSimilarity needs `file`.
struct SelectionTarget {
  const ConfigFile* file = nullptr;
  std::optional<Subcategory> subcategory;
};

class InsufficientShots : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Picks combo.valid_count ValidConfig and combo.misconfig_count Misconfig
/// shots. Shots of `project` come first; other projects fill any shortfall.
/// Returned in selection order, valid shots first.
std::vector<Shot> select_shots(const ShotDatabase& db, std::string_view project, ShotCombination combo,
                               SelectionStrategy strategy, Rng& rng, const SelectionTarget& target = {});

/// Question with [PROJECT] and [VERSION] placeholders, followed by the
/// response format exemplar.
const std::string& default_question_template();

std::string render_question(std::string_view question_template, std::string_view project,
                            std::string_view version);

class Prompt {
 public:
  Prompt(std::vector<Shot> shots, ConfigFile target, std::string question_template,
         const TokenEstimator& estimator = estimate_tokens);

  const std::vector<Shot>& shots() const { return shots_; }
  const ConfigFile& target() const { return target_; }
  const std::string& question_template() const { return question_template_; }
  const std::string& project() const { return target_.project(); }
  const std::string& version() const { return target_.version(); }
  const std::string& text() const { return text_; }
  std::size_t token_estimate() const { return token_estimate_; }

 private:
  std::vector<Shot> shots_;
  ConfigFile target_;
  std::string question_template_;
  std::string text_;
  std::size_t token_estimate_ = 0;
};

/// Orders the shots (ValidConfig first, then Misconfig, each group keeping
/// its order) and renders the prompt. Throws std::invalid_argument when the
/// target lacks a project or version.
Prompt build_prompt(const ConfigFile& target, std::vector<Shot> shots,
                    const std::string& question_template = default_question_template(),
                    const TokenEstimator& estimator = estimate_tokens);

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Drops shots until the prompt fits: ValidConfig shots from the end first,
/// then Misconfig shots from the end. When even the bare target does not
/// fit, the target is compressed and shots are re-fitted around it. Throws
/// BudgetExceeded if the compressed target and question alone are over.
Prompt fit_to_budget(const Prompt& prompt, std::size_t limit,
                     const TokenEstimator& estimator = estimate_tokens);

/// Consecutive snippets of at most `max_entries` entries each, for files
/// too large to validate in one prompt.
std::vector<ConfigFile> split_config(const ConfigFile& file, std::size_t max_entries);

}  // namespace cfgval
