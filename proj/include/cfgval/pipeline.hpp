#pragma once

// From raw completions to a verdict: parse, reject inconsistent answers,
// re-ask bounded times, vote, and pick one explanation per parameter.

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfgval/llm_backend.hpp"
#include "cfgval/prompting.hpp"
#include "cfgval/response.hpp"

namespace cfgval {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Extracts exactly one top-level JSON object (from inside a code fence
/// when the text has one holding an object) and maps hasError,
/// errParameter and reason. Extra fields are ignored. Throws FormatError.
ValidationResponse parse_response(std::string_view text);

/// R1: no error => both arrays empty. R2: error => both arrays non-empty.
/// R3: error => arrays of equal length. R4: no repeated parameter names.
enum class FilterRule { R1 = 1, R2 = 2, R3 = 3, R4 = 4 };

std::string_view to_string(FilterRule r);

/// nullopt accepts; otherwise the first rule (in R1..R4 order) broken.
std::optional<FilterRule> validate_response(const ValidationResponse& r);

struct CanonicalKey {
  bool has_error = false;
  /// Sorted, without duplicates.
  std::vector<std::string> parameters;

  friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

CanonicalKey canonical_key(const ValidationResponse& r);

struct AuditEntry {
  std::size_t slot = 0;
  std::size_t attempt = 0;
  /// "accepted", "format-error", "rejected-R<n>" or "backend-error".
  std::string outcome;
  std::string detail;
  std::string raw;
};

struct Verdict {
  std::uint64_t target_fingerprint = 0;
  /// Caller-chosen label for reports (a path or dataset id).
  std::string target;
  CanonicalKey key;
  std::vector<std::string> reasons;
  std::size_t tally = 0;
  std::size_t total_votes = 0;
  std::size_t discarded_count = 0;
  std::vector<ValidationResponse> responses;
  std::vector<AuditEntry> audit;

  bool has_error() const { return key.has_error; }
  const std::vector<std::string>& err_parameters() const { return key.parameters; }
};

/// Most frequent canonical key wins (reasons play no part). Ties go to the
/// key with fewer parameters, then to the lexicographically smallest
/// parameter list. Reasons are filled in by select_reasons. Throws
/// std::invalid_argument on an empty list.
Verdict vote(const std::vector<ValidationResponse>& responses);

/// One reason per flagged parameter, in the verdict's parameter order,
/// chosen by select_representative from the reasons that winning
/// responses gave for it.
std::vector<std::string> select_reasons(const std::vector<ValidationResponse>& responses, const Verdict& verdict);

/// TF-IDF vectors over the given strings, single-linkage clusters at
/// cosine >= 0.4; the largest cluster wins (ties: larger medoid similarity
/// sum, then the smaller medoid string) and its medoid is returned (ties:
/// the smaller string). The result does not depend on input order.
std::string select_representative(const std::vector<std::string>& reasons);

inline constexpr double kReasonClusterThreshold = 0.4;

nlohmann::json verdict_json(const Verdict& v);

struct PipelineConfig {
  std::size_t num_queries = 10;
  /// Re-asks per slot after an unusable answer.
  std::size_t retries = 3;
  ShotCombination shots{1, 3};
  SelectionStrategy strategy = SelectionStrategy::Random;
  std::string question_template = default_question_template();
  std::uint64_t seed = 0;

  void validate() const;
};

class ValidationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optional facts about the target, used by shot selection and reports.
struct TargetInfo {
  std::string label;
  std::optional<Subcategory> subcategory;
};

/// select_shots -> build_prompt -> fit_to_budget -> num_queries slots, each
/// re-asked up to `retries` times until its answer parses and passes the
/// filter -> vote -> select_reasons. Shot selection is seeded from
/// config.seed and the target's fingerprint. Throws BudgetExceeded,
/// InsufficientShots, BackendError (authentication or precondition
/// failures) or ValidationFailed when no slot produced a usable answer.
Verdict validate_file(const ConfigFile& target, Backend& backend, const ShotDatabase& shots,
                      const PipelineConfig& config, const TargetInfo& info = {});

/// Validates the snippet of changed entries.
Verdict validate_diff(const ConfigDiff& diff, Backend& backend, const ShotDatabase& shots,
                      const PipelineConfig& config, const TargetInfo& info = {});

}  // namespace cfgval
