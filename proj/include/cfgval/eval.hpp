#pragma once

// Scoring verdicts against ground truth: file- and parameter-level
// confusion matrices, precision/recall/F1, macro averages across projects,
// pooled F1 per sub-category and F1 by file size.

#include <map>
#include <string>
#include <vector>

#include "cfgval/dataset.hpp"
#include "cfgval/pipeline.hpp"
#include "json.hpp"

namespace cfgval {

enum class Cell { TP, FP, TN, FN };

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  void add(Cell c);
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Zero denominators give 0.
double precision(const ConfusionMatrix& m);
double recall(const ConfusionMatrix& m);
double f1(const ConfusionMatrix& m);

struct FileScore {
  Cell file = Cell::TN;
  ConfusionMatrix parameters;
};

/// File level: label vs hasError. Parameter level: every entry of the file
/// plus every flagged name missing from it (those count as FP). Throws
/// std::invalid_argument when the verdict is for a different file.
FileScore score_file(const Verdict& verdict, const LabeledFile& truth);

struct EvalRecord {
  std::string project;
  std::string id;
  Label label = Label::ValidConfig;
  Subcategory subcategory = Subcategory::SyntaxDataType;
  std::size_t entry_count = 0;
  FileScore score;
};

struct LevelMetrics {
  double precision = 0, recall = 0, f1 = 0;
};

LevelMetrics metrics_of(const ConfusionMatrix& m);

struct ProjectMetrics {
  ConfusionMatrix file, parameter;
  LevelMetrics file_metrics, parameter_metrics;
};

struct BucketMetrics {
  /// Inclusive entry-count bounds; `hi` is SIZE_MAX for the last bucket.
  std::size_t lo = 0, hi = 0;
  std::size_t files = 0;
  ConfusionMatrix file, parameter;
  LevelMetrics file_metrics, parameter_metrics;
};

struct MetricsReport {
  std::map<std::string, ProjectMetrics> projects;
  LevelMetrics macro_file, macro_parameter;
  std::map<Subcategory, double> subcategory_f1;
  std::vector<BucketMetrics> buckets;
  std::size_t files = 0;
};

/// Unweighted mean; throws std::invalid_argument on an empty list.
double macro_average(const std::vector<double>& values);

/// Parameter-level F1 per injected sub-category, pooling Misconfig files of
/// all projects. Sub-categories without files are absent.
std::map<Subcategory, double> micro_f1_by_subcategory(const std::vector<EvalRecord>& records);

inline const std::vector<std::size_t> kDefaultBucketEdges{4, 8, 16, 32};

/// Buckets (0, e1], (e1, e2], ..., (e_last, inf); empty buckets omitted.
std::vector<BucketMetrics> bucket_by_param_count(const std::vector<EvalRecord>& records,
                                                 const std::vector<std::size_t>& edges = kDefaultBucketEdges);

MetricsReport build_report(const std::vector<EvalRecord>& records,
                           const std::vector<std::size_t>& edges = kDefaultBucketEdges);

nlohmann::json report_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

/// CSV for one table: "projects", "subcategories" or "buckets".
std::string report_csv(const MetricsReport& r, std::string_view table);

/// Answers from the dataset manifest, keyed by file fingerprint.
TruthLookup dataset_truth(const Dataset& d);
/// Answers computed by the rule-based oracle for the file's project.
TruthLookup oracle_truth(std::vector<SpecSet> specs);

struct EvalFailure {
  std::string project;
  std::string id;
  std::string error;
};

struct EvalRun {
  ShotCombination combo;
  std::vector<EvalRecord> records;
  std::vector<EvalFailure> failures;
  MetricsReport report;
};

/// Validates every eval-set file with up to `jobs` files in flight. Per-file
/// errors are recorded as failures; records keep dataset order.
EvalRun evaluate_dataset(const Dataset& d, Backend& backend, const ShotDatabase& shots,
                         const PipelineConfig& config, std::size_t jobs = 1);

}  // namespace cfgval
