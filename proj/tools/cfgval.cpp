// Command-line front end: gen-dataset, validate, evaluate, report.
// Machine-readable output goes to stdout, progress and diagnostics to stderr.
// `validate` exits 0 for a clean file, 1 for a misconfigured one, 2 on error.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "cfgval/eval.hpp"
#include "cfgval/framework.hpp"
#include "cfgval/spec_io.hpp"

using namespace cfgval;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitValid = 0;
constexpr int kExitMisconfigured = 1;
constexpr int kExitError = 2;

bool quiet = false;

void log(const std::string& msg) {
  if (!quiet) std::cerr << "cfgval: " << msg << '\n';
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::optional<fs::path>& out, const std::string& text) {
  if (!out) {
    std::cout << text;
    return;
  }
  if (out->has_parent_path()) fs::create_directories(out->parent_path());
  std::ofstream f(*out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out->string());
  f << text;
}

FrameworkConfig load_config(const std::optional<fs::path>& path, std::optional<std::uint64_t> seed) {
  FrameworkConfig c = path ? load_framework_config(*path) : FrameworkConfig{};
  if (seed) c.pipeline.seed = *seed;
  return c;
}

// Answers the mock uses for its ground-truth behaviours: dataset labels
// first, then the rule oracle over the configured specs.
TruthLookup combined_truth(std::vector<TruthLookup> sources) {
  return [sources = std::move(sources)](const ConfigFile& f) -> std::optional<ValidationResponse> {
    for (const auto& s : sources) {
      if (auto r = s(f)) return r;
    }
    return std::nullopt;
  };
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::vector<std::string> specs;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t per_subcategory = GenerationOptions{}.sample_per_subcategory;
  std::size_t entries = GenerationOptions{}.entries_per_file;
};

int cmd_gen_dataset(const GenArgs& a) {
  std::vector<fs::path> paths(a.specs.begin(), a.specs.end());
  const auto specs = load_specs(paths);
  if (specs.empty()) throw std::runtime_error("no spec files found");
  GenerationOptions opts;
  opts.sample_per_subcategory = a.per_subcategory;
  opts.entries_per_file = a.entries;
  const auto d = generate_corpus(specs, a.seed, opts);
  write_dataset(d, a.out);
  log("wrote " + std::to_string(d.records.size()) + " files for " + std::to_string(d.projects.size()) +
      " projects to " + a.out);

  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& r : d.records) {
    const std::string key = r.labeled.label == Label::ValidConfig ? "valid" : std::string(slug(r.labeled.origin));
    auto& c = counts[key];
    (r.split == Split::ShotPool ? c.first : c.second)++;
  }
  std::cout << "subcategory,shot_pool,eval_set\n";
  for (auto sub : kAllSubcategories) {
    const auto it = counts.find(std::string(slug(sub)));
    const auto c = it == counts.end() ? std::pair<std::size_t, std::size_t>{0, 0} : it->second;
    std::cout << slug(sub) << ',' << c.first << ',' << c.second << '\n';
  }
  std::cout << "valid," << counts["valid"].first << ',' << counts["valid"].second << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string file;
  std::string project;
  std::string version;
  std::optional<std::string> format;
  std::optional<fs::path> base;
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
};

int cmd_validate(const ValidateArgs& a) {
  const auto cfg = load_config(a.config, a.seed);
  const auto format = a.format ? format_from_string(*a.format) : format_from_path(a.file);
  const auto target = parse_config(read_file(a.file), format, a.project, a.version);

  std::vector<SpecSet> specs = load_specs(cfg.spec_paths);
  std::vector<TruthLookup> truth;
  ShotDatabase shots;
  if (cfg.shot_db) {
    const auto d = load_dataset(*cfg.shot_db);
    shots = ShotDatabase::from_dataset(d);
    truth.push_back(dataset_truth(d));
  } else if (!specs.empty()) {
    log("no shot database configured; generating shots from the specs");
    shots = ShotDatabase::from_dataset(generate_corpus(specs, cfg.pipeline.seed));
  }
  if (!specs.empty()) truth.push_back(oracle_truth(specs));

  auto pipeline = cfg.pipeline;
  if (shots.shots().empty() && pipeline.shots.total() > 0) {
    log("no shots available; validating zero-shot");
    pipeline.shots = {0, 0};
  }
  auto backend = make_backend(cfg, combined_truth(std::move(truth)));
  const TargetInfo info{a.file, std::nullopt};
  Verdict v;
  if (a.base) {
    const auto base = parse_config(read_file(*a.base), format_from_path(a.base->string()), a.project, a.version);
    ConfigDiff diff{base, {}, {}};
    for (const auto& e : target.entries()) {
      const auto* old = base.find(e.name);
      if (!old || old->value != e.value) diff.changed.push_back(e);
    }
    if (diff.changed.empty()) {
      log("no changed entries");
      std::cout << json{{"target", a.file}, {"hasError", false}, {"errParameters", json::array()},
                        {"reasons", json::array()}, {"tally", 0}, {"total_votes", 0}, {"discarded_count", 0}}
                       .dump(2)
                << '\n';
      return kExitValid;
    }
    v = validate_diff(diff, *backend, shots, pipeline, info);
  } else {
    v = validate_file(target, *backend, shots, pipeline, info);
  }
  v.target = a.file;
  log("verdict from " + std::to_string(v.tally) + "/" + std::to_string(v.total_votes) + " votes, " +
      std::to_string(v.discarded_count) + " discarded");
  std::cout << verdict_json(v).dump(2) << '\n';
  return v.has_error() ? kExitMisconfigured : kExitValid;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  fs::path dataset;
  std::optional<fs::path> config;
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool sweep = false;
  std::size_t max_shots = 5;
};

json failures_json(const std::vector<EvalFailure>& fs) {
  json out = json::array();
  for (const auto& f : fs) out.push_back({{"project", f.project}, {"id", f.id}, {"error", f.error}});
  return out;
}

int cmd_evaluate(const EvaluateArgs& a) {
  const auto cfg = load_config(a.config, a.seed);
  const auto d = load_dataset(a.dataset);
  const auto shots = ShotDatabase::from_dataset(d);
  auto truth = std::vector<TruthLookup>{dataset_truth(d)};
  if (!cfg.spec_paths.empty()) truth.push_back(oracle_truth(load_specs(cfg.spec_paths)));
  auto backend = make_backend(cfg, combined_truth(std::move(truth)));

  const auto combos = a.sweep ? shot_sweep(a.max_shots) : std::vector<ShotCombination>{cfg.pipeline.shots};
  const auto targets = d.select(Split::EvalSet).size();
  json runs = json::array();
  bool systemic = false;
  for (const auto& combo : combos) {
    auto pipeline = cfg.pipeline;
    pipeline.shots = combo;
    log("evaluating " + std::to_string(targets) + " files with " + std::to_string(combo.valid_count) + " valid + " +
        std::to_string(combo.misconfig_count) + " misconfig shots");
    auto run = evaluate_dataset(d, *backend, shots, pipeline, a.jobs);
    if (!run.failures.empty()) {
      log(std::to_string(run.failures.size()) + " files failed; first: " + run.failures.front().error);
    }
    if (run.records.empty()) systemic = true;
    json r = {{"shots", {{"valid", combo.valid_count}, {"misconfig", combo.misconfig_count}}},
              {"failures", failures_json(run.failures)}};
    if (!run.records.empty()) r["report"] = report_json(run.report);
    runs.push_back(std::move(r));
  }
  auto cfg_json = framework_config_to_json(cfg);
  json doc = {{"schema", "cfgval-evaluation/1"},
              {"dataset", a.dataset.string()},
              {"seed", cfg.pipeline.seed},
              {"config", cfg_json},
              {"runs", runs}};
  write_text(a.out, doc.dump(2) + "\n");
  if (systemic) {
    log("no file could be validated");
    return kExitError;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  fs::path input;
  std::string table = "summary";
  std::optional<std::string> shots;
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
};

std::string number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

int cmd_report(const ReportArgs& a) {
  const json doc = json::parse(read_file(a.input));
  if (doc.value("schema", "") != "cfgval-evaluation/1") {
    throw std::runtime_error(a.input.string() + " is not an evaluation document");
  }
  const auto& runs = doc.at("runs");
  if (a.table == "summary") {
    std::ostringstream os;
    os << "valid_shots,misconfig_shots,files,failures,file_precision,file_recall,file_f1,"
          "parameter_precision,parameter_recall,parameter_f1\n";
    for (const auto& r : runs) {
      os << r["shots"]["valid"] << ',' << r["shots"]["misconfig"] << ',';
      if (!r.contains("report")) {
        os << "0," << r["failures"].size() << ",N.A.,N.A.,N.A.,N.A.,N.A.,N.A.\n";
        continue;
      }
      const auto rep = report_from_json(r["report"]);
      os << rep.files << ',' << r["failures"].size() << ',' << number(rep.macro_file.precision) << ','
         << number(rep.macro_file.recall) << ',' << number(rep.macro_file.f1) << ','
         << number(rep.macro_parameter.precision) << ',' << number(rep.macro_parameter.recall) << ','
         << number(rep.macro_parameter.f1) << '\n';
    }
    write_text(a.out, os.str());
    return 0;
  }

  const json* chosen = nullptr;
  if (a.shots) {
    std::size_t v = 0, m = 0;
    char comma = 0;
    std::istringstream is(*a.shots);
    if (!(is >> v >> comma >> m) || comma != ',') throw std::runtime_error("--shots expects V,M");
    for (const auto& r : runs) {
      if (r["shots"]["valid"] == v && r["shots"]["misconfig"] == m) chosen = &r;
    }
    if (!chosen) throw std::runtime_error("no run with shots " + *a.shots);
  } else {
    if (runs.size() != 1) throw std::runtime_error("the document holds several runs; pick one with --shots V,M");
    chosen = &runs[0];
  }
  if (!chosen->contains("report")) throw std::runtime_error("the selected run has no report");
  write_text(a.out, report_csv(report_from_json(chosen->at("report")), a.table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfgval: validate configuration files with a language model"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

  GenArgs gen;
  auto* g = app.add_subcommand("gen-dataset", "Generate a labeled corpus from parameter specs");
  g->add_option("-s,--spec", gen.specs, "Spec file or directory of spec files")->required();
  g->add_option("-o,--out", gen.out, "Output directory")->required();
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--per-subcategory", gen.per_subcategory, "Parameters sampled per sub-category")
      ->check(CLI::PositiveNumber);
  g->add_option("--entries", gen.entries, "Entries per generated file")->check(CLI::PositiveNumber);

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Check one configuration file");
  v->add_option("file", val.file, "Configuration file (.xml or .ini)")->required();
  v->add_option("-p,--project", val.project, "Project name")->required();
  v->add_option("-V,--version", val.version, "Project version")->required();
  v->add_option("-c,--config", val.config, "Framework config (JSON)");
  v->add_option("--format", val.format, "Override the format: xml or ini");
  v->add_option("--base", val.base, "Previous version of the file; only changed entries are checked");
  v->add_option("--seed", val.seed, "Random seed (overrides the config)");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score the pipeline on a dataset's evaluation set");
  e->add_option("dataset", ev.dataset, "Dataset directory")->required();
  e->add_option("-c,--config", ev.config, "Framework config (JSON)");
  e->add_option("-o,--out", ev.out, "Evaluation document path (default: stdout)");
  e->add_option("--seed", ev.seed, "Random seed (overrides the config)");
  e->add_option("-j,--jobs", ev.jobs, "Files validated in parallel")->check(CLI::PositiveNumber);
  e->add_flag("--sweep", ev.sweep, "Run every shot combination up to --max-shots");
  e->add_option("--max-shots", ev.max_shots, "Largest total shot count in a sweep");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Export tables from an evaluation document as CSV");
  r->add_option("input", rep.input, "Evaluation document")->required();
  r->add_option("-t,--table", rep.table, "summary, projects, subcategories or buckets")
      ->check(CLI::IsMember({"summary", "projects", "subcategories", "buckets"}));
  r->add_option("--shots", rep.shots, "Run to export, as V,M");
  r->add_option("-o,--out", rep.out, "Output path (default: stdout)");
  r->add_option("--seed", rep.seed, "Accepted for uniformity; reports are not random");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*g) return cmd_gen_dataset(gen);
    if (*v) return cmd_validate(val);
    if (*e) return cmd_evaluate(ev);
    if (*r) return cmd_report(rep);
  } catch (const std::exception& ex) {
    std::cerr << "cfgval: error: " << ex.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
