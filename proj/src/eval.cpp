#include "cfgval/eval.hpp"

#include <atomic>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace cfgval {

using nlohmann::json;

namespace {

double ratio(std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); }

json matrix_json(const ConfusionMatrix& m) { return {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}}; }

ConfusionMatrix matrix_from(const json& j) {
  return {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(), j.at("tn").get<std::size_t>(),
          j.at("fn").get<std::size_t>()};
}

json level_json(const LevelMetrics& m) { return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}}; }

LevelMetrics level_from(const json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

std::string bucket_name(const BucketMetrics& b) {
  if (b.hi == std::numeric_limits<std::size_t>::max()) return ">" + std::to_string(b.lo - 1);
  if (b.lo <= 1) return "<=" + std::to_string(b.hi);
  return std::to_string(b.lo) + "-" + std::to_string(b.hi);
}

ValidationResponse oracle_answer(const ConfigFile& f, const SpecSet& specs) {
  ValidationResponse r;
  for (const auto& v : oracle_validate(f, specs)) {
    if (std::find(r.err_parameters.begin(), r.err_parameters.end(), v.parameter) != r.err_parameters.end()) continue;
    r.err_parameters.push_back(v.parameter);
    r.reasons.push_back(v.detail);
  }
  r.has_error = !r.err_parameters.empty();
  return r;
}

}  // namespace

void ConfusionMatrix::add(Cell c) {
  switch (c) {
    case Cell::TP: ++tp; break;
    case Cell::FP: ++fp; break;
    case Cell::TN: ++tn; break;
    case Cell::FN: ++fn; break;
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

double precision(const ConfusionMatrix& m) { return ratio(m.tp, m.tp + m.fp); }
double recall(const ConfusionMatrix& m) { return ratio(m.tp, m.tp + m.fn); }

double f1(const ConfusionMatrix& m) {
  const double p = precision(m), r = recall(m);
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

LevelMetrics metrics_of(const ConfusionMatrix& m) { return {precision(m), recall(m), f1(m)}; }

FileScore score_file(const Verdict& verdict, const LabeledFile& truth) {
  if (verdict.target_fingerprint != fingerprint(truth.file)) {
    throw std::invalid_argument("verdict for '" + verdict.target + "' does not belong to " + truth.id);
  }
  FileScore s;
  const bool misconfig = truth.label == Label::Misconfig;
  if (misconfig) {
    s.file = verdict.has_error() ? Cell::TP : Cell::FN;
  } else {
    s.file = verdict.has_error() ? Cell::FP : Cell::TN;
  }
  const std::set<std::string> flagged(verdict.err_parameters().begin(), verdict.err_parameters().end());
  for (const auto& e : truth.file.entries()) {
    const bool injected = misconfig && truth.injected && truth.injected->parameter == e.name;
    const bool hit = flagged.count(e.name) != 0;
    s.parameters.add(injected ? (hit ? Cell::TP : Cell::FN) : (hit ? Cell::FP : Cell::TN));
  }
  for (const auto& name : flagged) {
    if (!truth.file.contains(name)) s.parameters.add(Cell::FP);
  }
  return s;
}

double macro_average(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("macro average over no projects");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::map<Subcategory, double> micro_f1_by_subcategory(const std::vector<EvalRecord>& records) {
  std::map<Subcategory, ConfusionMatrix> pooled;
  for (const auto& r : records) {
    if (r.label == Label::Misconfig) pooled[r.subcategory] += r.score.parameters;
  }
  std::map<Subcategory, double> out;
  for (const auto& [sub, m] : pooled) out[sub] = f1(m);
  return out;
}

std::vector<BucketMetrics> bucket_by_param_count(const std::vector<EvalRecord>& records,
                                                 const std::vector<std::size_t>& edges) {
  if (!std::is_sorted(edges.begin(), edges.end()) || std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("bucket edges must be strictly increasing");
  }
  std::vector<BucketMetrics> all;
  std::size_t lo = 0;
  auto add_bucket = [&](std::size_t from, std::size_t to) {
    BucketMetrics b;
    b.lo = from;
    b.hi = to;
    all.push_back(b);
  };
  for (auto e : edges) {
    add_bucket(lo, e);
    lo = e + 1;
  }
  add_bucket(lo, std::numeric_limits<std::size_t>::max());
  for (const auto& r : records) {
    for (auto& b : all) {
      if (r.entry_count >= b.lo && r.entry_count <= b.hi) {
        ++b.files;
        b.file.add(r.score.file);
        b.parameter += r.score.parameters;
        break;
      }
    }
  }
  std::vector<BucketMetrics> out;
  for (auto& b : all) {
    if (b.files == 0) continue;
    b.file_metrics = metrics_of(b.file);
    b.parameter_metrics = metrics_of(b.parameter);
    out.push_back(b);
  }
  return out;
}

MetricsReport build_report(const std::vector<EvalRecord>& records, const std::vector<std::size_t>& edges) {
  MetricsReport rep;
  rep.files = records.size();
  for (const auto& r : records) {
    auto& p = rep.projects[r.project];
    p.file.add(r.score.file);
    p.parameter += r.score.parameters;
  }
  std::vector<double> pf, pr, pf1, qf, qr, qf1;
  for (auto& [name, p] : rep.projects) {
    p.file_metrics = metrics_of(p.file);
    p.parameter_metrics = metrics_of(p.parameter);
    pf.push_back(p.file_metrics.precision);
    pr.push_back(p.file_metrics.recall);
    pf1.push_back(p.file_metrics.f1);
    qf.push_back(p.parameter_metrics.precision);
    qr.push_back(p.parameter_metrics.recall);
    qf1.push_back(p.parameter_metrics.f1);
  }
  if (!rep.projects.empty()) {
    rep.macro_file = {macro_average(pf), macro_average(pr), macro_average(pf1)};
    rep.macro_parameter = {macro_average(qf), macro_average(qr), macro_average(qf1)};
  }
  rep.subcategory_f1 = micro_f1_by_subcategory(records);
  rep.buckets = bucket_by_param_count(records, edges);
  return rep;
}

json report_json(const MetricsReport& r) {
  json projects = json::object();
  for (const auto& [name, p] : r.projects) {
    projects[name] = {{"file", {{"matrix", matrix_json(p.file)}, {"metrics", level_json(p.file_metrics)}}},
                      {"parameter", {{"matrix", matrix_json(p.parameter)}, {"metrics", level_json(p.parameter_metrics)}}}};
  }
  json subs = json::object();
  for (const auto& [sub, v] : r.subcategory_f1) subs[std::string(slug(sub))] = v;
  json buckets = json::array();
  for (const auto& b : r.buckets) {
    json hi = b.hi == std::numeric_limits<std::size_t>::max() ? json(nullptr) : json(b.hi);
    buckets.push_back({{"lo", b.lo},
                       {"hi", hi},
                       {"files", b.files},
                       {"file", {{"matrix", matrix_json(b.file)}, {"metrics", level_json(b.file_metrics)}}},
                       {"parameter", {{"matrix", matrix_json(b.parameter)}, {"metrics", level_json(b.parameter_metrics)}}}});
  }
  return {{"schema", "cfgval-report/1"},
          {"files", r.files},
          {"macro", {{"file", level_json(r.macro_file)}, {"parameter", level_json(r.macro_parameter)}}},
          {"projects", projects},
          {"subcategory_f1", subs},
          {"buckets", buckets}};
}

MetricsReport report_from_json(const json& j) {
  if (j.value("schema", "") != "cfgval-report/1") throw std::invalid_argument("not a cfgval report");
  MetricsReport r;
  r.files = j.at("files").get<std::size_t>();
  r.macro_file = level_from(j.at("macro").at("file"));
  r.macro_parameter = level_from(j.at("macro").at("parameter"));
  for (const auto& [name, p] : j.at("projects").items()) {
    ProjectMetrics m;
    m.file = matrix_from(p.at("file").at("matrix"));
    m.file_metrics = level_from(p.at("file").at("metrics"));
    m.parameter = matrix_from(p.at("parameter").at("matrix"));
    m.parameter_metrics = level_from(p.at("parameter").at("metrics"));
    r.projects[name] = m;
  }
  for (const auto& [name, v] : j.at("subcategory_f1").items()) r.subcategory_f1[subcategory_from_slug(name)] = v.get<double>();
  for (const auto& b : j.at("buckets")) {
    BucketMetrics m;
    m.lo = b.at("lo").get<std::size_t>();
    m.hi = b.at("hi").is_null() ? std::numeric_limits<std::size_t>::max() : b.at("hi").get<std::size_t>();
    m.files = b.at("files").get<std::size_t>();
    m.file = matrix_from(b.at("file").at("matrix"));
    m.file_metrics = level_from(b.at("file").at("metrics"));
    m.parameter = matrix_from(b.at("parameter").at("matrix"));
    m.parameter_metrics = level_from(b.at("parameter").at("metrics"));
    r.buckets.push_back(m);
  }
  return r;
}

std::string report_csv(const MetricsReport& r, std::string_view table) {
  std::ostringstream os;
  if (table == "projects") {
    os << "project,level,tp,fp,tn,fn,precision,recall,f1\n";
    auto row = [&](const std::string& name, const char* level, const ConfusionMatrix& m, const LevelMetrics& l) {
      os << name << ',' << level << ',' << m.tp << ',' << m.fp << ',' << m.tn << ',' << m.fn << ','
         << csv_number(l.precision) << ',' << csv_number(l.recall) << ',' << csv_number(l.f1) << '\n';
    };
    for (const auto& [name, p] : r.projects) {
      row(name, "file", p.file, p.file_metrics);
      row(name, "parameter", p.parameter, p.parameter_metrics);
    }
    os << "macro,file,,,,," << csv_number(r.macro_file.precision) << ',' << csv_number(r.macro_file.recall) << ','
       << csv_number(r.macro_file.f1) << '\n';
    os << "macro,parameter,,,,," << csv_number(r.macro_parameter.precision) << ','
       << csv_number(r.macro_parameter.recall) << ',' << csv_number(r.macro_parameter.f1) << '\n';
  } else if (table == "subcategories") {
    os << "category,subcategory,f1\n";
    for (auto sub : kAllSubcategories) {
      os << to_string(category_of(sub)) << ',' << display_name(sub) << ',';
      if (auto it = r.subcategory_f1.find(sub); it != r.subcategory_f1.end()) {
        os << csv_number(it->second);
      } else {
        os << "N.A.";
      }
      os << '\n';
    }
  } else if (table == "buckets") {
    os << "entries,files,file_f1,parameter_f1\n";
    for (const auto& b : r.buckets) {
      os << bucket_name(b) << ',' << b.files << ',' << csv_number(b.file_metrics.f1) << ','
         << csv_number(b.parameter_metrics.f1) << '\n';
    }
  } else {
    throw std::invalid_argument("unknown report table '" + std::string(table) + "'");
  }
  return os.str();
}

TruthLookup dataset_truth(const Dataset& d) {
  auto answers = std::make_shared<std::unordered_map<std::uint64_t, ValidationResponse>>();
  for (const auto& r : d.records) answers->emplace(fingerprint(r.labeled.file), ground_truth_answer(r.labeled));
  return [answers](const ConfigFile& f) -> std::optional<ValidationResponse> {
    if (auto it = answers->find(fingerprint(f)); it != answers->end()) return it->second;
    return std::nullopt;
  };
}

TruthLookup oracle_truth(std::vector<SpecSet> specs) {
  auto shared = std::make_shared<std::vector<SpecSet>>(std::move(specs));
  return [shared](const ConfigFile& f) -> std::optional<ValidationResponse> {
    for (const auto& s : *shared) {
      if (s.project() == f.project()) return oracle_answer(f, s);
    }
    return std::nullopt;
  };
}

EvalRun evaluate_dataset(const Dataset& d, Backend& backend, const ShotDatabase& shots,
                         const PipelineConfig& config, std::size_t jobs) {
  const auto targets = d.select(Split::EvalSet);
  std::vector<std::optional<EvalRecord>> records(targets.size());
  std::vector<std::optional<EvalFailure>> failures(targets.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < targets.size(); i = next++) {
      const auto& t = *targets[i];
      try {
        auto v = validate_file(t.labeled.file, backend, shots, config,
                               TargetInfo{t.project + "/" + t.labeled.id, t.labeled.origin});
        records[i] = EvalRecord{t.project, t.labeled.id, t.labeled.label, t.labeled.origin, t.labeled.file.size(),
                                score_file(v, t.labeled)};
      } catch (const std::exception& e) {
        failures[i] = EvalFailure{t.project, t.labeled.id, e.what()};
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::max<std::size_t>(1, std::min(jobs, targets.size())); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  EvalRun run;
  run.combo = config.shots;
  for (auto& r : records) {
    if (r) run.records.push_back(std::move(*r));
  }
  for (auto& f : failures) {
    if (f) run.failures.push_back(std::move(*f));
  }
  run.report = build_report(run.records);
  return run;
}

}  // namespace cfgval
