#include "cfgval/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cfgval {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "cfgval-dataset/1";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write " + p.string());
  out << text;
}

json record_json(const DatasetRecord& r) {
  const auto& f = r.labeled;
  json injected = nullptr;
  if (f.injected) {
    injected = {{"parameter", f.injected->parameter},
                {"category", std::string(to_string(f.injected->category()))},
                {"subcategory", std::string(slug(f.injected->subcategory))},
                {"reason", f.injected->reason}};
  }
  return {{"id", f.id},
          {"project", r.project},
          {"version", f.file.version()},
          {"split", std::string(to_string(r.split))},
          {"label", std::string(to_string(f.label))},
          {"subcategory", std::string(slug(f.origin))},
          {"path", r.path},
          {"entries", f.file.size()},
          {"injected", injected},
          {"answer", to_json(ground_truth_answer(f))}};
}

}  // namespace

std::string_view to_string(Split s) { return s == Split::ShotPool ? "shot_pool" : "eval_set"; }

Split split_from_string(std::string_view s) {
  if (s == "shot_pool") return Split::ShotPool;
  if (s == "eval_set") return Split::EvalSet;
  throw std::invalid_argument("unknown split '" + std::string(s) + "'");
}

std::vector<const DatasetRecord*> Dataset::select(Split split) const {
  std::vector<const DatasetRecord*> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(&r);
  }
  return out;
}

Dataset generate_corpus(const std::vector<SpecSet>& specs, std::uint64_t seed,
                        const GenerationOptions& options) {
  Dataset d;
  d.seed = seed;
  const Rng root(seed);
  for (const auto& set : specs) {
    if (std::find(d.projects.begin(), d.projects.end(), set.project()) != d.projects.end()) {
      throw DatasetError("project '" + set.project() + "' given twice");
    }
    d.projects.push_back(set.project());
    auto rng = root.fork(set.project());
    auto split = build_dataset(set, rng, options);
    for (auto [files, which] : {std::pair{&split.shot_pool, Split::ShotPool}, {&split.eval_set, Split::EvalSet}}) {
      for (auto& f : *files) {
        DatasetRecord r;
        r.project = set.project();
        r.split = which;
        r.path = set.project() + "/" + std::string(to_string(which)) + "/" + std::string(slug(f.origin)) + "/" +
                 f.id + ".xml";
        r.labeled = std::move(f);
        d.records.push_back(std::move(r));
      }
    }
  }
  return d;
}

json manifest_json(const Dataset& d) {
  json files = json::array();
  for (const auto& r : d.records) files.push_back(record_json(r));
  return {{"schema", kSchema}, {"seed", d.seed}, {"projects", d.projects}, {"files", files}};
}

void write_dataset(const Dataset& d, const std::filesystem::path& root) {
  for (const auto& r : d.records) {
    write_file(root / r.path, render_config(r.labeled.file, ConfigFormat::Xml));
  }
  write_file(root / "manifest.json", manifest_json(d).dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& root) {
  json m;
  try {
    m = json::parse(read_file(root / "manifest.json"));
  } catch (const json::exception& e) {
    throw DatasetError((root / "manifest.json").string() + ": " + e.what());
  }
  if (m.value("schema", "") != kSchema) {
    throw DatasetError((root / "manifest.json").string() + ": unsupported schema");
  }
  Dataset d;
  try {
    d.seed = m.at("seed").get<std::uint64_t>();
    d.projects = m.at("projects").get<std::vector<std::string>>();
    for (const auto& j : m.at("files")) {
      DatasetRecord r;
      r.project = j.at("project").get<std::string>();
      r.split = split_from_string(j.at("split").get<std::string>());
      r.path = j.at("path").get<std::string>();
      auto& f = r.labeled;
      f.id = j.at("id").get<std::string>();
      f.label = label_from_string(j.at("label").get<std::string>());
      f.origin = subcategory_from_slug(j.at("subcategory").get<std::string>());
      if (!j.at("injected").is_null()) {
        const auto& inj = j.at("injected");
        f.injected = InjectedFault{inj.at("parameter").get<std::string>(),
                                   subcategory_from_slug(inj.at("subcategory").get<std::string>()),
                                   inj.at("reason").get<std::string>()};
      }
      if ((f.label == Label::Misconfig) != f.injected.has_value()) {
        throw DatasetError(f.id + ": label and injected fault disagree");
      }
      const auto version = j.at("version").get<std::string>();
      try {
        f.file = parse_config(read_file(root / r.path), ConfigFormat::Xml, r.project, version);
      } catch (const ParseError& e) {
        throw DatasetError(r.path + ": " + e.what());
      }
      if (f.file.size() != j.at("entries").get<std::size_t>()) {
        throw DatasetError(r.path + ": entry count differs from the manifest");
      }
      if (f.injected && !f.file.contains(f.injected->parameter)) {
        throw DatasetError(r.path + ": injected parameter '" + f.injected->parameter + "' is missing");
      }
      d.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DatasetError((root / "manifest.json").string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DatasetError((root / "manifest.json").string() + ": " + e.what());
  }
  return d;
}

}  // namespace cfgval
