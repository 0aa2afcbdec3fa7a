#include "cfgval/spec_io.hpp"

#include <fstream>
#include <sstream>

namespace cfgval {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw SpecError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SpecError(where + ": field '" + key + "' has the wrong type");
  }
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  const auto& v = obj.at(key);
  if (v.is_string()) return v.get<std::string>();
  // Numbers and booleans are accepted and kept in their JSON spelling.
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw SpecError(where + ": field '" + key + "' must be a string");
}

ParameterSpec parameter_from_json(const json& p) {
  ParameterSpec spec;
  spec.name = required<std::string>(p, "name", "parameter");
  const std::string where = "parameter '" + spec.name + "'";
  try {
    spec.kind = value_kind_from_string(required<std::string>(p, "type", where));
  } catch (const std::invalid_argument& e) {
    throw SpecError(where + ": " + e.what());
  }
  if (p.contains("range")) {
    auto r = p.at("range");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
      throw SpecError(where + ": 'range' must be [lo, hi]");
    }
    spec.numeric_range = NumericRange{r[0].get<double>(), r[1].get<double>()};
  }
  spec.default_value = optional_string(p, "default", where);
  if (p.contains("options")) spec.options = required<std::vector<std::string>>(p, "options", where);
  if (p.contains("units")) spec.units = required<std::vector<std::string>>(p, "units", where);
  if (p.contains("description")) spec.description = required<std::string>(p, "description", where);
  return spec;
}

DependencyConstraint dependency_from_json(const json& d) {
  DependencyConstraint c;
  const std::string where = "dependency";
  auto kind = required<std::string>(d, "kind", where);
  if (kind == "control") {
    c.kind = DependencyKind::Control;
  } else if (kind == "value_relationship") {
    c.kind = DependencyKind::ValueRelationship;
  } else {
    throw SpecError("dependency: unknown kind '" + kind + "'");
  }
  c.p1 = required<std::string>(d, "p1", where);
  c.p2 = required<std::string>(d, "p2", where);
  try {
    c.comparator = comparator_from_string(required<std::string>(d, "op", where));
  } catch (const std::invalid_argument& e) {
    throw SpecError(std::string("dependency: ") + e.what());
  }
  c.value = optional_string(d, "value", where);
  return c;
}

VersionChange version_change_from_json(const json& v) {
  VersionChange c;
  const std::string where = "version change";
  c.v1 = required<std::string>(v, "from", where);
  c.v2 = required<std::string>(v, "to", where);
  if (v.contains("removed")) {
    auto names = required<std::vector<std::string>>(v, "removed", where);
    c.removed_in_v2.insert(names.begin(), names.end());
  }
  if (v.contains("added")) {
    auto names = required<std::vector<std::string>>(v, "added", where);
    c.added_in_v2.insert(names.begin(), names.end());
  }
  return c;
}

}  // namespace

SpecSet spec_set_from_json(const json& doc) {
  if (!doc.is_object()) throw SpecError("spec document must be a JSON object");
  auto project = required<std::string>(doc, "project", "spec document");
  auto version = required<std::string>(doc, "version", "spec document");
  std::vector<ParameterSpec> params;
  std::vector<DependencyConstraint> deps;
  std::vector<VersionChange> changes;
  for (const auto& p : doc.value("parameters", json::array())) params.push_back(parameter_from_json(p));
  for (const auto& d : doc.value("dependencies", json::array())) deps.push_back(dependency_from_json(d));
  for (const auto& v : doc.value("version_changes", json::array())) {
    changes.push_back(version_change_from_json(v));
  }
  return SpecSet(std::move(project), std::move(version), std::move(params), std::move(deps),
                 std::move(changes));
}

json spec_set_to_json(const SpecSet& specs) {
  json params = json::array();
  for (const auto& p : specs.parameters()) {
    json j{{"name", p.name}, {"type", std::string(to_string(p.kind))}};
    if (p.numeric_range) j["range"] = {p.numeric_range->lo, p.numeric_range->hi};
    if (p.default_value) j["default"] = *p.default_value;
    if (!p.options.empty()) j["options"] = p.options;
    if (!p.units.empty()) j["units"] = p.units;
    if (!p.description.empty()) j["description"] = p.description;
    params.push_back(std::move(j));
  }
  json deps = json::array();
  for (const auto& d : specs.dependencies()) {
    json j{{"kind", d.kind == DependencyKind::Control ? "control" : "value_relationship"},
           {"p1", d.p1},
           {"op", std::string(symbol(d.comparator))},
           {"p2", d.p2}};
    if (d.value) j["value"] = *d.value;
    deps.push_back(std::move(j));
  }
  json changes = json::array();
  for (const auto& c : specs.version_changes()) {
    changes.push_back({{"from", c.v1}, {"to", c.v2}, {"removed", c.removed_in_v2}, {"added", c.added_in_v2}});
  }
  return {{"project", specs.project()},
          {"version", specs.current_version()},
          {"parameters", params},
          {"dependencies", deps},
          {"version_changes", changes}};
}

SpecSet load_spec_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
  try {
    return spec_set_from_json(doc);
  } catch (const SpecError& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
}

}  // namespace cfgval
