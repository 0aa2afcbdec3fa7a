#include "cfgval/constraints.hpp"

#include <algorithm>
#include <cfloat>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <regex>
#include <sstream>

namespace cfgval {

namespace {

struct SubcategoryInfo {
  Subcategory id;
  Category category;
  std::string_view name;
  std::string_view slug;
};

constexpr std::array<SubcategoryInfo, 15> kSubcategoryInfo = {{
    {Subcategory::SyntaxDataType, Category::Syntax, "Data type", "syntax-data-type"},
    {Subcategory::SyntaxPath, Category::Syntax, "Path", "syntax-path"},
    {Subcategory::SyntaxUrl, Category::Syntax, "URL", "syntax-url"},
    {Subcategory::SyntaxIpAddress, Category::Syntax, "IP Address", "syntax-ip-address"},
    {Subcategory::SyntaxPort, Category::Syntax, "Port", "syntax-port"},
    {Subcategory::SyntaxPermission, Category::Syntax, "Permission", "syntax-permission"},
    {Subcategory::RangeBasicNumeric, Category::Range, "Basic numeric", "range-basic-numeric"},
    {Subcategory::RangeBool, Category::Range, "Bool", "range-bool"},
    {Subcategory::RangeEnum, Category::Range, "Enum", "range-enum"},
    {Subcategory::RangeIpAddress, Category::Range, "IP Address", "range-ip-address"},
    {Subcategory::RangePort, Category::Range, "Port", "range-port"},
    {Subcategory::RangePermission, Category::Range, "Permission", "range-permission"},
    {Subcategory::DependencyControl, Category::Dependency, "Control", "dependency-control"},
    {Subcategory::DependencyValueRelationship, Category::Dependency, "Value Relationship",
     "dependency-value-relationship"},
    {Subcategory::VersionParameterChange, Category::Version, "Parameter change",
     "version-parameter-change"},
}};

const SubcategoryInfo& info(Subcategory s) { return kSubcategoryInfo[static_cast<std::size_t>(s)]; }

constexpr std::array<std::pair<ValueKind, std::string_view>, 12> kKindNames = {{
    {ValueKind::Integer, "Integer"},
    {ValueKind::Float, "Float"},
    {ValueKind::Long, "Long"},
    {ValueKind::Boolean, "Boolean"},
    {ValueKind::String, "String"},
    {ValueKind::Path, "Path"},
    {ValueKind::Url, "URL"},
    {ValueKind::IpAddress, "IPAddress"},
    {ValueKind::Port, "Port"},
    {ValueKind::Permission, "Permission"},
    {ValueKind::Enum, "Enum"},
    {ValueKind::NumberWithUnit, "NumberWithUnit"},
}};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string range_text(double lo, double hi) {
  return "[" + format_number(lo) + ", " + format_number(hi) + "]";
}

// Patterns from the generation-rule table (the IP dot is escaped).
const std::regex& path_pattern() {
  static const std::regex re(R"(^(\/[^\/ ]*)+\/?$)");
  return re;
}
const std::regex& url_pattern() {
  static const std::regex re(R"(^[a-z]+://.*$)");
  return re;
}
const std::regex& ip_pattern() {
  static const std::regex re(R"(^[0-9]{1,3}(\.[0-9]{1,3}){3}$)");
  return re;
}
const std::regex& float_pattern() {
  static const std::regex re(R"(^[+-]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?$)");
  return re;
}
const std::regex& unit_number_pattern() {
  static const std::regex re(R"(^[+-]?[0-9]+(\.[0-9]+)?[ ]*([A-Za-z]+)?$)");
  return re;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_integer_literal(std::string_view s) {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  return all_digits(s);
}

// Parses an integer literal; nullopt when it does not fit in 64 bits.
std::optional<std::int64_t> parse_int64(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ptr != s.data() + s.size()) return std::nullopt;
  if (ec == std::errc::result_out_of_range) return std::numeric_limits<double>::infinity();
  if (ec != std::errc()) return std::nullopt;
  return v;
}

// Numeric view of a raw value for comparisons, or nullopt when it is not a
// plain number.
std::optional<long double> as_number(std::string_view s) {
  if (is_integer_literal(s)) {
    if (auto i = parse_int64(s)) return static_cast<long double>(*i);
  }
  if (std::regex_match(s.begin(), s.end(), float_pattern())) {
    if (auto d = parse_double(s)) return static_cast<long double>(*d);
  }
  return std::nullopt;
}

Violation make(Subcategory s, const std::string& parameter, std::string detail) {
  return Violation{category_of(s), s, parameter, std::move(detail)};
}

std::string squote(std::string_view v) { return "'" + std::string(v) + "'"; }

std::optional<Violation> check_in_range(const ParameterSpec& spec, std::string_view value,
                                        long double number, Subcategory sub) {
  if (spec.numeric_range &&
      (number < spec.numeric_range->lo || number > spec.numeric_range->hi)) {
    return make(sub, spec.name,
                "value " + squote(value) + " is outside the allowed range " +
                    range_text(spec.numeric_range->lo, spec.numeric_range->hi));
  }
  return std::nullopt;
}

}  // namespace

Category category_of(Subcategory s) { return info(s).category; }

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Syntax: return "Syntax";
    case Category::Range: return "Range";
    case Category::Dependency: return "Dependency";
    case Category::Version: return "Version";
  }
  return "?";
}

std::string_view display_name(Subcategory s) { return info(s).name; }
std::string_view slug(Subcategory s) { return info(s).slug; }

Subcategory subcategory_from_slug(std::string_view s) {
  for (const auto& i : kSubcategoryInfo) {
    if (i.slug == s) return i.id;
  }
  throw std::invalid_argument("unknown sub-category '" + std::string(s) + "'");
}

std::string_view to_string(ValueKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

ValueKind value_kind_from_string(std::string_view s) {
  auto l = lower(s);
  for (const auto& [kind, name] : kKindNames) {
    if (lower(name) == l) return kind;
  }
  if (l == "bool") return ValueKind::Boolean;
  if (l == "ip" || l == "ip_address") return ValueKind::IpAddress;
  if (l == "number_with_unit" || l == "duration" || l == "size") return ValueKind::NumberWithUnit;
  if (l == "double") return ValueKind::Float;
  throw std::invalid_argument("unknown value kind '" + std::string(s) + "'");
}

Comparator negate(Comparator c) {
  switch (c) {
    case Comparator::Gt: return Comparator::Le;
    case Comparator::Ge: return Comparator::Lt;
    case Comparator::Eq: return Comparator::Ne;
    case Comparator::Ne: return Comparator::Eq;
    case Comparator::Lt: return Comparator::Ge;
    case Comparator::Le: return Comparator::Gt;
  }
  return c;
}

std::string_view symbol(Comparator c) {
  switch (c) {
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
    case Comparator::Eq: return "=";
    case Comparator::Ne: return "!=";
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
  }
  return "?";
}

Comparator comparator_from_string(std::string_view s) {
  if (s == ">") return Comparator::Gt;
  if (s == ">=" || s == "≥") return Comparator::Ge;
  if (s == "=" || s == "==") return Comparator::Eq;
  if (s == "!=" || s == "≠" || s == "<>") return Comparator::Ne;
  if (s == "<") return Comparator::Lt;
  if (s == "<=" || s == "≤") return Comparator::Le;
  throw std::invalid_argument("unknown comparator '" + std::string(s) + "'");
}

void DependencyConstraint::validate() const {
  if (p1.empty() || p2.empty()) throw std::invalid_argument("dependency needs two parameters");
  if (p1 == p2) throw std::invalid_argument("dependency on '" + p1 + "' refers to itself");
  if (kind == DependencyKind::Control && !value) {
    throw std::invalid_argument("control dependency " + p1 + " -> " + p2 + " needs a value");
  }
  if (kind == DependencyKind::ValueRelationship && value) {
    throw std::invalid_argument("value relationship " + p1 + " / " + p2 + " must not carry a value");
  }
}

void VersionChange::validate() const {
  if (v1.empty() || v2.empty()) throw std::invalid_argument("version change needs two versions");
  if (v1 == v2) throw std::invalid_argument("version change from '" + v1 + "' to itself");
  for (const auto& name : removed_in_v2) {
    if (added_in_v2.count(name) != 0) {
      throw std::invalid_argument("parameter '" + name + "' both removed and added in " + v2);
    }
  }
}

void ParameterSpec::validate() const {
  if (name.empty()) throw std::invalid_argument("parameter spec without a name");
  const std::string who = "parameter '" + name + "': ";
  if (kind == ValueKind::Enum && options.empty()) {
    throw std::invalid_argument(who + "Enum needs at least one option");
  }
  if (kind == ValueKind::NumberWithUnit && units.empty()) {
    throw std::invalid_argument(who + "NumberWithUnit needs at least one unit");
  }
  if (numeric_range) {
    const auto [lo, hi] = *numeric_range;
    if (!(lo <= hi)) throw std::invalid_argument(who + "range lower bound exceeds upper bound");
    switch (kind) {
      case ValueKind::Integer:
      case ValueKind::Long:
      case ValueKind::Float:
        break;
      case ValueKind::Port:
        if (lo < 0 || hi > 65535) throw std::invalid_argument(who + "port range must lie in [0, 65535]");
        break;
      case ValueKind::Permission:
        if (lo < 0 || hi > 777) throw std::invalid_argument(who + "permission range must lie in [000, 777]");
        break;
      default:
        throw std::invalid_argument(who + "a numeric range is not meaningful for " +
                                    std::string(to_string(kind)));
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<Subcategory> assign_subcategories(const ParameterSpec& spec) {
  std::set<Subcategory> out;
  switch (spec.kind) {
    case ValueKind::Integer:
    case ValueKind::Long:
    case ValueKind::Float:
      out.insert(Subcategory::SyntaxDataType);
      out.insert(Subcategory::RangeBasicNumeric);
      break;
    case ValueKind::Boolean:
      out.insert(Subcategory::SyntaxDataType);
      out.insert(Subcategory::RangeBool);
      break;
    case ValueKind::NumberWithUnit:
      out.insert(Subcategory::SyntaxDataType);
      break;
    case ValueKind::Path:
      out.insert(Subcategory::SyntaxPath);
      break;
    case ValueKind::Url:
      out.insert(Subcategory::SyntaxUrl);
      break;
    case ValueKind::IpAddress:
      out.insert(Subcategory::SyntaxIpAddress);
      out.insert(Subcategory::RangeIpAddress);
      break;
    case ValueKind::Port:
      out.insert(Subcategory::SyntaxPort);
      out.insert(Subcategory::RangePort);
      break;
    case ValueKind::Permission:
      out.insert(Subcategory::SyntaxPermission);
      out.insert(Subcategory::RangePermission);
      break;
    case ValueKind::Enum:
      out.insert(Subcategory::RangeEnum);
      break;
    case ValueKind::String:
      break;
  }
  for (const auto& d : spec.dependencies) {
    if (d.flagged_parameter() != spec.name) continue;
    out.insert(d.kind == DependencyKind::Control ? Subcategory::DependencyControl
                                                 : Subcategory::DependencyValueRelationship);
  }
  if (!spec.version_changes.empty()) out.insert(Subcategory::VersionParameterChange);
  return {out.begin(), out.end()};
}

std::optional<Violation> check_value(const ParameterSpec& spec, std::string_view value) {
  const auto& name = spec.name;
  switch (spec.kind) {
    case ValueKind::String:
      return std::nullopt;

    case ValueKind::Integer:
    case ValueKind::Long: {
      const bool is_long = spec.kind == ValueKind::Long;
      if (!is_integer_literal(value)) {
        return make(Subcategory::SyntaxDataType, name,
                    squote(value) + " is not a valid " + (is_long ? "long" : "integer"));
      }
      auto parsed = parse_int64(value);
      if (!parsed || (!is_long && (*parsed < std::numeric_limits<std::int32_t>::min() ||
                                   *parsed > std::numeric_limits<std::int32_t>::max()))) {
        return make(Subcategory::RangeBasicNumeric, name,
                    squote(value) + " overflows the " + (is_long ? "64" : "32") + "-bit integer range");
      }
      return check_in_range(spec, value, static_cast<long double>(*parsed),
                            Subcategory::RangeBasicNumeric);
    }

    case ValueKind::Float: {
      if (!std::regex_match(value.begin(), value.end(), float_pattern())) {
        return make(Subcategory::SyntaxDataType, name, squote(value) + " is not a valid float");
      }
      auto parsed = parse_double(value);
      if (!parsed || !std::isfinite(*parsed) || std::fabs(*parsed) > FLT_MAX) {
        return make(Subcategory::RangeBasicNumeric, name,
                    squote(value) + " exceeds the single-precision float range");
      }
      return check_in_range(spec, value, *parsed, Subcategory::RangeBasicNumeric);
    }

    case ValueKind::Boolean: {
      auto l = lower(value);
      if (l == "true" || l == "false") return std::nullopt;
      const bool word = !value.empty() && std::all_of(value.begin(), value.end(), [](unsigned char c) {
        return std::isalpha(c) != 0;
      });
      if (word) {
        return make(Subcategory::RangeBool, name, squote(value) + " is not one of {true, false}");
      }
      return make(Subcategory::SyntaxDataType, name, squote(value) + " is not a boolean");
    }

    case ValueKind::Path:
      if (!std::regex_match(value.begin(), value.end(), path_pattern()) ||
          value.find("//") != std::string_view::npos) {
        return make(Subcategory::SyntaxPath, name, squote(value) + " is not a well-formed absolute path");
      }
      return std::nullopt;

    case ValueKind::Url:
      if (!std::regex_match(value.begin(), value.end(), url_pattern())) {
        return make(Subcategory::SyntaxUrl, name, squote(value) + " is not a well-formed URL");
      }
      return std::nullopt;

    case ValueKind::IpAddress: {
      if (!std::regex_match(value.begin(), value.end(), ip_pattern())) {
        return make(Subcategory::SyntaxIpAddress, name, squote(value) + " is not a well-formed IP address");
      }
      std::size_t start = 0;
      while (start <= value.size()) {
        auto dot = value.find('.', start);
        auto octet = value.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        if (*parse_int64(octet) > 255) {
          return make(Subcategory::RangeIpAddress, name,
                      "octet " + squote(octet) + " of " + squote(value) + " is outside [0, 255]");
        }
        if (dot == std::string_view::npos) break;
        start = dot + 1;
      }
      return std::nullopt;
    }

    case ValueKind::Port: {
      if (!all_digits(value)) {
        return make(Subcategory::SyntaxPort, name, squote(value) + " is not a numeric port");
      }
      auto parsed = parse_int64(value);
      if (!parsed || *parsed > 65535) {
        return make(Subcategory::RangePort, name, "port " + squote(value) + " is outside [0, 65535]");
      }
      return check_in_range(spec, value, static_cast<long double>(*parsed), Subcategory::RangePort);
    }

    case ValueKind::Permission: {
      if (!all_digits(value) || value.size() < 3) {
        return make(Subcategory::SyntaxPermission, name,
                    squote(value) + " is not a three-digit octal permission");
      }
      if (value.size() > 3 ||
          std::any_of(value.begin(), value.end(), [](char c) { return c > '7'; })) {
        return make(Subcategory::RangePermission, name,
                    "permission " + squote(value) + " is outside [000, 777]");
      }
      return check_in_range(spec, value, static_cast<long double>(*parse_int64(value)),
                            Subcategory::RangePermission);
    }

    case ValueKind::Enum:
      if (std::find(spec.options.begin(), spec.options.end(), value) == spec.options.end()) {
        std::string opts;
        for (const auto& o : spec.options) opts += (opts.empty() ? "" : ", ") + o;
        return make(Subcategory::RangeEnum, name, squote(value) + " is not one of {" + opts + "}");
      }
      return std::nullopt;

    case ValueKind::NumberWithUnit: {
      std::match_results<std::string_view::const_iterator> m;
      if (!std::regex_match(value.begin(), value.end(), m, unit_number_pattern())) {
        return make(Subcategory::SyntaxDataType, name, squote(value) + " is not a number with a unit");
      }
      if (m[2].matched) {
        auto unit = lower(m[2].str());
        bool known = std::any_of(spec.units.begin(), spec.units.end(),
                                 [&](const std::string& u) { return lower(u) == unit; });
        if (!known) {
          return make(Subcategory::SyntaxDataType, name,
                      "unit '" + m[2].str() + "' in " + squote(value) + " is not a known unit");
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<Violation> check_version(std::string_view name, std::string_view version,
                                       const std::vector<VersionChange>& changes) {
  const std::string key(name);
  for (const auto& c : changes) {
    if (version == c.v2 && c.removed_in_v2.count(key) != 0) {
      return make(Subcategory::VersionParameterChange, key,
                  "'" + key + "' was removed in version " + c.v2);
    }
    if (version == c.v1 && c.added_in_v2.count(key) != 0) {
      return make(Subcategory::VersionParameterChange, key,
                  "'" + key + "' does not exist before version " + c.v2);
    }
  }
  return std::nullopt;
}

bool compare_values(std::string_view lhs, Comparator cmp, std::string_view rhs) {
  auto a = as_number(lhs);
  auto b = as_number(rhs);
  if (a && b) {
    switch (cmp) {
      case Comparator::Gt: return *a > *b;
      case Comparator::Ge: return *a >= *b;
      case Comparator::Eq: return *a == *b;
      case Comparator::Ne: return *a != *b;
      case Comparator::Lt: return *a < *b;
      case Comparator::Le: return *a <= *b;
    }
  }
  if (cmp != Comparator::Eq && cmp != Comparator::Ne) {
    throw EvaluationError("cannot order non-numeric values '" + std::string(lhs) + "' and '" +
                          std::string(rhs) + "'");
  }
  bool equal;
  auto la = lower(lhs);
  auto lb = lower(rhs);
  auto is_bool = [](const std::string& s) { return s == "true" || s == "false"; };
  if (is_bool(la) && is_bool(lb)) {
    equal = la == lb;
  } else {
    equal = lhs == rhs;
  }
  return cmp == Comparator::Eq ? equal : !equal;
}

// ---------------------------------------------------------------------------

SpecSet::SpecSet(std::string project, std::string current_version,
                 std::vector<ParameterSpec> parameters,
                 std::vector<DependencyConstraint> dependencies,
                 std::vector<VersionChange> version_changes)
    : project_(std::move(project)),
      current_version_(std::move(current_version)),
      parameters_(std::move(parameters)),
      dependencies_(std::move(dependencies)),
      version_changes_(std::move(version_changes)) {
  if (project_.empty()) throw SpecError("spec set without a project");
  if (current_version_.empty()) throw SpecError("spec set for " + project_ + " without a version");
  try {
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
      auto& p = parameters_[i];
      if (p.project.empty()) p.project = project_;
      p.validate();
      if (!index_.emplace(p.name, i).second) throw SpecError("duplicate parameter spec '" + p.name + "'");
      p.dependencies.clear();
      p.version_changes.clear();
    }
    for (const auto& p : parameters_) {
      if (p.default_value) {
        if (auto v = check_value(p, *p.default_value)) {
          throw SpecError("default of '" + p.name + "' is invalid: " + v->detail);
        }
      }
    }
    for (const auto& d : dependencies_) {
      d.validate();
      const auto* s1 = find(d.p1);
      const auto* s2 = find(d.p2);
      if (s1 == nullptr || s2 == nullptr) {
        throw SpecError("dependency " + d.p1 + " / " + d.p2 + " refers to a parameter without a spec");
      }
      if (d.value) {
        if (auto v = check_value(*s1, *d.value)) {
          throw SpecError("control value of " + d.p1 + " is invalid: " + v->detail);
        }
      }
      parameters_[index_.find(d.flagged_parameter())->second].dependencies.push_back(d);
    }
    for (const auto& c : version_changes_) {
      c.validate();
      for (const auto* names : {&c.removed_in_v2, &c.added_in_v2}) {
        for (const auto& n : *names) {
          if (auto it = index_.find(n); it != index_.end()) {
            parameters_[it->second].version_changes.push_back(c);
          }
        }
      }
    }
  } catch (const std::invalid_argument& e) {
    throw SpecError(project_ + ": " + e.what());
  }
}

const ParameterSpec* SpecSet::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &parameters_[it->second];
}

bool SpecSet::has_version_record(std::string_view name) const {
  const std::string key(name);
  return std::any_of(version_changes_.begin(), version_changes_.end(), [&](const VersionChange& c) {
    return c.removed_in_v2.count(key) != 0 || c.added_in_v2.count(key) != 0;
  });
}

std::vector<std::string> SpecSet::version_only_parameters() const {
  std::set<std::string> out;
  for (const auto& c : version_changes_) {
    for (const auto* names : {&c.removed_in_v2, &c.added_in_v2}) {
      for (const auto& n : *names) {
        if (find(n) == nullptr) out.insert(n);
      }
    }
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> SpecSet::known_versions() const {
  std::vector<std::string> out{current_version_};
  for (const auto& c : version_changes_) {
    for (const auto* v : {&c.v1, &c.v2}) {
      if (std::find(out.begin(), out.end(), *v) == out.end()) out.push_back(*v);
    }
  }
  return out;
}

bool SpecSet::involved_in_dependency(std::string_view name) const {
  return std::any_of(dependencies_.begin(), dependencies_.end(),
                     [&](const DependencyConstraint& d) { return d.p1 == name || d.p2 == name; });
}

std::optional<std::string> effective_value(std::string_view name, const ConfigFile& file,
                                           const SpecSet& specs) {
  if (const auto* e = file.find(name)) return e->value;
  if (const auto* s = specs.find(name); s != nullptr && s->default_value) return s->default_value;
  return std::nullopt;
}

std::optional<Violation> check_dependency(const DependencyConstraint& c, const ConfigFile& file,
                                          const SpecSet& specs) {
  if (c.kind == DependencyKind::Control) {
    if (!file.contains(c.p2)) return std::nullopt;
    auto guard = effective_value(c.p1, file, specs);
    if (!guard) return std::nullopt;
    if (compare_values(*guard, c.comparator, *c.value)) return std::nullopt;
    return make(Subcategory::DependencyControl, c.p2,
                "'" + c.p2 + "' is set but only takes effect when " + c.p1 + " " +
                    std::string(symbol(c.comparator)) + " " + *c.value + " (" + c.p1 + " is " +
                    squote(*guard) + ")");
  }
  const bool set1 = file.contains(c.p1);
  const bool set2 = file.contains(c.p2);
  if (!set1 && !set2) return std::nullopt;
  auto v1 = effective_value(c.p1, file, specs);
  auto v2 = effective_value(c.p2, file, specs);
  if (!v1 || !v2) return std::nullopt;
  if (compare_values(*v1, c.comparator, *v2)) return std::nullopt;
  return make(Subcategory::DependencyValueRelationship, set1 ? c.p1 : c.p2,
              "'" + c.p1 + "' (" + *v1 + ") must be " + std::string(symbol(c.comparator)) + " '" +
                  c.p2 + "' (" + *v2 + ")");
}

std::vector<Violation> oracle_validate(const ConfigFile& file, const SpecSet& specs,
                                       const std::vector<VersionChange>& version_changes) {
  std::vector<Violation> out;
  std::set<std::string, std::less<>> invalid;
  for (const auto& e : file.entries()) {
    const auto* spec = specs.find(e.name);
    const bool versioned = std::any_of(
        version_changes.begin(), version_changes.end(), [&](const VersionChange& c) {
          return c.removed_in_v2.count(e.name) != 0 || c.added_in_v2.count(e.name) != 0;
        });
    if (spec == nullptr && !versioned) throw UnknownParameterError(e.name);
    if (auto v = check_version(e.name, file.version(), version_changes)) {
      out.push_back(std::move(*v));
      invalid.insert(e.name);
      continue;
    }
    if (spec != nullptr) {
      if (auto v = check_value(*spec, e.value)) {
        out.push_back(std::move(*v));
        invalid.insert(e.name);
      }
    }
  }
  for (const auto& d : specs.dependencies()) {
    if (invalid.count(d.p1) != 0 || invalid.count(d.p2) != 0) continue;
    if (auto v = check_dependency(d, file, specs)) out.push_back(std::move(*v));
  }
  return out;
}

}  // namespace cfgval
