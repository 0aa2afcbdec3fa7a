#include "cfgval/misconfig_gen.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

namespace cfgval {

std::string_view to_string(Label l) { return l == Label::Misconfig ? "Misconfig" : "ValidConfig"; }

Label label_from_string(std::string_view s) {
  if (s == "Misconfig") return Label::Misconfig;
  if (s == "ValidConfig") return Label::ValidConfig;
  throw std::invalid_argument("unknown label '" + std::string(s) + "'");
}

ValidationResponse ground_truth_answer(const LabeledFile& f) {
  if (f.label == Label::ValidConfig || !f.injected) return {};
  return {true, {f.injected->parameter}, {f.injected->reason}};
}

namespace {

constexpr int kValueDraws = 64;
constexpr int kRepairPasses = 8;
constexpr int kUniquenessAttempts = 32;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<long double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  errno = 0;
  long double v = std::strtold(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  // strtold accepts hex, inf and leading blanks; configuration numbers do not.
  if (buf.find_first_of("xXnN \t") != std::string::npos) return std::nullopt;
  return v;
}

std::string format_integer(long double v) {
  std::ostringstream os;
  os << static_cast<long long>(v);
  return os.str();
}

std::string format_decimal(long double v) {
  std::ostringstream os;
  os.precision(9);
  os << static_cast<double>(v);
  return os.str();
}

bool is_integer_kind(ValueKind k) {
  return k == ValueKind::Integer || k == ValueKind::Long || k == ValueKind::Port;
}

// Renders a numeric candidate in the spec's native syntax, if it has one.
std::optional<std::string> format_for(const ParameterSpec& spec, long double v) {
  if (is_integer_kind(spec.kind)) {
    if (v != std::floor(v) || std::fabs(v) > 9.2e18L) return std::nullopt;
    return format_integer(v);
  }
  if (spec.kind == ValueKind::Float) return format_decimal(v);
  if (spec.kind == ValueKind::Permission) {
    if (v != std::floor(v) || v < 0 || v > 777) return std::nullopt;
    auto digits = format_integer(v);
    return std::string(3 - std::min<std::size_t>(3, digits.size()), '0') + digits;
  }
  return std::nullopt;
}

std::string hex_suffix(Rng& rng, int digits) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < digits; ++i) out += kHex[rng.below(16)];
  return out;
}

const std::vector<std::string> kPathSegments = {"var", "data", "tmp", "hadoop", "logs",
                                                "lib", "cache", "srv", "opt", "run"};

std::string random_path(Rng& rng) {
  std::string p;
  auto n = rng.between(1, 3);
  for (int i = 0; i < n; ++i) p += "/" + rng.pick(kPathSegments);
  if (rng.chance(0.3)) p += std::to_string(rng.between(1, 9));
  return p;
}

std::string random_ip(Rng& rng) {
  return std::to_string(rng.between(1, 254)) + "." + std::to_string(rng.between(0, 255)) + "." +
         std::to_string(rng.between(0, 255)) + "." + std::to_string(rng.between(1, 254));
}

std::vector<std::string> split_octets(std::string_view ip) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto dot = ip.find('.', start);
    out.emplace_back(ip.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return out;
}

// Integer bounds imposed by the value kind, intersected with the spec range.
std::pair<long double, long double> integer_bounds(const ParameterSpec& spec) {
  long double lo;
  long double hi;
  switch (spec.kind) {
    case ValueKind::Integer:
      lo = std::numeric_limits<std::int32_t>::min();
      hi = std::numeric_limits<std::int32_t>::max();
      break;
    case ValueKind::Port:
      lo = 0;
      hi = 65535;
      break;
    default:
      lo = static_cast<long double>(std::numeric_limits<std::int64_t>::min());
      hi = static_cast<long double>(std::numeric_limits<std::int64_t>::max());
  }
  if (spec.numeric_range) {
    lo = std::max(lo, std::ceil(static_cast<long double>(spec.numeric_range->lo)));
    hi = std::min(hi, std::floor(static_cast<long double>(spec.numeric_range->hi)));
  }
  return {lo, hi};
}

std::string squote(std::string_view v) { return "'" + std::string(v) + "'"; }

std::string kind_noun(ValueKind k) {
  switch (k) {
    case ValueKind::Integer: return "integer";
    case ValueKind::Long: return "long integer";
    case ValueKind::Float: return "floating-point number";
    case ValueKind::Boolean: return "boolean";
    case ValueKind::NumberWithUnit: return "number with a unit";
    default: return std::string(to_string(k));
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
  return out;
}

std::string value_reason(const ParameterSpec& spec, Subcategory sub, const std::string& v) {
  const auto& p = spec.name;
  switch (sub) {
    case Subcategory::SyntaxDataType:
      if (spec.kind == ValueKind::NumberWithUnit) {
        return p + ": " + squote(v) + " uses an unknown unit; expected one of {" + join(spec.units) + "}";
      }
      return p + ": " + squote(v) + " is not a valid " + kind_noun(spec.kind);
    case Subcategory::SyntaxPath: return p + ": " + squote(v) + " is not a valid absolute path";
    case Subcategory::SyntaxUrl: return p + ": " + squote(v) + " is not a valid URL";
    case Subcategory::SyntaxIpAddress: return p + ": " + squote(v) + " is not a valid IP address";
    case Subcategory::SyntaxPort: return p + ": " + squote(v) + " is not a valid port number";
    case Subcategory::SyntaxPermission: return p + ": " + squote(v) + " is not a valid octal permission";
    case Subcategory::RangeBasicNumeric: {
      if (spec.numeric_range) {
        std::ostringstream os;
        os << p << ": value " << squote(v) << " is out of the valid range [" << spec.numeric_range->lo
           << ", " << spec.numeric_range->hi << "]";
        return os.str();
      }
      return p + ": value " + squote(v) + " overflows the " + kind_noun(spec.kind) + " type";
    }
    case Subcategory::RangeBool: return p + ": " + squote(v) + " is not a boolean; expected true or false";
    case Subcategory::RangeEnum:
      return p + ": " + squote(v) + " is not one of the allowed options {" + join(spec.options) + "}";
    case Subcategory::RangeIpAddress: return p + ": " + squote(v) + " has an octet outside [0, 255]";
    case Subcategory::RangePort: return p + ": value " + squote(v) + " exceeds port range [0,65535]";
    case Subcategory::RangePermission: return p + ": permission " + squote(v) + " is outside [000, 777]";
    default: return p + ": invalid value " + squote(v);
  }
}

std::string dependency_reason(const DependencyConstraint& c) {
  if (c.kind == DependencyKind::Control) {
    return c.p2 + " is set but has no effect unless " + c.p1 + " " + std::string(symbol(c.comparator)) +
           " " + *c.value;
  }
  return c.p1 + " must be " + std::string(symbol(c.comparator)) + " " + c.p2;
}

// ---------------------------------------------------------------------------
// Value search helpers shared by valid-file repair and dependency injection.

bool version_ok(const SpecSet& specs, std::string_view name, std::string_view version) {
  return !check_version(name, version, specs.version_changes());
}

std::vector<std::string> valid_versions(const SpecSet& specs, std::string_view name) {
  std::vector<std::string> out;
  for (const auto& v : specs.known_versions()) {
    if (version_ok(specs, name, v)) out.push_back(v);
  }
  return out;
}

bool safe_compare(std::string_view a, Comparator cmp, std::string_view b) {
  try {
    return compare_values(a, cmp, b);
  } catch (const EvaluationError&) {
    return false;
  }
}

// True only when the operands are comparable and the relation fails.
bool breaks_relation(std::string_view a, Comparator cmp, std::string_view b) {
  try {
    return !compare_values(a, cmp, b);
  } catch (const EvaluationError&) {
    return false;
  }
}

// Numeric candidates near `x` for a relation partner.
std::vector<long double> neighbours(std::string_view x, std::initializer_list<char> moves) {
  std::vector<long double> out;
  auto n = parse_number(x);
  if (!n) return out;
  for (char m : moves) {
    switch (m) {
      case '=': out.push_back(*n); break;
      case '+': out.push_back(*n + 1); break;
      case '-': out.push_back(*n - 1); break;
      case '*': out.push_back(*n * 2); break;
      case '/': out.push_back(std::floor(*n / 2)); break;
    }
  }
  return out;
}

// First value acceptable to `spec` that satisfies `pred`, trying the
// explicit hints before random valid draws.
std::optional<std::string> find_value(const ParameterSpec& spec, const std::vector<std::string>& hints,
                                      const std::vector<long double>& numeric_hints,
                                      const std::function<bool(const std::string&)>& pred, Rng& rng) {
  std::vector<std::string> candidates = hints;
  for (auto v : numeric_hints) {
    if (auto s = format_for(spec, v)) candidates.push_back(*s);
  }
  if (spec.numeric_range) {
    for (auto v : {spec.numeric_range->hi, spec.numeric_range->lo}) {
      if (auto s = format_for(spec, v)) candidates.push_back(*s);
    }
  }
  if (spec.default_value) candidates.push_back(*spec.default_value);
  for (const auto& c : candidates) {
    if (!check_value(spec, c) && pred(c)) return c;
  }
  for (int i = 0; i < kValueDraws; ++i) {
    std::string c;
    try {
      c = generate_valid_value(spec, rng);
    } catch (const GenerationError&) {
      return std::nullopt;
    }
    if (pred(c)) return c;
  }
  return std::nullopt;
}

ConfigEntry entry_for(const SpecSet& specs, const std::string& name, std::string value) {
  ConfigEntry e{name, std::move(value), std::nullopt};
  if (const auto* s = specs.find(name); s != nullptr && !s->description.empty()) {
    e.description = s->description;
  }
  return e;
}

std::string plausible_value(const SpecSet& specs, const std::string& name, Rng& rng) {
  if (const auto* s = specs.find(name)) return generate_valid_value(*s, rng);
  return "value-" + hex_suffix(rng, 4);
}

const ParameterSpec& require_spec(const SpecSet& specs, const std::string& name) {
  const auto* s = specs.find(name);
  if (s == nullptr) throw GenerationError("no spec for parameter '" + name + "'");
  return *s;
}

bool others_hold(const SpecSet& specs, const ConfigFile& file, const DependencyConstraint* except) {
  for (const auto& d : specs.dependencies()) {
    if (except != nullptr && d == *except) continue;
    try {
      if (check_dependency(d, file, specs)) return false;
    } catch (const EvaluationError&) {
      return false;
    }
  }
  return true;
}

// Adjusts non-fixed operands until every dependency holds.
ConfigFile repair(ConfigFile file, std::set<std::string> fixed, const SpecSet& specs, Rng& rng) {
  for (int pass = 0; pass < kRepairPasses; ++pass) {
    bool changed = false;
    for (const auto& d : specs.dependencies()) {
      std::optional<Violation> v;
      try {
        v = check_dependency(d, file, specs);
      } catch (const EvaluationError& e) {
        throw GenerationError(std::string("cannot evaluate dependency: ") + e.what());
      }
      if (!v) continue;
      changed = true;
      const auto& version = file.version();
      if (d.kind == DependencyKind::Control) {
        if (fixed.count(d.p1) == 0) {
          const auto& s1 = require_spec(specs, d.p1);
          std::vector<std::string> hints{*d.value};
          auto fix = find_value(
              s1, hints, neighbours(*d.value, {'=', '+', '-'}),
              [&](const std::string& c) {
                return version_ok(specs, d.p1, version) && safe_compare(c, d.comparator, *d.value);
              },
              rng);
          if (!fix) throw GenerationError("cannot enable control parameter " + d.p1);
          file = file.with_entry(entry_for(specs, d.p1, *fix));
          fixed.insert(d.p1);
        } else if (fixed.count(d.p2) == 0) {
          file = file.without(d.p2);
        } else {
          throw GenerationError("control dependency " + d.p1 + " -> " + d.p2 + " cannot be satisfied");
        }
        continue;
      }
      auto v1 = effective_value(d.p1, file, specs);
      auto v2 = effective_value(d.p2, file, specs);
      std::optional<std::string> fix;
      std::string target;
      if (fixed.count(d.p1) == 0) {
        target = d.p1;
        std::vector<std::string> hints{*v2};
        fix = find_value(
            require_spec(specs, d.p1), hints, neighbours(*v2, {'=', '-', '+', '/', '*'}),
            [&](const std::string& c) {
              return version_ok(specs, d.p1, version) && safe_compare(c, d.comparator, *v2);
            },
            rng);
      } else if (fixed.count(d.p2) == 0) {
        target = d.p2;
        std::vector<std::string> hints{*v1};
        fix = find_value(
            require_spec(specs, d.p2), hints, neighbours(*v1, {'=', '+', '-', '*', '/'}),
            [&](const std::string& c) {
              return version_ok(specs, d.p2, version) && safe_compare(*v1, d.comparator, c);
            },
            rng);
      }
      if (!fix) throw GenerationError("cannot satisfy " + d.p1 + " " + std::string(symbol(d.comparator)) + " " + d.p2);
      file = file.with_entry(entry_for(specs, target, *fix));
      fixed.insert(target);
    }
    if (!changed) return file;
  }
  throw GenerationError("dependencies did not settle");
}

ConfigFile add_companions(ConfigFile file, const SpecSet& specs, Rng& rng, const GenerationOptions& options) {
  std::vector<const ParameterSpec*> pool;
  for (const auto& p : specs.parameters()) {
    if (file.contains(p.name) || specs.involved_in_dependency(p.name) || specs.has_version_record(p.name)) {
      continue;
    }
    pool.push_back(&p);
  }
  rng.shuffle(pool);
  auto entries = file.entries();
  for (const auto* p : pool) {
    if (entries.size() >= options.entries_per_file) break;
    entries.push_back(entry_for(specs, p->name, generate_valid_value(*p, rng)));
  }
  rng.shuffle(entries);
  return file.with_entries(std::move(entries));
}

const DependencyConstraint& pick_constraint(const SpecSet& specs, const std::string& parameter,
                                            Subcategory sub, Rng& rng) {
  const auto kind = sub == Subcategory::DependencyControl ? DependencyKind::Control
                                                          : DependencyKind::ValueRelationship;
  std::vector<const DependencyConstraint*> matches;
  for (const auto& d : specs.dependencies()) {
    if (d.kind == kind && d.flagged_parameter() == parameter) matches.push_back(&d);
  }
  if (matches.empty()) {
    throw GenerationError("'" + parameter + "' has no " + std::string(display_name(sub)) + " dependency");
  }
  return *matches[rng.below(matches.size())];
}

const VersionChange& pick_change(const SpecSet& specs, const std::string& parameter, Rng& rng) {
  std::vector<const VersionChange*> matches;
  for (const auto& c : specs.version_changes()) {
    if (c.removed_in_v2.count(parameter) != 0 || c.added_in_v2.count(parameter) != 0) matches.push_back(&c);
  }
  if (matches.empty()) throw GenerationError("'" + parameter + "' has no version record");
  return *matches[rng.below(matches.size())];
}

std::string first_valid_version(const SpecSet& specs, std::initializer_list<std::string_view> names) {
  for (const auto& v : specs.known_versions()) {
    bool ok = true;
    for (auto n : names) ok = ok && version_ok(specs, n, v);
    if (ok) return v;
  }
  throw GenerationError("no version in which all of the parameters exist");
}

}  // namespace

// ---------------------------------------------------------------------------

std::string generate_valid_value(const ParameterSpec& spec, Rng& rng) {
  if (spec.default_value && rng.chance(0.5)) return *spec.default_value;
  switch (spec.kind) {
    case ValueKind::Integer:
    case ValueKind::Long:
    case ValueKind::Port: {
      auto [lo, hi] = integer_bounds(spec);
      if (!spec.numeric_range) {
        // Everyday magnitudes rather than the whole type range.
        if (spec.kind == ValueKind::Port) {
          lo = 1024;
        } else {
          lo = 0;
          hi = spec.kind == ValueKind::Integer ? 100000 : 1000000000000LL;
        }
      }
      if (lo > hi) throw GenerationError("'" + spec.name + "' has an empty value range");
      return format_integer(rng.between(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
    }
    case ValueKind::Float: {
      long double lo = spec.numeric_range ? spec.numeric_range->lo : 0.0;
      long double hi = spec.numeric_range ? spec.numeric_range->hi : 1000.0;
      if (std::fabs(lo) > FLT_MAX || std::fabs(hi) > FLT_MAX) {
        lo = std::clamp<long double>(lo, -FLT_MAX, FLT_MAX);
        hi = std::clamp<long double>(hi, -FLT_MAX, FLT_MAX);
      }
      if (lo > hi) throw GenerationError("'" + spec.name + "' has an empty value range");
      // Three decimals keep values readable; fall back to the bound itself.
      auto klo = static_cast<std::int64_t>(std::ceil(lo * 1000));
      auto khi = static_cast<std::int64_t>(std::floor(hi * 1000));
      if (klo > khi) return format_decimal(lo);
      auto k = rng.between(klo, khi);
      std::string s = format_decimal(static_cast<long double>(k) / 1000);
      auto back = parse_number(s);
      if (!back || *back < lo || *back > hi) return format_decimal(lo);
      return s;
    }
    case ValueKind::Boolean:
      return rng.chance(0.5) ? "true" : "false";
    case ValueKind::String:
      return "value-" + hex_suffix(rng, 6);
    case ValueKind::Path:
      return random_path(rng);
    case ValueKind::Url: {
      static const std::vector<std::string> schemes = {"hdfs", "http", "https", "file"};
      const auto& scheme = rng.pick(schemes);
      if (scheme == "file") return "file://" + random_path(rng);
      return scheme + "://node" + std::to_string(rng.between(1, 32)) + ".example.com:" +
             std::to_string(rng.between(1024, 65535));
    }
    case ValueKind::IpAddress:
      return random_ip(rng);
    case ValueKind::Permission: {
      std::vector<std::string> ok;
      for (int v = 0; v < 512; ++v) {
        std::string s = std::to_string(v / 64) + std::to_string((v / 8) % 8) + std::to_string(v % 8);
        long double dec = std::stoi(s);
        if (spec.numeric_range && (dec < spec.numeric_range->lo || dec > spec.numeric_range->hi)) continue;
        ok.push_back(s);
      }
      if (ok.empty()) throw GenerationError("'" + spec.name + "' has an empty permission range");
      return rng.pick(ok);
    }
    case ValueKind::Enum:
      if (spec.options.empty()) throw GenerationError("'" + spec.name + "' has no enum options");
      return rng.pick(spec.options);
    case ValueKind::NumberWithUnit:
      if (spec.units.empty()) throw GenerationError("'" + spec.name + "' has no units");
      return std::to_string(rng.between(1, 1024)) + rng.pick(spec.units);
  }
  throw GenerationError("unsupported value kind");
}

std::string generate_invalid_value(const ParameterSpec& spec, Subcategory sub, Rng& rng) {
  auto assigned = assign_subcategories(spec);
  if (std::find(assigned.begin(), assigned.end(), sub) == assigned.end()) {
    throw GenerationError("sub-category " + std::string(slug(sub)) + " does not apply to '" + spec.name + "'");
  }
  switch (sub) {
    case Subcategory::SyntaxDataType: {
      switch (spec.kind) {
        case ValueKind::Integer:
        case ValueKind::Long: {
          static const std::vector<std::string> bad = {"12abc", "one", "1.5", "0x1F", "9 9"};
          return rng.pick(bad);
        }
        case ValueKind::Float: {
          static const std::vector<std::string> bad = {"1.2.3", "abc", "0.5f", "1,5"};
          return rng.pick(bad);
        }
        case ValueKind::Boolean: {
          static const std::vector<std::string> bad = {"1", "0", "-1", "t-r-u-e", "yes!"};
          return rng.pick(bad);
        }
        case ValueKind::NumberWithUnit: {
          std::string magnitude;
          if (spec.default_value) {
            const auto& d = *spec.default_value;
            auto end = d.find_first_not_of("0123456789");
            magnitude = d.substr(0, end);
          }
          if (magnitude.empty()) magnitude = std::to_string(rng.between(1, 1024));
          std::string unit = "nounit";
          while (std::any_of(spec.units.begin(), spec.units.end(),
                             [&](const std::string& u) { return lower(u) == unit; })) {
            unit += "x";
          }
          return magnitude + unit;
        }
        default: break;
      }
      break;
    }
    case Subcategory::SyntaxPath: {
      if (spec.default_value) {
        const auto& d = *spec.default_value;
        auto second = d.find('/', 1);
        if (d.size() > 1 && second != std::string::npos && second + 1 < d.size()) {
          return d.substr(0, second) + "/" + d.substr(second);
        }
      }
      return "/hello//world";
    }
    case Subcategory::SyntaxUrl: {
      if (spec.default_value) {
        const auto& d = *spec.default_value;
        if (auto colon = d.find("://"); colon != std::string::npos) return d.substr(0, colon) + d.substr(colon + 1);
      }
      return "file///";
    }
    case Subcategory::SyntaxIpAddress: {
      auto octets = split_octets(spec.default_value ? *spec.default_value : "127.0.0.1");
      if (octets.size() != 4) octets = {"127", "0", "0", "1"};
      return octets[0] + ".x" + octets[1] + "." + octets[2] + "." + octets[3];
    }
    case Subcategory::SyntaxPort: {
      static const std::vector<std::string> bad = {"80a", "http", "8o8o", "20 00", "-1"};
      return rng.pick(bad);
    }
    case Subcategory::SyntaxPermission: {
      static const std::vector<std::string> bad = {"rwxr-xr-x", "7a5", "u+rwx", "75"};
      return rng.pick(bad);
    }
    case Subcategory::RangeBasicNumeric: {
      if (spec.kind == ValueKind::Float) {
        if (spec.numeric_range) {
          const auto [lo, hi] = *spec.numeric_range;
          const double width = std::max(1.0, hi - lo);
          return rng.chance(0.5) ? format_decimal(hi + width) : format_decimal(lo - width);
        }
        return "3.5E38";
      }
      const bool is_long = spec.kind == ValueKind::Long;
      const std::string overflow = is_long ? "9223372036854775808" : "2147483648";
      if (!spec.numeric_range) return overflow;
      auto type_lo = is_long ? static_cast<long double>(std::numeric_limits<std::int64_t>::min())
                             : std::numeric_limits<std::int32_t>::min();
      auto type_hi = is_long ? static_cast<long double>(std::numeric_limits<std::int64_t>::max())
                             : std::numeric_limits<std::int32_t>::max();
      std::vector<std::string> options;
      const long double above = std::floor(static_cast<long double>(spec.numeric_range->hi)) + 1;
      const long double below = std::ceil(static_cast<long double>(spec.numeric_range->lo)) - 1;
      if (above <= type_hi) options.push_back(format_integer(above));
      if (below >= type_lo) options.push_back(format_integer(below));
      if (options.empty()) return overflow;
      return rng.pick(options);
    }
    case Subcategory::RangeBool: {
      static const std::vector<std::string> bad = {"yes", "no", "enabled", "ture", "on"};
      return rng.pick(bad);
    }
    case Subcategory::RangeEnum: {
      static const std::vector<std::string> bad = {"UNKNOWN", "none_of_these", "invalid-mode", "DEFAULTS"};
      for (std::size_t i = 0; i < bad.size(); ++i) {
        const auto& c = bad[(rng.below(bad.size()) + i) % bad.size()];
        if (std::find(spec.options.begin(), spec.options.end(), c) == spec.options.end()) return c;
      }
      return spec.options.front() + "_invalid";
    }
    case Subcategory::RangeIpAddress: {
      auto octets = split_octets(random_ip(rng));
      octets[rng.below(4)] = std::to_string(rng.between(256, 999));
      return octets[0] + "." + octets[1] + "." + octets[2] + "." + octets[3];
    }
    case Subcategory::RangePort: {
      std::vector<std::string> options{std::to_string(rng.between(65536, 99999))};
      if (spec.numeric_range) {
        if (spec.numeric_range->hi < 65535) options.push_back(format_integer(std::floor(spec.numeric_range->hi) + 1));
        if (spec.numeric_range->lo > 0) options.push_back(format_integer(std::ceil(spec.numeric_range->lo) - 1));
      }
      return rng.pick(options);
    }
    case Subcategory::RangePermission: {
      static const std::vector<std::string> bad = {"778", "800", "999", "1777", "787"};
      return rng.pick(bad);
    }
    case Subcategory::DependencyControl:
    case Subcategory::DependencyValueRelationship:
      throw GenerationError("dependency faults are injected at file level");
    case Subcategory::VersionParameterChange:
      return generate_valid_value(spec, rng);
  }
  throw GenerationError("no generation rule for " + std::string(slug(sub)) + " on " +
                        std::string(to_string(spec.kind)));
}

LabeledFile inject_dependency_misconfig(const DependencyConstraint& c, const ConfigFile& file,
                                        const SpecSet& specs, Rng& rng) {
  const auto& s1 = require_spec(specs, c.p1);
  const auto& s2 = require_spec(specs, c.p2);
  ConfigFile base = file;
  if (!version_ok(specs, c.p1, base.version()) || !version_ok(specs, c.p2, base.version())) {
    throw GenerationError("dependency operands do not exist in version " + base.version());
  }
  if (!base.contains(c.p2)) {
    auto v2 = effective_value(c.p2, base, specs);
    base = base.with_entry(entry_for(specs, c.p2, v2 ? *v2 : generate_valid_value(s2, rng)));
  }

  std::vector<std::string> hints;
  std::vector<long double> numeric;
  std::function<bool(const std::string&)> violates;
  if (c.kind == DependencyKind::ValueRelationship) {
    const std::string x = base.find(c.p2)->value;
    switch (c.comparator) {
      case Comparator::Le: numeric = neighbours(x, {'*', '+'}); break;
      case Comparator::Lt: numeric = neighbours(x, {'=', '*', '+'}); break;
      case Comparator::Ge: numeric = neighbours(x, {'/', '-'}); break;
      case Comparator::Gt: numeric = neighbours(x, {'=', '/', '-'}); break;
      case Comparator::Eq: numeric = neighbours(x, {'+', '-'}); break;
      case Comparator::Ne: hints.push_back(x); break;
    }
    violates = [&, x](const std::string& v) { return breaks_relation(v, c.comparator, x); };
  } else {
    const std::string& guard = *c.value;
    switch (c.comparator) {
      case Comparator::Eq: numeric = neighbours(guard, {'+', '-'}); break;
      case Comparator::Ne: hints.push_back(guard); break;
      case Comparator::Gt: numeric = neighbours(guard, {'=', '-'}); break;
      case Comparator::Ge: numeric = neighbours(guard, {'-'}); break;
      case Comparator::Lt: numeric = neighbours(guard, {'=', '+'}); break;
      case Comparator::Le: numeric = neighbours(guard, {'+'}); break;
    }
    if (lower(guard) == "true") hints.push_back("false");
    if (lower(guard) == "false") hints.push_back("true");
    violates = [&, guard](const std::string& v) { return breaks_relation(v, c.comparator, guard); };
  }

  ConfigFile result = base;
  auto chosen = find_value(
      s1, hints, numeric,
      [&](const std::string& v) {
        if (!violates(v)) return false;
        auto candidate = base.with_entry(entry_for(specs, c.p1, v));
        std::optional<Violation> hit;
        try {
          hit = check_dependency(c, candidate, specs);
        } catch (const EvaluationError&) {
          return false;
        }
        if (!hit || hit->parameter != c.flagged_parameter()) return false;
        if (!others_hold(specs, candidate, &c)) return false;
        result = std::move(candidate);
        return true;
      },
      rng);
  if (!chosen) {
    throw GenerationError("cannot violate " + c.p1 + " " + std::string(symbol(c.comparator)) + " " +
                          (c.value ? *c.value : c.p2) + " within the value domain");
  }
  const auto sub = c.kind == DependencyKind::Control ? Subcategory::DependencyControl
                                                     : Subcategory::DependencyValueRelationship;
  LabeledFile out;
  out.file = std::move(result);
  out.label = Label::Misconfig;
  out.injected = InjectedFault{c.flagged_parameter(), sub, dependency_reason(c)};
  out.origin = sub;
  return out;
}

// ---------------------------------------------------------------------------

LabeledFile make_misconfig_file(const SpecSet& specs, const std::string& parameter, Subcategory sub,
                                Rng& rng, const GenerationOptions& options) {
  LabeledFile out;
  out.label = Label::Misconfig;
  out.origin = sub;
  const auto cat = category_of(sub);
  if (cat == Category::Dependency) {
    const auto& c = pick_constraint(specs, parameter, sub, rng);
    const auto version = first_valid_version(specs, {c.p1, c.p2});
    ConfigFile base(specs.project(), version, ConfigFormat::Xml, {});
    base = base.with_entry(entry_for(specs, c.p1, generate_valid_value(require_spec(specs, c.p1), rng)));
    base = base.with_entry(entry_for(specs, c.p2, generate_valid_value(require_spec(specs, c.p2), rng)));
    base = repair(std::move(base), {}, specs, rng);
    out = inject_dependency_misconfig(c, base, specs, rng);
  } else if (cat == Category::Version) {
    const auto& change = pick_change(specs, parameter, rng);
    const auto& version = change.removed_in_v2.count(parameter) != 0 ? change.v2 : change.v1;
    ConfigFile file(specs.project(), version, ConfigFormat::Xml, {});
    out.file = file.with_entry(entry_for(specs, parameter, plausible_value(specs, parameter, rng)));
    out.injected = InjectedFault{parameter, sub,
                                 parameter + " does not exist in " + specs.project() + " version " + version};
  } else {
    const auto& spec = require_spec(specs, parameter);
    const auto version = first_valid_version(specs, {parameter});
    auto value = generate_invalid_value(spec, sub, rng);
    ConfigFile file(specs.project(), version, ConfigFormat::Xml, {});
    out.file = file.with_entry(entry_for(specs, parameter, value));
    out.injected = InjectedFault{parameter, sub, value_reason(spec, sub, value)};
  }
  out.file = add_companions(std::move(out.file), specs, rng, options);
  return out;
}

LabeledFile make_valid_file(const SpecSet& specs, const std::string& parameter, Subcategory sub,
                            Rng& rng, const GenerationOptions& options) {
  LabeledFile out;
  out.label = Label::ValidConfig;
  out.origin = sub;
  const auto cat = category_of(sub);
  ConfigFile file;
  if (cat == Category::Dependency) {
    const auto& c = pick_constraint(specs, parameter, sub, rng);
    file = ConfigFile(specs.project(), first_valid_version(specs, {c.p1, c.p2}), ConfigFormat::Xml, {});
    file = file.with_entry(entry_for(specs, c.p1, generate_valid_value(require_spec(specs, c.p1), rng)));
    file = file.with_entry(entry_for(specs, c.p2, generate_valid_value(require_spec(specs, c.p2), rng)));
    file = repair(std::move(file), {}, specs, rng);
    if (!file.contains(parameter)) throw GenerationError("repair dropped '" + parameter + "'");
  } else {
    std::string version;
    if (cat == Category::Version) {
      // The side of the change on which the parameter does exist.
      const auto& change = pick_change(specs, parameter, rng);
      version = change.removed_in_v2.count(parameter) != 0 ? change.v1 : change.v2;
      if (!version_ok(specs, parameter, version)) throw GenerationError("conflicting version records");
    } else {
      auto versions = valid_versions(specs, parameter);
      if (versions.empty()) throw GenerationError("'" + parameter + "' exists in no known version");
      version = versions.front();
    }
    file = ConfigFile(specs.project(), version, ConfigFormat::Xml, {});
    file = file.with_entry(entry_for(specs, parameter, plausible_value(specs, parameter, rng)));
    file = repair(std::move(file), {parameter}, specs, rng);
  }
  out.file = add_companions(std::move(file), specs, rng, options);
  return out;
}

std::vector<std::string> eligible_parameters(const SpecSet& specs, Subcategory sub) {
  std::vector<std::string> out;
  for (const auto& p : specs.parameters()) {
    auto subs = assign_subcategories(p);
    if (std::find(subs.begin(), subs.end(), sub) != subs.end()) out.push_back(p.name);
  }
  if (sub == Subcategory::VersionParameterChange) {
    for (auto& n : specs.version_only_parameters()) out.push_back(std::move(n));
  }
  return out;
}

DatasetSplit build_dataset(const SpecSet& specs, Rng& rng, const GenerationOptions& options) {
  DatasetSplit split;
  std::unordered_set<std::uint64_t> seen;
  const auto full_sample = options.sample_per_subcategory;

  auto produce = [&](Label label, Subcategory sub) {
    auto candidates = eligible_parameters(specs, sub);
    rng.shuffle(candidates);
    std::vector<LabeledFile> files;
    for (const auto& name : candidates) {
      if (files.size() >= full_sample) break;
      for (int attempt = 0; attempt < kUniquenessAttempts; ++attempt) {
        LabeledFile f;
        try {
          f = label == Label::Misconfig ? make_misconfig_file(specs, name, sub, rng, options)
                                        : make_valid_file(specs, name, sub, rng, options);
        } catch (const GenerationError&) {
          break;  // parameter unusable for this sub-category; sample another
        }
        if (seen.insert(fingerprint(f.file)).second) {
          files.push_back(std::move(f));
          break;
        }
      }
    }
    const std::string prefix = label == Label::Misconfig ? "misconfig-" : "valid-";
    const bool with_shot = full_sample > 0 && files.size() == full_sample;
    for (std::size_t i = 0; i < files.size(); ++i) {
      files[i].id = prefix + std::string(slug(sub)) + "-" + std::to_string(i);
      if (with_shot && i == 0) {
        split.shot_pool.push_back(std::move(files[i]));
      } else {
        split.eval_set.push_back(std::move(files[i]));
      }
    }
  };

  for (auto sub : kAllSubcategories) {
    produce(Label::Misconfig, sub);
    produce(Label::ValidConfig, sub);
  }
  return split;
}

}  // namespace cfgval
