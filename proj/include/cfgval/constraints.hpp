#pragma once

// Machine-readable parameter specifications and the rule-based oracle that
// decides ground-truth validity of a configuration file.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cfgval/config_model.hpp"

namespace cfgval {

enum class Category { Syntax, Range, Dependency, Version };

/// The fifteen misconfiguration sub-categories, in table order.
enum class Subcategory {
  SyntaxDataType,
  SyntaxPath,
  SyntaxUrl,
  SyntaxIpAddress,
  SyntaxPort,
  SyntaxPermission,
  RangeBasicNumeric,
  RangeBool,
  RangeEnum,
  RangeIpAddress,
  RangePort,
  RangePermission,
  DependencyControl,
  DependencyValueRelationship,
  VersionParameterChange,
};

inline constexpr std::array<Subcategory, 15> kAllSubcategories = {
    Subcategory::SyntaxDataType,     Subcategory::SyntaxPath,
    Subcategory::SyntaxUrl,          Subcategory::SyntaxIpAddress,
    Subcategory::SyntaxPort,         Subcategory::SyntaxPermission,
    Subcategory::RangeBasicNumeric,  Subcategory::RangeBool,
    Subcategory::RangeEnum,          Subcategory::RangeIpAddress,
    Subcategory::RangePort,          Subcategory::RangePermission,
    Subcategory::DependencyControl,  Subcategory::DependencyValueRelationship,
    Subcategory::VersionParameterChange,
};

Category category_of(Subcategory s);
std::string_view to_string(Category c);
/// Human label, e.g. "IP Address".
std::string_view display_name(Subcategory s);
/// Stable identifier used in paths and JSON, e.g. "range-ip-address".
std::string_view slug(Subcategory s);
Subcategory subcategory_from_slug(std::string_view s);

enum class ValueKind {
  Integer,
  Float,
  Long,
  Boolean,
  String,
  Path,
  Url,
  IpAddress,
  Port,
  Permission,
  Enum,
  NumberWithUnit,
};

std::string_view to_string(ValueKind k);
ValueKind value_kind_from_string(std::string_view s);

enum class Comparator { Gt, Ge, Eq, Ne, Lt, Le };

Comparator negate(Comparator c);
std::string_view symbol(Comparator c);
/// Accepts ASCII (">=", "!=") and Unicode ("≥", "≠") spellings.
Comparator comparator_from_string(std::string_view s);

enum class DependencyKind { Control, ValueRelationship };

/// Control: `p2` may only be set while `p1 <cmp> value` holds.
/// ValueRelationship: the values of `p1` and `p2` must satisfy `p1 <cmp> p2`.
struct DependencyConstraint {
  DependencyKind kind = DependencyKind::ValueRelationship;
  std::string p1;
  std::string p2;
  Comparator comparator = Comparator::Le;
  std::optional<std::string> value;

  /// The parameter a violation of this constraint is reported on.
  const std::string& flagged_parameter() const {
    return kind == DependencyKind::Control ? p2 : p1;
  }
  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;

  friend bool operator==(const DependencyConstraint&, const DependencyConstraint&) = default;
};

struct VersionChange {
  std::string v1;
  std::string v2;
  std::set<std::string> removed_in_v2;
  std::set<std::string> added_in_v2;

  void validate() const;

  friend bool operator==(const VersionChange&, const VersionChange&) = default;
};

struct NumericRange {
  double lo = 0;
  double hi = 0;
  friend bool operator==(const NumericRange&, const NumericRange&) = default;
};

struct ParameterSpec {
  std::string name;
  std::string project;
  ValueKind kind = ValueKind::String;
  std::optional<NumericRange> numeric_range;
  std::optional<std::string> default_value;
  std::vector<std::string> options;  // Enum
  std::vector<std::string> units;    // NumberWithUnit
  std::string description;
  /// Constraints whose violation is reported on this parameter.
  std::vector<DependencyConstraint> dependencies;
  /// Version records listing this parameter as removed or added.
  std::vector<VersionChange> version_changes;

  void validate() const;
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands that cannot be compared (e.g. ordering on non-numbers).
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entry names that have neither a spec nor a version record.
class UnknownParameterError : public std::runtime_error {
 public:
  explicit UnknownParameterError(const std::string& name)
      : std::runtime_error("unknown parameter '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// All specifications of one project. Immutable after construction.
class SpecSet {
 public:
  SpecSet() = default;
  /// Validates every spec, constraint and version record, and attaches
  /// constraints and version records to the specs they concern. Throws
  /// SpecError on any inconsistency (including invalid defaults).
  SpecSet(std::string project, std::string current_version,
          std::vector<ParameterSpec> parameters,
          std::vector<DependencyConstraint> dependencies,
          std::vector<VersionChange> version_changes);

  const std::string& project() const { return project_; }
  /// Version that generated files target unless a parameter's history
  /// forces another one.
  const std::string& current_version() const { return current_version_; }
  const std::vector<ParameterSpec>& parameters() const { return parameters_; }
  const std::vector<DependencyConstraint>& dependencies() const { return dependencies_; }
  const std::vector<VersionChange>& version_changes() const { return version_changes_; }

  const ParameterSpec* find(std::string_view name) const;
  bool has_version_record(std::string_view name) const;
  /// Names that appear only in version records.
  std::vector<std::string> version_only_parameters() const;
  /// Every version string mentioned by the set, current version first.
  std::vector<std::string> known_versions() const;
  bool involved_in_dependency(std::string_view name) const;

 private:
  std::string project_;
  std::string current_version_;
  std::vector<ParameterSpec> parameters_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<DependencyConstraint> dependencies_;
  std::vector<VersionChange> version_changes_;
};

struct Violation {
  Category category = Category::Syntax;
  Subcategory subcategory = Subcategory::SyntaxDataType;
  std::string parameter;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Every sub-category whose specification the parameter satisfies, in
/// table order.
std::vector<Subcategory> assign_subcategories(const ParameterSpec& spec);

/// Syntax then range check of one raw value; at most one violation.
std::optional<Violation> check_value(const ParameterSpec& spec, std::string_view value);

/// Version check for one parameter name used in a file of `version`.
std::optional<Violation> check_version(std::string_view name, std::string_view version,
                                       const std::vector<VersionChange>& changes);

/// Compares two raw values. Numbers compare numerically; `=`/`!=` fall back
/// to string comparison (booleans case-insensitively). Throws
/// EvaluationError for ordering comparators on non-numeric operands.
bool compare_values(std::string_view lhs, Comparator cmp, std::string_view rhs);

/// Configured value of `name` in `file`, else its spec default.
std::optional<std::string> effective_value(std::string_view name, const ConfigFile& file,
                                           const SpecSet& specs);

std::optional<Violation> check_dependency(const DependencyConstraint& c, const ConfigFile& file,
                                          const SpecSet& specs);

/// Ground-truth validation. Entry-level checks run first (version, then
/// syntax, then range); dependency constraints are evaluated only when both
/// operands are individually valid. Throws UnknownParameterError.
std::vector<Violation> oracle_validate(const ConfigFile& file, const SpecSet& specs,
                                       const std::vector<VersionChange>& version_changes);
inline std::vector<Violation> oracle_validate(const ConfigFile& file, const SpecSet& specs) {
  return oracle_validate(file, specs, specs.version_changes());
}

}  // namespace cfgval
