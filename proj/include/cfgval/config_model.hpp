#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfgval {

enum class ConfigFormat { Xml, Ini };

std::string_view to_string(ConfigFormat f);
ConfigFormat format_from_string(std::string_view s);
/// Picks the format from a file extension (".xml" / ".ini", ".cfg", ".conf",
/// ".properties"); throws std::invalid_argument otherwise.
ConfigFormat format_from_path(std::string_view path);

struct ConfigEntry {
  std::string name;
  std::string value;
  std::optional<std::string> description;

  friend bool operator==(const ConfigEntry&, const ConfigEntry&) = default;
};

/// Thrown by parse_config. `line`/`column` are 1-based; 0 means "unknown".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// An ordered, name-unique list of parameter settings for one project version.
class ConfigFile {
 public:
  ConfigFile() = default;
  /// Validates the entry invariants (non-empty single-line unique names);
  /// throws std::invalid_argument on violation.
  ConfigFile(std::string project, std::string version, ConfigFormat format,
             std::vector<ConfigEntry> entries);

  const std::string& project() const { return project_; }
  const std::string& version() const { return version_; }
  ConfigFormat format() const { return format_; }
  const std::vector<ConfigEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  const ConfigEntry* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  ConfigFile with_format(ConfigFormat f) const;
  ConfigFile with_version(std::string version) const;
  /// Replaces the value of an existing entry or appends a new one.
  ConfigFile with_value(std::string_view name, std::string value) const;
  ConfigFile with_entry(ConfigEntry entry) const;
  ConfigFile without(std::string_view name) const;
  ConfigFile with_entries(std::vector<ConfigEntry> entries) const;

  /// Same project, version and entries; format is ignored.
  bool same_content(const ConfigFile& other) const;

  friend bool operator==(const ConfigFile&, const ConfigFile&) = default;

 private:
  std::string project_;
  std::string version_;
  ConfigFormat format_ = ConfigFormat::Xml;
  std::vector<ConfigEntry> entries_;
};

/// Format-independent identity of a file: project, version, names and values.
std::uint64_t fingerprint(const ConfigFile& file);

struct ConfigDiff {
  std::optional<ConfigFile> base;
  std::vector<ConfigEntry> changed;
  std::vector<std::string> removed;
};

ConfigFile parse_config(std::string_view text, ConfigFormat format,
                        std::string project, std::string version);

std::string render_config(const ConfigFile& file, ConfigFormat format);
inline std::string render_config(const ConfigFile& file) {
  return render_config(file, file.format());
}

/// Re-expresses the file in the compact INI form.
ConfigFile compress(const ConfigFile& file);

/// Snippet holding only the changed entries of a diff. Descriptions missing
/// on a changed entry are inherited from the base file. Throws
/// std::invalid_argument on an empty diff or when changed/removed overlap.
ConfigFile diff_to_snippet(const ConfigDiff& diff, std::string project = {},
                           std::string version = {});

}  // namespace cfgval
