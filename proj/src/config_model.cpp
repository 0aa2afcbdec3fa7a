#include "cfgval/config_model.hpp"

#include <algorithm>
#include <cstring>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cfgval/rng.hpp"

namespace cfgval {

std::string_view to_string(ConfigFormat f) {
  return f == ConfigFormat::Xml ? "xml" : "ini";
}

ConfigFormat format_from_string(std::string_view s) {
  if (s == "xml" || s == "XML") return ConfigFormat::Xml;
  if (s == "ini" || s == "INI") return ConfigFormat::Ini;
  throw std::invalid_argument("unknown config format '" + std::string(s) + "'");
}

ConfigFormat format_from_path(std::string_view path) {
  auto dot = path.rfind('.');
  if (dot == std::string_view::npos) {
    throw std::invalid_argument("cannot infer config format of '" + std::string(path) + "'");
  }
  std::string ext(path.substr(dot + 1));
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == "xml") return ConfigFormat::Xml;
  if (ext == "ini" || ext == "cfg" || ext == "conf" || ext == "properties") return ConfigFormat::Ini;
  throw std::invalid_argument("cannot infer config format of '" + std::string(path) + "'");
}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(line == 0 ? what
                                   : what + " at line " + std::to_string(line) + ", column " +
                                         std::to_string(column)),
      line_(line),
      column_(column) {}

namespace {

std::string entry_problem(const std::vector<ConfigEntry>& entries) {
  std::set<std::string_view> seen;
  for (const auto& e : entries) {
    if (e.name.empty()) return "empty parameter name";
    if (e.name.find_first_of("\r\n") != std::string::npos) {
      return "parameter name '" + e.name + "' contains a line break";
    }
    if (!seen.insert(e.name).second) return "duplicate parameter '" + e.name + "'";
  }
  return {};
}

}  // namespace

ConfigFile::ConfigFile(std::string project, std::string version, ConfigFormat format,
                       std::vector<ConfigEntry> entries)
    : project_(std::move(project)),
      version_(std::move(version)),
      format_(format),
      entries_(std::move(entries)) {
  if (project_.empty()) throw std::invalid_argument("config file requires a project");
  if (version_.empty()) throw std::invalid_argument("config file requires a version");
  if (auto problem = entry_problem(entries_); !problem.empty()) {
    throw std::invalid_argument(problem);
  }
}

const ConfigEntry* ConfigFile::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

ConfigFile ConfigFile::with_format(ConfigFormat f) const {
  ConfigFile copy = *this;
  copy.format_ = f;
  return copy;
}

ConfigFile ConfigFile::with_version(std::string version) const {
  return ConfigFile(project_, std::move(version), format_, entries_);
}

ConfigFile ConfigFile::with_value(std::string_view name, std::string value) const {
  ConfigFile copy = *this;
  for (auto& e : copy.entries_) {
    if (e.name == name) {
      e.value = std::move(value);
      return copy;
    }
  }
  copy.entries_.push_back({std::string(name), std::move(value), std::nullopt});
  return copy;
}

ConfigFile ConfigFile::with_entry(ConfigEntry entry) const {
  ConfigFile copy = *this;
  for (auto& e : copy.entries_) {
    if (e.name == entry.name) {
      e = std::move(entry);
      return copy;
    }
  }
  if (entry.name.empty() || entry.name.find_first_of("\r\n") != std::string::npos) {
    throw std::invalid_argument("invalid parameter name");
  }
  copy.entries_.push_back(std::move(entry));
  return copy;
}

ConfigFile ConfigFile::without(std::string_view name) const {
  ConfigFile copy = *this;
  std::erase_if(copy.entries_, [&](const ConfigEntry& e) { return e.name == name; });
  return copy;
}

ConfigFile ConfigFile::with_entries(std::vector<ConfigEntry> entries) const {
  return ConfigFile(project_, version_, format_, std::move(entries));
}

bool ConfigFile::same_content(const ConfigFile& other) const {
  return project_ == other.project_ && version_ == other.version_ && entries_ == other.entries_;
}

std::uint64_t fingerprint(const ConfigFile& file) {
  // Field separators are bytes that cannot start a UTF-8 sequence.
  std::uint64_t h = fnv1a(file.project());
  h = fnv1a("\xff", h);
  h = fnv1a(file.version(), h);
  for (const auto& e : file.entries()) {
    h = fnv1a("\xfe", h);
    h = fnv1a(e.name, h);
    h = fnv1a("\xfd", h);
    h = fnv1a(e.value, h);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Shared text helpers

namespace {

struct Position {
  std::size_t line;
  std::size_t column;
};

Position position_of(std::string_view text, std::size_t offset) {
  Position p{1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      ++p.column;
    }
  }
  return p;
}

[[noreturn]] void fail_at(std::string_view text, std::size_t offset, const std::string& msg) {
  auto p = position_of(text, offset);
  throw ParseError(msg, p.line, p.column);
}

// Returns the offset of the first invalid UTF-8 byte, or npos.
std::size_t invalid_utf8_offset(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range scalars.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return i;
    }
    i += len;
  }
  return std::string_view::npos;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------
// Minimal XML reader for the Hadoop configuration dialect.

struct XmlElement {
  std::string name;
  std::size_t offset = 0;
  std::string text;  // concatenated character data of direct children
  std::vector<XmlElement> children;
};

class XmlReader {
 public:
  explicit XmlReader(std::string_view text) : text_(text) {}

  // Returns the document element, or nullopt for a document with none.
  std::optional<XmlElement> read_document() {
    std::optional<XmlElement> root;
    while (true) {
      skip_whitespace();
      if (at_end()) break;
      if (!starts_with("<")) fail("unexpected character data outside the document element");
      if (starts_with("<?")) {
        skip_past("?>", "unterminated processing instruction");
      } else if (starts_with("<!--")) {
        skip_comment();
      } else if (starts_with("<!DOCTYPE")) {
        skip_past(">", "unterminated DOCTYPE");
      } else if (starts_with("</")) {
        fail("unbalanced closing tag");
      } else {
        if (root) fail("more than one document element");
        root = read_element();
      }
    }
    return root;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(text_, pos_, msg); }

  void skip_whitespace() {
    while (!at_end() && std::strchr(" \t\r\n", text_[pos_]) != nullptr) ++pos_;
  }

  void skip_past(std::string_view terminator, const char* msg) {
    auto end = text_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(msg);
    pos_ = end + terminator.size();
  }

  void skip_comment() {
    pos_ += 4;
    skip_past("-->", "unterminated comment");
  }

  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':' || (static_cast<unsigned char>(c) & 0x80);
  }

  std::string read_name() {
    auto start = pos_;
    while (!at_end() && is_name_char(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected a tag name");
    return std::string(text_.substr(start, pos_ - start));
  }

  void read_attributes() {
    while (true) {
      skip_whitespace();
      if (at_end()) fail("unterminated start tag");
      if (starts_with("/>") || starts_with(">")) return;
      read_name();
      skip_whitespace();
      if (at_end() || text_[pos_] != '=') fail("expected '=' after attribute name");
      ++pos_;
      skip_whitespace();
      if (at_end() || (text_[pos_] != '"' && text_[pos_] != '\'')) fail("expected quoted attribute value");
      char quote = text_[pos_++];
      auto end = text_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      pos_ = end + 1;
    }
  }

  void read_reference(std::string& out) {
    auto semi = text_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 12) fail("malformed entity reference");
    auto ref = text_.substr(pos_ + 1, semi - pos_ - 1);
    if (ref == "lt") {
      out += '<';
    } else if (ref == "gt") {
      out += '>';
    } else if (ref == "amp") {
      out += '&';
    } else if (ref == "quot") {
      out += '"';
    } else if (ref == "apos") {
      out += '\'';
    } else if (ref.size() > 1 && ref[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ref[1] == 'x' || ref[1] == 'X';
      auto digits = ref.substr(hex ? 2 : 1);
      if (digits.empty()) fail("malformed character reference");
      for (char c : digits) {
        int d;
        if (c >= '0' && c <= '9') {
          d = c - '0';
        } else if (hex && c >= 'a' && c <= 'f') {
          d = c - 'a' + 10;
        } else if (hex && c >= 'A' && c <= 'F') {
          d = c - 'A' + 10;
        } else {
          fail("malformed character reference");
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
        if (cp > 0x10FFFF) fail("character reference out of range");
      }
      if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid character reference");
      append_utf8(out, cp);
    } else {
      fail("unknown entity '&" + std::string(ref) + ";'");
    }
    pos_ = semi + 1;
  }

  XmlElement read_element() {
    XmlElement el;
    el.offset = pos_;
    ++pos_;  // '<'
    el.name = read_name();
    read_attributes();
    if (starts_with("/>")) {
      pos_ += 2;
      return el;
    }
    ++pos_;  // '>'
    while (true) {
      if (at_end()) fail_at(text_, el.offset, "unclosed element <" + el.name + ">");
      char c = text_[pos_];
      if (c == '<') {
        if (starts_with("</")) {
          pos_ += 2;
          auto close_at = pos_;
          auto name = read_name();
          skip_whitespace();
          if (at_end() || text_[pos_] != '>') fail("malformed closing tag");
          ++pos_;
          if (name != el.name) {
            fail_at(text_, close_at,
                    "mismatched closing tag </" + name + "> for <" + el.name + ">");
          }
          return el;
        } else if (starts_with("<!--")) {
          skip_comment();
        } else if (starts_with("<![CDATA[")) {
          pos_ += 9;
          auto end = text_.find("]]>", pos_);
          if (end == std::string_view::npos) fail("unterminated CDATA section");
          el.text.append(text_.substr(pos_, end - pos_));
          pos_ = end + 3;
        } else if (starts_with("<?")) {
          skip_past("?>", "unterminated processing instruction");
        } else {
          el.children.push_back(read_element());
        }
      } else if (c == '&') {
        read_reference(el.text);
      } else {
        el.text += c;
        ++pos_;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

ConfigFile parse_xml(std::string_view text, std::string project, std::string version) {
  XmlReader reader(text);
  auto root = reader.read_document();
  std::vector<ConfigEntry> entries;
  if (root) {
    if (root->name != "configuration") {
      fail_at(text, root->offset, "document element must be <configuration>, found <" + root->name + ">");
    }
    std::set<std::string> seen;
    for (const auto& prop : root->children) {
      if (prop.name != "property") {
        fail_at(text, prop.offset, "unexpected element <" + prop.name + "> in <configuration>");
      }
      std::optional<std::string> name;
      std::string value;
      std::optional<std::string> description;
      for (const auto& child : prop.children) {
        if (child.name == "name") {
          name = std::string(trim(child.text));
        } else if (child.name == "value") {
          value = child.text;
        } else if (child.name == "description") {
          description = child.text;
        }
        // <final>, <source> and other Hadoop annotations carry no value.
      }
      if (!name || name->empty()) fail_at(text, prop.offset, "property with empty parameter name");
      if (name->find_first_of("\r\n") != std::string::npos) {
        fail_at(text, prop.offset, "parameter name contains a line break");
      }
      if (!seen.insert(*name).second) fail_at(text, prop.offset, "duplicate parameter '" + *name + "'");
      entries.push_back({std::move(*name), std::move(value), std::move(description)});
    }
  }
  return ConfigFile(std::move(project), std::move(version), ConfigFormat::Xml, std::move(entries));
}

void xml_escape_into(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
}

std::string render_xml(const ConfigFile& file) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<configuration>\n";
  for (const auto& e : file.entries()) {
    out += "  <property>\n    <name>";
    xml_escape_into(out, e.name);
    out += "</name>\n    <value>";
    xml_escape_into(out, e.value);
    out += "</value>\n";
    if (e.description) {
      out += "    <description>";
      xml_escape_into(out, *e.description);
      out += "</description>\n";
    }
    out += "  </property>\n";
  }
  out += "</configuration>\n";
  return out;
}

// ---------------------------------------------------------------------------
// INI: `name=value` lines, `# ` comment lines above an entry form its
// description. Backslash escapes keep arbitrary strings on one line.

std::string ini_escape(std::string_view s, bool is_key) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '=':
        if (is_key) {
          out += "\\=";
        } else {
          out += c;
        }
        break;
      case ' ':
        // Leading blanks would be trimmed by the reader; keys trim trailing ones too.
        if (i == 0 || (is_key && i + 1 == s.size())) {
          out += "\\ ";
        } else {
          out += c;
        }
        break;
      case '#':
      case ';':
      case '[':
        if (is_key && i == 0) out += '\\';
        out += c;
        break;
      default: out += c;
    }
  }
  return out;
}

std::string ini_unescape(std::string_view s, std::string_view full, std::size_t offset) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (i + 1 >= s.size()) fail_at(full, offset + i, "dangling escape");
    char n = s[++i];
    switch (n) {
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 't': out += '\t'; break;
      case '\\':
      case '=':
      case ' ':
      case '#':
      case ';':
      case '[': out += n; break;
      default: fail_at(full, offset + i - 1, std::string("unknown escape '\\") + n + "'");
    }
  }
  return out;
}

// Index of the first '=' not preceded by an escaping backslash.
std::size_t find_separator(std::string_view line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\') {
      ++i;
    } else if (line[i] == '=') {
      return i;
    }
  }
  return std::string_view::npos;
}

ConfigFile parse_ini(std::string_view text, std::string project, std::string version) {
  std::vector<ConfigEntry> entries;
  std::set<std::string> seen;
  std::optional<std::string> pending_description;
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    auto nl = text.find('\n', line_start);
    auto line_end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(line_start, line_end - line_start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto offset = line_start;
    line_start = line_end + 1;

    auto lead = line.find_first_not_of(" \t");
    if (lead == std::string_view::npos) {
      pending_description.reset();
      continue;
    }
    if (line[lead] == '#' || line[lead] == ';') {
      auto body = line.substr(lead + 1);
      if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      auto piece = ini_unescape(body, text, offset + (body.data() - line.data()));
      if (pending_description) {
        *pending_description += '\n';
        *pending_description += piece;
      } else {
        pending_description = std::move(piece);
      }
      continue;
    }
    if (line[lead] == '[') fail_at(text, offset + lead, "INI sections are not supported");
    auto sep = find_separator(line);
    if (sep == std::string_view::npos) fail_at(text, offset + lead, "expected 'name=value'");

    auto raw_key = line.substr(lead, sep - lead);
    // Trailing blanks of the key are insignificant unless escaped.
    while (!raw_key.empty() && (raw_key.back() == ' ' || raw_key.back() == '\t') &&
           !(raw_key.size() >= 2 && raw_key[raw_key.size() - 2] == '\\')) {
      raw_key.remove_suffix(1);
    }
    auto name = ini_unescape(raw_key, text, offset + lead);
    if (name.empty()) fail_at(text, offset + lead, "empty parameter name");
    if (!seen.insert(name).second) fail_at(text, offset + lead, "duplicate parameter '" + name + "'");

    auto raw_value = line.substr(sep + 1);
    while (!raw_value.empty() && (raw_value.front() == ' ' || raw_value.front() == '\t')) {
      raw_value.remove_prefix(1);
    }
    auto value = ini_unescape(raw_value, text, offset + (raw_value.data() - line.data()));
    entries.push_back({std::move(name), std::move(value), std::move(pending_description)});
    pending_description.reset();
  }
  return ConfigFile(std::move(project), std::move(version), ConfigFormat::Ini, std::move(entries));
}

std::string render_ini(const ConfigFile& file) {
  std::string out;
  for (const auto& e : file.entries()) {
    if (e.description) {
      std::string_view d = *e.description;
      while (true) {
        auto nl = d.find('\n');
        out += "# ";
        out += ini_escape(d.substr(0, nl), false);
        out += '\n';
        if (nl == std::string_view::npos) break;
        d.remove_prefix(nl + 1);
      }
    }
    out += ini_escape(e.name, true);
    out += '=';
    out += ini_escape(e.value, false);
    out += '\n';
  }
  return out;
}

}  // namespace

ConfigFile parse_config(std::string_view text, ConfigFormat format, std::string project,
                        std::string version) {
  if (auto bad = invalid_utf8_offset(text); bad != std::string_view::npos) {
    fail_at(text, bad, "invalid UTF-8 byte sequence");
  }
  if (project.empty()) throw ParseError("project identifier is required", 0, 0);
  if (version.empty()) throw ParseError("version is required", 0, 0);
  return format == ConfigFormat::Xml ? parse_xml(text, std::move(project), std::move(version))
                                     : parse_ini(text, std::move(project), std::move(version));
}

std::string render_config(const ConfigFile& file, ConfigFormat format) {
  return format == ConfigFormat::Xml ? render_xml(file) : render_ini(file);
}

ConfigFile compress(const ConfigFile& file) { return file.with_format(ConfigFormat::Ini); }

ConfigFile diff_to_snippet(const ConfigDiff& diff, std::string project, std::string version) {
  if (diff.changed.empty() && diff.removed.empty()) {
    throw std::invalid_argument("empty configuration diff");
  }
  for (const auto& name : diff.removed) {
    for (const auto& e : diff.changed) {
      if (e.name == name) {
        throw std::invalid_argument("parameter '" + name + "' is both changed and removed");
      }
    }
  }
  if (diff.base) {
    if (project.empty()) project = diff.base->project();
    if (version.empty()) version = diff.base->version();
  }
  std::vector<ConfigEntry> entries;
  entries.reserve(diff.changed.size());
  for (const auto& e : diff.changed) {
    ConfigEntry copy = e;
    if (!copy.description && diff.base) {
      if (const auto* prior = diff.base->find(e.name); prior != nullptr) {
        copy.description = prior->description;
      }
    }
    entries.push_back(std::move(copy));
  }
  auto format = diff.base ? diff.base->format() : ConfigFormat::Xml;
  return ConfigFile(std::move(project), std::move(version), format, std::move(entries));
}

}  // namespace cfgval
