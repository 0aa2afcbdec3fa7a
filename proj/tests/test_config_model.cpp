#include <string>

#include "cfgval/config_model.hpp"
#include "cfgval/tokens.hpp"
#include "cfgval/rng.hpp"
#include "doctest.h"

using namespace cfgval;

namespace {

const char* kHadoopXml = R"(<?xml version="1.0"?>
<?xml-stylesheet type="text/xsl" href="configuration.xsl"?>
<!-- site overrides -->
<configuration>
  <property>
    <name>fs.defaultFS</name>
    <value>hdfs://nn1:8020</value>
    <description>The name of the default file system.</description>
  </property>
  <property>
    <name> io.file.buffer.size </name>
    <value>4096</value>
    <final>true</final>
  </property>
  <property>
    <name>hadoop.tmp.dir</name>
    <value>/tmp/hadoop-&amp;-&lt;user&gt;</value>
  </property>
</configuration>
)";

std::string random_text(Rng& rng, std::size_t max_len, bool allow_breaks) {
  static const std::vector<std::string> pieces = {
      "a", "b", "z", "0", "7", ".", "-", "_", "/", ":", "=", "#", ";", "[", "]", " ", "\\",
      "&", "<", ">", "\"", "'", "\t", "é", "日本", "\\n", "]]>", "&amp;"};
  std::string out;
  auto len = rng.below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    if (allow_breaks && rng.chance(0.05)) {
      out += rng.chance(0.5) ? "\n" : "\r";
    } else {
      out += rng.pick(pieces);
    }
  }
  return out;
}

std::string random_name(Rng& rng, int index) {
  // Leading/trailing blanks are not significant in XML names.
  std::string core = random_text(rng, 6, false);
  return "p" + std::to_string(index) + core + "x";
}

ConfigFile random_file(Rng& rng) {
  std::vector<ConfigEntry> entries;
  auto n = rng.below(7);
  for (std::size_t i = 0; i < n; ++i) {
    ConfigEntry e{random_name(rng, static_cast<int>(i)), random_text(rng, 12, true), std::nullopt};
    if (rng.chance(0.5)) e.description = random_text(rng, 20, true);
    entries.push_back(std::move(e));
  }
  return ConfigFile("proj", "1.0", ConfigFormat::Xml, std::move(entries));
}

}  // namespace

TEST_CASE("parse hadoop-style XML") {
  auto f = parse_config(kHadoopXml, ConfigFormat::Xml, "hcommon", "3.3.6");
  REQUIRE(f.size() == 3);
  CHECK(f.entries()[0].name == "fs.defaultFS");
  CHECK(f.entries()[0].value == "hdfs://nn1:8020");
  CHECK(f.entries()[0].description == "The name of the default file system.");
  CHECK(f.entries()[1].name == "io.file.buffer.size");
  CHECK(f.entries()[1].value == "4096");
  CHECK_FALSE(f.entries()[1].description.has_value());
  CHECK(f.entries()[2].value == "/tmp/hadoop-&-<user>");
  CHECK(f.project() == "hcommon");
  CHECK(f.version() == "3.3.6");
}

TEST_CASE("single property parses to one entry") {
  auto f = parse_config("<configuration><property><name>p</name><value>8020</value></property></configuration>",
                        ConfigFormat::Xml, "x", "1");
  REQUIRE(f.size() == 1);
  CHECK(f.entries()[0] == ConfigEntry{"p", "8020", std::nullopt});
}

TEST_CASE("empty documents have no entries") {
  CHECK(parse_config("", ConfigFormat::Xml, "x", "1").size() == 0);
  CHECK(parse_config("  \n", ConfigFormat::Xml, "x", "1").size() == 0);
  CHECK(parse_config("<configuration/>", ConfigFormat::Xml, "x", "1").size() == 0);
  CHECK(parse_config("", ConfigFormat::Ini, "x", "1").size() == 0);
  CHECK(parse_config("# just a comment\n\n", ConfigFormat::Ini, "x", "1").size() == 0);
}

TEST_CASE("XML errors name the offending location") {
  SUBCASE("duplicate names") {
    const char* doc =
        "<configuration>\n"
        "<property><name>p</name><value>1</value></property>\n"
        "<property><name>p</name><value>2</value></property>\n"
        "</configuration>";
    try {
      parse_config(doc, ConfigFormat::Xml, "x", "1");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("duplicate parameter 'p'") != std::string::npos);
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("unbalanced markup") {
    CHECK_THROWS_AS(parse_config("<configuration><property><name>p</name>", ConfigFormat::Xml, "x", "1"),
                    ParseError);
    CHECK_THROWS_AS(parse_config("<configuration><property></configuration>", ConfigFormat::Xml, "x", "1"),
                    ParseError);
    CHECK_THROWS_AS(parse_config("</configuration>", ConfigFormat::Xml, "x", "1"), ParseError);
  }
  SUBCASE("empty name") {
    CHECK_THROWS_AS(parse_config("<configuration><property><name> </name><value>1</value></property>"
                                 "</configuration>",
                                 ConfigFormat::Xml, "x", "1"),
                    ParseError);
    CHECK_THROWS_AS(parse_config("<configuration><property><value>1</value></property></configuration>",
                                 ConfigFormat::Xml, "x", "1"),
                    ParseError);
  }
  SUBCASE("wrong root and unknown entity") {
    CHECK_THROWS_AS(parse_config("<conf/>", ConfigFormat::Xml, "x", "1"), ParseError);
    CHECK_THROWS_AS(parse_config("<configuration><property><name>a&nbsp;</name></property></configuration>",
                                 ConfigFormat::Xml, "x", "1"),
                    ParseError);
  }
  SUBCASE("invalid UTF-8") {
    std::string doc = "<configuration>\n<property><name>p\xff</name></property></configuration>";
    try {
      parse_config(doc, ConfigFormat::Xml, "x", "1");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 18);
    }
  }
}

TEST_CASE("INI parsing") {
  auto f = parse_config("# the port\nclientPort=2181\n\ndataDir = /var/zk\n", ConfigFormat::Ini, "zk", "3.9");
  REQUIRE(f.size() == 2);
  CHECK(f.entries()[0] == ConfigEntry{"clientPort", "2181", "the port"});
  CHECK(f.entries()[1] == ConfigEntry{"dataDir", "/var/zk", std::nullopt});

  CHECK_THROWS_AS(parse_config("a=1\na=2\n", ConfigFormat::Ini, "x", "1"), ParseError);
  CHECK_THROWS_AS(parse_config("=1\n", ConfigFormat::Ini, "x", "1"), ParseError);
  CHECK_THROWS_AS(parse_config("novalue\n", ConfigFormat::Ini, "x", "1"), ParseError);
  CHECK_THROWS_AS(parse_config("[server]\na=1\n", ConfigFormat::Ini, "x", "1"), ParseError);
}

TEST_CASE("render INI") {
  ConfigFile f("x", "1", ConfigFormat::Xml, {{"p", "8020", std::nullopt}});
  auto text = render_config(f, ConfigFormat::Ini);
  CHECK(text.find("p=8020\n") != std::string::npos);
  ConfigFile empty("x", "1", ConfigFormat::Ini, {});
  CHECK(render_config(empty, ConfigFormat::Ini).empty());
  auto xml = render_config(empty, ConfigFormat::Xml);
  CHECK(parse_config(xml, ConfigFormat::Xml, "x", "1").size() == 0);
}

TEST_CASE("round trip through both formats for random files") {
  Rng rng(20240611);
  for (int i = 0; i < 500; ++i) {
    auto f = random_file(rng);
    for (auto fmt : {ConfigFormat::Xml, ConfigFormat::Ini}) {
      auto text = render_config(f, fmt);
      auto back = parse_config(text, fmt, f.project(), f.version());
      INFO("format=" << to_string(fmt) << "\n" << text);
      REQUIRE(back.same_content(f));
    }
  }
}

TEST_CASE("compress keeps entries and shrinks the rendering") {
  auto f = parse_config(kHadoopXml, ConfigFormat::Xml, "hcommon", "3.3.6");
  auto c = compress(f);
  CHECK(c.format() == ConfigFormat::Ini);
  CHECK(c.entries() == f.entries());
  CHECK(compress(c) == c);

  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    auto r = random_file(rng);
    if (r.size() == 0) continue;
    auto before = estimate_tokens(render_config(r, ConfigFormat::Xml));
    auto after = estimate_tokens(render_config(compress(r)));
    REQUIRE(after < before);
  }
}

TEST_CASE("diff snippets") {
  ConfigDiff d;
  d.changed = {{"a", "1", std::nullopt}};
  auto s = diff_to_snippet(d, "x", "1");
  REQUIRE(s.size() == 1);
  CHECK(s.entries()[0] == ConfigEntry{"a", "1", std::nullopt});

  CHECK_THROWS_AS(diff_to_snippet(ConfigDiff{}, "x", "1"), std::invalid_argument);

  ConfigDiff overlap;
  overlap.changed = {{"a", "1", std::nullopt}};
  overlap.removed = {"a"};
  CHECK_THROWS_AS(diff_to_snippet(overlap, "x", "1"), std::invalid_argument);

  ConfigDiff with_base;
  with_base.base = ConfigFile("hbase", "2.5", ConfigFormat::Xml,
                              {{"a", "0", "how many things"}, {"b", "2", "other"}});
  with_base.changed = {{"a", "1", std::nullopt}};
  with_base.removed = {"b"};
  auto s2 = diff_to_snippet(with_base);
  REQUIRE(s2.size() == 1);
  CHECK(s2.project() == "hbase");
  CHECK(s2.version() == "2.5");
  CHECK(s2.entries()[0].description == "how many things");
}

TEST_CASE("fingerprint ignores format and descriptions") {
  ConfigFile a("x", "1", ConfigFormat::Xml, {{"a", "1", "d"}});
  ConfigFile b("x", "1", ConfigFormat::Ini, {{"a", "1", std::nullopt}});
  ConfigFile c("x", "2", ConfigFormat::Xml, {{"a", "1", "d"}});
  CHECK(fingerprint(a) == fingerprint(b));
  CHECK(fingerprint(a) != fingerprint(c));
}
