#include <fstream>
#include <sstream>

#include "cfgval/dataset.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cfgval;
using cfgval::testing::TempDir;

namespace {

std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    out[std::filesystem::relative(e.path(), root).generic_string()] = os.str();
  }
  return out;
}

}  // namespace

TEST_CASE("corpus covers every project and both splits") {
  const auto& d = cfgval::testing::bundled_corpus();
  CHECK(d.projects.size() == 6);
  CHECK_FALSE(d.select(Split::ShotPool).empty());
  CHECK(d.select(Split::EvalSet).size() > d.select(Split::ShotPool).size());
  std::set<std::string> paths;
  for (const auto& r : d.records) {
    CHECK(paths.insert(r.path).second);
    CHECK(r.path.rfind(r.project + "/" + std::string(to_string(r.split)) + "/" + std::string(slug(r.labeled.origin)) + "/", 0) == 0);
  }
}

TEST_CASE("write and load round trip") {
  const auto& d = cfgval::testing::bundled_corpus();
  TempDir dir("roundtrip");
  write_dataset(d, dir.path());
  auto back = load_dataset(dir.path());
  CHECK(back.seed == d.seed);
  CHECK(back.projects == d.projects);
  REQUIRE(back.records.size() == d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& a = d.records[i];
    const auto& b = back.records[i];
    CHECK(a.project == b.project);
    CHECK(a.split == b.split);
    CHECK(a.path == b.path);
    CHECK(a.labeled.id == b.labeled.id);
    CHECK(a.labeled.label == b.labeled.label);
    CHECK(a.labeled.origin == b.labeled.origin);
    CHECK(a.labeled.injected == b.labeled.injected);
    CHECK(a.labeled.file.same_content(b.labeled.file));
  }
  auto manifest = manifest_json(d);
  CHECK(manifest["schema"] == "cfgval-dataset/1");
  const auto& first = manifest["files"][0];
  for (const char* key : {"id", "project", "version", "split", "label", "subcategory", "path", "entries", "injected", "answer"}) {
    CHECK(first.contains(key));
  }
}

TEST_CASE("same seed writes byte-identical trees") {
  auto specs = cfgval::testing::bundled_specs();
  TempDir a("same-a");
  TempDir b("same-b");
  write_dataset(generate_corpus(specs, 77), a.path());
  write_dataset(generate_corpus(specs, 77), b.path());
  CHECK(snapshot(a.path()) == snapshot(b.path()));
  TempDir c("same-c");
  write_dataset(generate_corpus(specs, 78), c.path());
  CHECK(snapshot(a.path()) != snapshot(c.path()));
}

TEST_CASE("adding a project leaves the others unchanged") {
  auto specs = cfgval::testing::bundled_specs();
  auto all = generate_corpus(specs, 5);
  auto first_only = generate_corpus({specs.front()}, 5);
  std::vector<const DatasetRecord*> same;
  for (const auto& r : all.records) {
    if (r.project == specs.front().project()) same.push_back(&r);
  }
  REQUIRE(same.size() == first_only.records.size());
  for (std::size_t i = 0; i < same.size(); ++i) CHECK(same[i]->labeled == first_only.records[i].labeled);
}

TEST_CASE("load errors") {
  TempDir dir("errors");
  CHECK_THROWS_AS(load_dataset(dir.path()), DatasetError);
  const auto& d = cfgval::testing::bundled_corpus();
  write_dataset(d, dir.path());
  std::filesystem::remove(dir.path() / d.records.front().path);
  CHECK_THROWS_AS(load_dataset(dir.path()), DatasetError);
  CHECK_THROWS_AS(generate_corpus({cfgval::testing::bundled_specs()[0], cfgval::testing::bundled_specs()[0]}, 1),
                  DatasetError);
}
