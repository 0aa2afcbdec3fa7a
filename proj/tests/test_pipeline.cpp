#include <algorithm>

#include "cfgval/eval.hpp"
#include "cfgval/pipeline.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cfgval;

namespace {

ValidationResponse flags(std::vector<std::string> params, std::string why = "bad value") {
  ValidationResponse r{true, std::move(params), {}};
  r.reasons.assign(r.err_parameters.size(), why);
  return r;
}

const DatasetRecord& eval_record(const std::string& project, Label label) {
  for (const auto* r : cfgval::testing::bundled_corpus().select(Split::EvalSet)) {
    if (r->project == project && r->labeled.label == label) return *r;
  }
  throw std::logic_error("fixture missing");
}

const ShotDatabase& shots() {
  static const ShotDatabase d = ShotDatabase::from_dataset(cfgval::testing::bundled_corpus());
  return d;
}

}  // namespace

TEST_CASE("parse_response") {
  SUBCASE("plain object") {
    auto r = parse_response(R"({"hasError": false, "errParameter": [], "reason": []})");
    CHECK(r == ValidationResponse{});
  }
  SUBCASE("prose around a fenced block") {
    auto r = parse_response(
        "Looking at the file, one value stands out.\n```json\n{\"hasError\": true, \"errParameter\": "
        "[\"dfs.replication\"], \"reason\": [\"must be positive\"], \"confidence\": 0.9}\n```\nHope this helps {really}.");
    CHECK(r.has_error);
    CHECK(r.err_parameters == std::vector<std::string>{"dfs.replication"});
    CHECK(r.reasons == std::vector<std::string>{"must be positive"});
  }
  SUBCASE("braces inside strings") {
    auto r = parse_response(R"(Answer: {"hasError": true, "errParameter": ["a"], "reason": ["use {x} not }"]})");
    CHECK(r.reasons[0] == "use {x} not }");
  }
  SUBCASE("brackets around the object are treated as prose") {
    CHECK(parse_response(R"([{"hasError": false, "errParameter": [], "reason": []}])") == ValidationResponse{});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_response(R"({"hasError": "yes"})"), FormatError);
    CHECK_THROWS_AS(parse_response(R"({"hasError": false, "errParameter": []})"), FormatError);
    CHECK_THROWS_AS(parse_response(R"({"hasError": false, "errParameter": [1], "reason": []})"), FormatError);
    CHECK_THROWS_AS(parse_response("no json here"), FormatError);
    CHECK_THROWS_AS(parse_response(""), FormatError);
    CHECK_THROWS_AS(parse_response(R"({"hasError": false, "errParameter": [], "reason": []} and )"
                                   R"({"hasError": true, "errParameter": ["a"], "reason": ["b"]})"),
                    FormatError);
  }
}

TEST_CASE("validate_response examples") {
  CHECK_FALSE(validate_response(ValidationResponse{}).has_value());
  CHECK(validate_response({false, {"x"}, {}}) == FilterRule::R1);
  CHECK(validate_response({false, {}, {"r"}}) == FilterRule::R1);
  CHECK(validate_response({true, {}, {}}) == FilterRule::R2);
  CHECK(validate_response({true, {"x"}, {}}) == FilterRule::R2);
  CHECK(validate_response({true, {"x", "y"}, {"r"}}) == FilterRule::R3);
  CHECK(validate_response({true, {"x", "x"}, {"a", "b"}}) == FilterRule::R4);
  CHECK_FALSE(validate_response({true, {"x", "y"}, {"a", "b"}}).has_value());
  CHECK(to_string(FilterRule::R3) == "R3");
}

TEST_CASE("filter soundness over small responses") {
  // Arrays of size 0..3 drawn from two names, with both hasError values.
  const std::vector<std::string> names{"a", "b"};
  std::size_t seen = 0;
  for (int he = 0; he < 2; ++he) {
    for (std::size_t np = 0; np <= 3; ++np) {
      for (std::size_t mask = 0; mask < (1u << np); ++mask) {
        std::vector<std::string> params;
        for (std::size_t i = 0; i < np; ++i) params.push_back(names[(mask >> i) & 1]);
        for (std::size_t nr = 0; nr <= 3; ++nr) {
          ValidationResponse r{he == 1, params, std::vector<std::string>(nr, "why")};
          const bool r1 = r.has_error || (params.empty() && nr == 0);
          const bool r2 = !r.has_error || (!params.empty() && nr > 0);
          const bool r3 = !r.has_error || params.size() == nr;
          std::vector<std::string> sorted = params;
          std::sort(sorted.begin(), sorted.end());
          const bool r4 = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
          CHECK(!validate_response(r).has_value() == (r1 && r2 && r3 && r4));
          ++seen;
        }
      }
    }
  }
  CHECK(seen == 2 * (1 + 2 + 4 + 8) * 4);
}

TEST_CASE("vote examples") {
  SUBCASE("unanimous") {
    std::vector<ValidationResponse> rs(10, flags({"p"}));
    auto v = vote(rs);
    CHECK(v.has_error());
    CHECK(v.err_parameters() == std::vector<std::string>{"p"});
    CHECK(v.tally == 10);
    CHECK(v.total_votes == 10);
  }
  SUBCASE("six to four") {
    std::vector<ValidationResponse> rs(6, flags({"a"}));
    rs.insert(rs.end(), 4, ValidationResponse{});
    auto v = vote(rs);
    CHECK(v.err_parameters() == std::vector<std::string>{"a"});
    CHECK(v.tally == 6);
  }
  SUBCASE("tie goes to fewer parameters") {
    std::vector<ValidationResponse> rs(5, flags({"a"}));
    rs.insert(rs.end(), 5, ValidationResponse{});
    auto v = vote(rs);
    CHECK_FALSE(v.has_error());
    CHECK(v.err_parameters().empty());
    CHECK(v.reasons.empty());
    CHECK(v.tally == 5);
  }
  SUBCASE("tie between equal sizes goes to the smaller list") {
    std::vector<ValidationResponse> rs{flags({"b"}), flags({"a"}), flags({"c", "a"}), flags({"a", "c"}),
                                       flags({"b"}), flags({"a"})};
    auto v = vote(rs);
    CHECK(v.err_parameters() == std::vector<std::string>{"a"});
  }
  SUBCASE("key ignores order and reasons") {
    auto v = vote({flags({"y", "x"}, "one"), flags({"x", "y"}, "two"), ValidationResponse{}});
    CHECK(v.err_parameters() == std::vector<std::string>{"x", "y"});
    CHECK(v.tally == 2);
  }
  CHECK_THROWS_AS(vote({}), std::invalid_argument);
}

TEST_CASE("vote is permutation invariant") {
  const std::vector<ValidationResponse> pool{ValidationResponse{}, flags({"a"}), flags({"b"}), flags({"a", "b"}),
                                             flags({"c"})};
  Rng rng(5);
  for (int round = 0; round < 300; ++round) {
    std::vector<ValidationResponse> rs;
    const auto n = 1 + rng.below(10);
    for (std::size_t i = 0; i < n; ++i) rs.push_back(rng.pick(pool));
    const auto base = vote(rs);
    for (int k = 0; k < 5; ++k) {
      rng.shuffle(rs);
      const auto v = vote(rs);
      CHECK(v.key == base.key);
      CHECK(v.tally == base.tally);
    }
    // Reasons are chosen by content, so they do not depend on order either.
    for (int k = 0; k < 3; ++k) {
      auto rr = rs;
      for (auto& r : rr) {
        for (auto& reason : r.reasons) reason += " " + std::to_string(rng.below(3));
      }
      const auto v1 = vote(rr);
      rng.shuffle(rr);
      CHECK(vote(rr).reasons == v1.reasons);
    }
    // The winner has the top count, and fewer parameters among equal counts.
    std::map<CanonicalKey, std::size_t> counts;
    for (const auto& r : rs) ++counts[canonical_key(r)];
    for (const auto& [key, c] : counts) {
      CHECK(c <= base.tally);
      if (c == base.tally && key != base.key) {
        CHECK(key.parameters.size() >= base.key.parameters.size());
        if (key.parameters.size() == base.key.parameters.size()) CHECK(base.key.parameters < key.parameters);
      }
    }
  }
}

TEST_CASE("reason selection") {
  CHECK(select_representative({"too big", "too big", "too big"}) == "too big");
  CHECK(select_representative({"only one"}) == "only one");
  SUBCASE("similar pair beats the outlier") {
    // cosine(first, second) = 0.835591541945 under smoothed TF-IDF; the outlier shares no token.
    const auto rep = select_representative({"port out of range", "port value out of range", "file missing"});
    CHECK((rep == "port out of range" || rep == "port value out of range"));
    CHECK(rep == "port out of range");
  }
  SUBCASE("equal clusters broken by medoid similarity") {
    // Pair {0,1} has cosine 0.536182565013, pair {2,3} 0.894427191000; (0,3) is 0.2236 < 0.4.
    // Inside the winning pair both members tie, so the smaller string is returned.
    CHECK(select_representative({"disk volume is full", "the disk volume seems full today", "port out of range",
                                 "port is out of range"}) == "port is out of range");
  }
  SUBCASE("per parameter from winning responses") {
    std::vector<ValidationResponse> rs{
        {true, {"a", "b"}, {"a is negative", "b missing"}},
        {true, {"b", "a"}, {"b missing", "a value is negative"}},
        {true, {"a", "b"}, {"a is negative", "b is absent"}},
        {true, {"a"}, {"unrelated"}},
    };
    auto v = vote(rs);
    REQUIRE(v.err_parameters() == std::vector<std::string>{"a", "b"});
    CHECK(v.reasons == std::vector<std::string>{"a is negative", "b missing"});
  }
}

TEST_CASE("verdict json") {
  auto v = vote({flags({"p"}, "why")});
  v.target = "hdfs/x";
  auto j = verdict_json(v);
  CHECK(j["target"] == "hdfs/x");
  CHECK(j["hasError"] == true);
  CHECK(j["errParameters"] == nlohmann::json::array({"p"}));
  CHECK(j["reasons"] == nlohmann::json::array({"why"}));
  CHECK(j["tally"] == 1);
  CHECK(j["total_votes"] == 1);
  CHECK(j["discarded_count"] == 0);
}

TEST_CASE("validate_file with mocks") {
  const auto& corpus = cfgval::testing::bundled_corpus();
  const auto truth = dataset_truth(corpus);
  PipelineConfig cfg;
  cfg.seed = 7;

  SUBCASE("echo on a misconfigured file") {
    const auto& rec = eval_record("hdfs", Label::Misconfig);
    MockBackend m({}, {MockBehavior::EchoGroundTruth}, truth);
    auto v = validate_file(rec.labeled.file, m, shots(), cfg);
    CHECK(v.has_error());
    CHECK(v.err_parameters() == std::vector<std::string>{rec.labeled.injected->parameter});
    CHECK(v.tally == 10);
    CHECK(v.total_votes == 10);
    CHECK(v.discarded_count == 0);
    CHECK(v.reasons.size() == 1);
    CHECK(v.responses.size() == 10);
    CHECK(v.target_fingerprint == fingerprint(rec.labeled.file));
  }
  SUBCASE("always valid on a valid file") {
    const auto& rec = eval_record("zookeeper", Label::ValidConfig);
    MockBackend m({}, {MockBehavior::AlwaysValid});
    auto v = validate_file(rec.labeled.file, m, shots(), cfg);
    CHECK_FALSE(v.has_error());
    CHECK(v.reasons.empty());
    CHECK(v.err_parameters().empty());
  }
  SUBCASE("malformed twice then valid") {
    const auto& rec = eval_record("hbase", Label::Misconfig);
    MockScript s{MockBehavior::EchoGroundTruth};
    const auto fp = fingerprint(rec.labeled.file);
    s.scripted[{fp, 0}] = "I think it is fine.";
    s.scripted[{fp, 1}] = R"({"hasError": false, "errParameter": ["x"], "reason": []})";
    MockBackend m({}, s, truth);
    cfg.num_queries = 1;
    auto v = validate_file(rec.labeled.file, m, shots(), cfg);
    CHECK(v.has_error());
    CHECK(v.tally == 1);
    CHECK(v.discarded_count == 2);
    REQUIRE(v.audit.size() == 3);
    CHECK(v.audit[0].outcome == "format-error");
    CHECK(v.audit[1].outcome == "rejected-R1");
    CHECK(v.audit[2].outcome == "accepted");
    CHECK(v.audit[2].attempt == 2);
    CHECK(m.calls() == 3);
  }
  SUBCASE("retries are bounded") {
    const auto& rec = eval_record("hbase", Label::ValidConfig);
    MockBackend m({}, {MockBehavior::Malformed});
    cfg.num_queries = 3;
    CHECK_THROWS_AS(validate_file(rec.labeled.file, m, shots(), cfg), ValidationFailed);
    CHECK(m.calls() == 3 * (1 + cfg.retries));
  }
  SUBCASE("missing truth aborts") {
    const auto& rec = eval_record("hbase", Label::ValidConfig);
    MockBackend m({}, {MockBehavior::EchoGroundTruth});
    CHECK_THROWS_AS(validate_file(rec.labeled.file, m, shots(), cfg), BackendError);
  }
  SUBCASE("deterministic under noise") {
    const auto& rec = eval_record("alluxio", Label::Misconfig);
    BackendConfig bc;
    bc.max_parallel = 8;
    MockBackend a(bc, {MockBehavior::NoiseWithRate, 0.4, 3}, truth);
    MockBackend b({}, {MockBehavior::NoiseWithRate, 0.4, 3}, truth);
    auto va = validate_file(rec.labeled.file, a, shots(), cfg);
    auto vb = validate_file(rec.labeled.file, b, shots(), cfg);
    CHECK(va.key == vb.key);
    CHECK(va.tally == vb.tally);
    CHECK(va.reasons == vb.reasons);
    CHECK(va.responses == vb.responses);
  }
  SUBCASE("diff snippet") {
    const auto& rec = eval_record("yarn", Label::Misconfig);
    const auto& param = rec.labeled.injected->parameter;
    ConfigDiff diff{rec.labeled.file, {*rec.labeled.file.find(param)}, {}};
    CHECK(diff_to_snippet(diff).size() == 1);
    MockBackend m({}, {MockBehavior::AlwaysValid});
    auto v = validate_diff(diff, m, shots(), cfg);
    CHECK_FALSE(v.has_error());
  }
  SUBCASE("config validation") {
    PipelineConfig bad;
    bad.num_queries = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}
