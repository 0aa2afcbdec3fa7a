// Acceptance checks: one PASS/FAIL/SKIP line per criterion on stdout.
// Exit status is non-zero when any criterion fails.
//
// The live smoke test runs only with CFGVAL_LIVE_SMOKE=1; it uses the
// framework config named by CFGVAL_LIVE_CONFIG (default: HTTP backend with
// built-in defaults, key from OPENAI_API_KEY).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "cfgval/eval.hpp"
#include "cfgval/framework.hpp"
#include "test_support.hpp"

using namespace cfgval;

namespace {

// P(Bin(10, 0.2) <= 4): the correct answer must win a strict majority of 10
// votes, since a 5-5 tie goes to "no error". From tests/oracles/noisy_recall.py.
constexpr double kExpectedNoisyRecall = 0.9672065024;

enum class Outcome { Pass, Fail, Skip };

struct Result {
  Outcome outcome = Outcome::Pass;
  std::string detail;
};

MockScript script(MockBehavior b, double noise_rate = 0.0, std::uint64_t seed = 0) {
  MockScript s;
  s.behavior = b;
  s.noise_rate = noise_rate;
  s.seed = seed;
  return s;
}

Result pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Result fail(std::string d) { return {Outcome::Fail, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

// Walks generated datasets of the bundled projects over increasing seeds
// until `want` files with the requested label have been visited.
template <typename F>
std::size_t for_generated(Label label, std::size_t want, F&& visit) {
  const auto sets = cfgval::testing::bundled_specs();
  std::size_t n = 0;
  for (std::uint64_t seed = 0; n < want; ++seed) {
    for (const auto& set : sets) {
      Rng rng = Rng(seed).fork(set.project());
      auto split = build_dataset(set, rng);
      for (const auto* files : {&split.shot_pool, &split.eval_set}) {
        for (const auto& f : *files) {
          if (f.label != label) continue;
          visit(f, set);
          ++n;
        }
      }
    }
  }
  return n;
}

Result generation_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t bad = 0;
  std::set<Subcategory> seen;
  std::string first;
  const auto n = for_generated(Label::Misconfig, 1000, [&](const LabeledFile& f, const SpecSet& set) {
    const auto v = oracle_validate(f.file, set);
    seen.insert(f.injected->subcategory);
    const bool ok = v.size() == 1 && v[0].parameter == f.injected->parameter &&
                    v[0].subcategory == f.injected->subcategory;
    if (!ok) {
      if (!bad++) first = set.project() + "/" + f.id;
    }
  });
  const double secs = seconds_since(t0);
  std::string d = std::to_string(n - bad) + "/" + std::to_string(n) + " single-fault files, " +
                  std::to_string(seen.size()) + " sub-categories, " + fmt(secs, 2) + " s";
  if (bad) return fail(d + "; first mismatch " + first);
  if (seen.size() != kAllSubcategories.size()) return fail(d);
  if (secs >= 10.0) return fail(d + " (limit 10 s)");
  return pass(d);
}

Result valid_soundness() {
  std::size_t bad = 0;
  const auto n = for_generated(Label::ValidConfig, 1000, [&](const LabeledFile& f, const SpecSet& set) {
    if (!oracle_validate(f.file, set).empty()) ++bad;
  });
  std::string d = std::to_string(n - bad) + "/" + std::to_string(n) + " valid files without violations";
  return bad ? fail(d) : pass(d);
}

Result filter_rules() {
  // Parameter lists are every sequence of length 0..3 over {a, b, c}, so
  // both duplicate and duplicate-free lists appear at every length.
  const std::vector<std::string> alphabet{"a", "b", "c"};
  std::vector<std::vector<std::string>> lists{{}};
  for (std::size_t len = 1; len <= 3; ++len) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < len; ++i) count *= alphabet.size();
    for (std::size_t code = 0; code < count; ++code) {
      std::vector<std::string> l;
      for (std::size_t i = 0, c = code; i < len; ++i, c /= alphabet.size()) l.push_back(alphabet[c % alphabet.size()]);
      lists.push_back(l);
    }
  }
  std::size_t cases = 0, mismatches = 0;
  std::set<FilterRule> rules_seen;
  for (bool has_error : {false, true}) {
    for (const auto& params : lists) {
      for (std::size_t nr = 0; nr <= 3; ++nr) {
        ValidationResponse r{has_error, params, std::vector<std::string>(nr, "reason")};
        std::set<std::string> distinct(params.begin(), params.end());
        const bool r1 = has_error || (params.empty() && nr == 0);
        const bool r2 = !has_error || (!params.empty() && nr > 0);
        const bool r3 = !has_error || params.size() == nr;
        const bool r4 = distinct.size() == params.size();
        const auto got = validate_response(r);
        if (got) rules_seen.insert(*got);
        std::optional<FilterRule> expect;
        if (!r1) {
          expect = FilterRule::R1;
        } else if (!r2) {
          expect = FilterRule::R2;
        } else if (!r3) {
          expect = FilterRule::R3;
        } else if (!r4) {
          expect = FilterRule::R4;
        }
        if (got != expect) ++mismatches;
        ++cases;
      }
    }
  }
  std::string d = std::to_string(cases - mismatches) + "/" + std::to_string(cases) + " response shapes, " +
                  std::to_string(rules_seen.size()) + " rules exercised";
  return mismatches || rules_seen.size() != 4 ? fail(d) : pass(d);
}

// Winner by the documented rule, computed from counts alone.
CanonicalKey expected_winner(const std::map<CanonicalKey, std::size_t>& counts) {
  const CanonicalKey* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [key, c] : counts) {
    bool better = false;
    if (!best || c > best_count) {
      better = true;
    } else if (c == best_count) {
      if (key.parameters.size() != best->parameters.size()) {
        better = key.parameters.size() < best->parameters.size();
      } else {
        better = key.parameters < best->parameters;
      }
    }
    if (better) {
      best = &key;
      best_count = c;
    }
  }
  return *best;
}

ValidationResponse response_for(const CanonicalKey& k, Rng& rng) {
  ValidationResponse r{k.has_error, k.parameters, {}};
  rng.shuffle(r.err_parameters);
  for (const auto& p : r.err_parameters) r.reasons.push_back(p + " reason " + std::to_string(rng.below(3)));
  return r;
}

Result voting() {
  // Keys: "no error" plus every non-empty subset of three parameters.
  std::vector<CanonicalKey> keys{{false, {}}};
  const std::vector<std::string> names{"a", "b", "c"};
  for (unsigned mask = 1; mask < 8; ++mask) {
    CanonicalKey k{true, {}};
    for (unsigned i = 0; i < 3; ++i) {
      if (mask & (1u << i)) k.parameters.push_back(names[i]);
    }
    keys.push_back(k);
  }
  Rng rng(2024);

  std::size_t perm_bad = 0;
  for (int round = 0; round < 10000; ++round) {
    std::vector<ValidationResponse> rs;
    const auto n = 1 + rng.below(10);
    for (std::size_t i = 0; i < n; ++i) rs.push_back(response_for(rng.pick(keys), rng));
    const auto base = vote(rs);
    auto shuffled = rs;
    rng.shuffle(shuffled);
    const auto again = vote(shuffled);
    if (again.key != base.key || again.tally != base.tally || again.reasons != base.reasons) ++perm_bad;
  }

  // Every multiset of 1..6 voters over the 8 keys.
  std::size_t multisets = 0, tie_cases = 0, tie_bad = 0;
  std::vector<std::size_t> counts(keys.size(), 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t idx, std::size_t left) {
    if (idx == keys.size()) {
      std::size_t total = 0;
      for (auto c : counts) total += c;
      if (total == 0) return;
      ++multisets;
      std::vector<ValidationResponse> rs;
      std::map<CanonicalKey, std::size_t> by_key;
      std::size_t top = 0, at_top = 0;
      for (std::size_t k = 0; k < keys.size(); ++k) {
        for (std::size_t i = 0; i < counts[k]; ++i) rs.push_back(response_for(keys[k], rng));
        if (counts[k]) by_key[keys[k]] = counts[k];
        if (counts[k] > top) {
          top = counts[k];
          at_top = 1;
        } else if (counts[k] == top && top > 0) {
          ++at_top;
        }
      }
      rng.shuffle(rs);
      const bool tie = at_top > 1;
      tie_cases += tie;
      const auto v = vote(rs);
      if (v.key != expected_winner(by_key) || v.tally != top) tie_bad += 1;
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[idx] = c;
      rec(idx + 1, left - c);
    }
    counts[idx] = 0;
  };
  rec(0, 6);

  std::string d = std::to_string(10000 - perm_bad) + "/10000 permutations stable; " +
                  std::to_string(multisets - tie_bad) + "/" + std::to_string(multisets) + " multisets (" +
                  std::to_string(tie_cases) + " with ties) match the tie-break";
  return perm_bad || tie_bad ? fail(d) : pass(d);
}

Result metrics_oracle() {
  Rng rng(99);
  std::size_t bad = 0;
  const double eps = 1e-12;
  for (int fixture = 0; fixture < 1000; ++fixture) {
    // A few projects, each with random files and random verdicts.
    std::vector<EvalRecord> records;
    std::map<std::string, std::pair<ConfusionMatrix, ConfusionMatrix>> brute;
    const auto n_files = 1 + rng.below(12);
    for (std::size_t i = 0; i < n_files; ++i) {
      const std::string project = "p" + std::to_string(rng.below(3));
      const auto entries = 1 + rng.below(10);
      std::vector<ConfigEntry> es;
      for (std::size_t e = 0; e < entries; ++e) es.push_back({"k" + std::to_string(e), "v", std::nullopt});
      LabeledFile truth;
      truth.id = std::to_string(i);
      truth.file = ConfigFile(project, "1", ConfigFormat::Xml, es);
      truth.label = rng.chance(0.5) ? Label::Misconfig : Label::ValidConfig;
      truth.origin = rng.pick(std::vector<Subcategory>(kAllSubcategories.begin(), kAllSubcategories.end()));
      std::string injected;
      if (truth.label == Label::Misconfig) {
        injected = es[rng.below(entries)].name;
        truth.injected = InjectedFault{injected, truth.origin, "r"};
      }
      std::vector<std::string> flagged;
      for (const auto& e : es) {
        if (rng.chance(0.25)) flagged.push_back(e.name);
      }
      if (rng.chance(0.1)) flagged.push_back("not-in-file");
      ValidationResponse r{!flagged.empty(), flagged, std::vector<std::string>(flagged.size(), "x")};
      auto v = vote({r});
      v.target_fingerprint = fingerprint(truth.file);

      EvalRecord rec{project, truth.id, truth.label, truth.origin, entries, score_file(v, truth)};
      records.push_back(rec);

      // Brute force: walk the universe of names by hand.
      auto& [bf, bp] = brute[project];
      const bool mis = truth.label == Label::Misconfig;
      const bool flags_any = !flagged.empty();
      if (mis && flags_any) ++bf.tp;
      if (!mis && flags_any) ++bf.fp;
      if (!mis && !flags_any) ++bf.tn;
      if (mis && !flags_any) ++bf.fn;
      std::set<std::string> universe;
      for (const auto& e : es) universe.insert(e.name);
      universe.insert(flagged.begin(), flagged.end());
      for (const auto& name : universe) {
        const bool inj = name == injected;
        const bool fl = std::find(flagged.begin(), flagged.end(), name) != flagged.end();
        if (inj && fl) ++bp.tp;
        if (!inj && fl) ++bp.fp;
        if (!inj && !fl) ++bp.tn;
        if (inj && !fl) ++bp.fn;
      }
    }
    const auto report = build_report(records);
    std::vector<double> ff1, pf1;
    for (const auto& [project, pair] : brute) {
      const auto it = report.projects.find(project);
      if (it == report.projects.end() || !(it->second.file == pair.first) || !(it->second.parameter == pair.second)) {
        ++bad;
        break;
      }
      auto prf = [](const ConfusionMatrix& m) {
        const double p = m.tp + m.fp ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
        const double r = m.tp + m.fn ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
        return std::array<double, 3>{p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0};
      };
      const auto f = prf(pair.first);
      const auto p = prf(pair.second);
      const auto& m = it->second;
      if (std::abs(m.file_metrics.precision - f[0]) > eps || std::abs(m.file_metrics.recall - f[1]) > eps ||
          std::abs(m.file_metrics.f1 - f[2]) > eps || std::abs(m.parameter_metrics.precision - p[0]) > eps ||
          std::abs(m.parameter_metrics.recall - p[1]) > eps || std::abs(m.parameter_metrics.f1 - p[2]) > eps) {
        ++bad;
        break;
      }
      ff1.push_back(f[2]);
      pf1.push_back(p[2]);
    }
    double mf = 0, mp = 0;
    for (auto x : ff1) mf += x;
    for (auto x : pf1) mp += x;
    mf /= static_cast<double>(ff1.size());
    mp /= static_cast<double>(pf1.size());
    if (std::abs(report.macro_file.f1 - mf) > eps || std::abs(report.macro_parameter.f1 - mp) > eps) ++bad;
  }
  std::string d = std::to_string(1000 - bad) + "/1000 random fixtures match brute force within 1e-12";
  return bad ? fail(d) : pass(d);
}

Result perfect_mock() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto corpus = generate_corpus(cfgval::testing::bundled_specs(), 2024);
  const auto shots = ShotDatabase::from_dataset(corpus);
  MockBackend backend({}, script(MockBehavior::EchoGroundTruth), dataset_truth(corpus));
  PipelineConfig cfg;
  cfg.seed = 2024;
  const auto run = evaluate_dataset(corpus, backend, shots, cfg, 4);
  const double secs = seconds_since(t0);
  bool exact = run.failures.empty() && run.report.projects.size() == 6 && run.report.macro_file.f1 == 1.0 &&
               run.report.macro_parameter.f1 == 1.0;
  for (const auto& [name, p] : run.report.projects) {
    exact = exact && p.file_metrics.f1 == 1.0 && p.parameter_metrics.f1 == 1.0;
  }
  std::string d = std::to_string(run.records.size()) + " eval files in " + std::to_string(run.report.projects.size()) +
                  " projects, file F1 " + fmt(run.report.macro_file.f1, 6) + ", parameter F1 " +
                  fmt(run.report.macro_parameter.f1, 6) + ", " + std::to_string(run.failures.size()) + " failures, " +
                  fmt(secs, 2) + " s";
  if (!exact) return fail(d);
  if (secs >= 60.0) return fail(d + " (limit 60 s)");
  return pass(d);
}

Result noisy_calibration() {
  GenerationOptions opts;
  opts.sample_per_subcategory = 8;
  const auto corpus = generate_corpus(cfgval::testing::bundled_specs(), 2024, opts);
  const auto shots = ShotDatabase::from_dataset(corpus);
  MockBackend backend({}, script(MockBehavior::NoiseWithRate, 0.2, 2024), dataset_truth(corpus));
  PipelineConfig cfg;
  cfg.seed = 2024;
  const auto run = evaluate_dataset(corpus, backend, shots, cfg, 4);
  ConfusionMatrix pooled;
  for (const auto& r : run.records) pooled += r.score.parameters;
  const double got = recall(pooled);
  std::string d = std::to_string(run.records.size()) + " eval files, parameter recall " + fmt(got) +
                  " vs expected " + fmt(kExpectedNoisyRecall) + " (tolerance 0.05)";
  if (run.records.size() < 500 || !run.failures.empty()) return fail(d);
  return std::abs(got - kExpectedNoisyRecall) <= 0.05 ? pass(d) : fail(d);
}

LabeledFile synthetic(Label label, std::size_t entries, std::size_t value_len, const std::string& tag) {
  std::vector<ConfigEntry> es;
  for (std::size_t i = 0; i < entries; ++i) {
    es.push_back({tag + ".param." + std::to_string(i), std::string(value_len, 'v'), std::nullopt});
  }
  LabeledFile f;
  f.id = tag;
  f.file = ConfigFile("fuzz", "1.0", ConfigFormat::Xml, es);
  f.label = label;
  if (label == Label::Misconfig && entries > 0) f.injected = InjectedFault{es[0].name, Subcategory::RangePort, "r"};
  return f;
}

Result token_budget() {
  Rng rng(4242);
  std::size_t over = 0, wrong_abort = 0, aborts = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto target = synthetic(Label::ValidConfig, rng.below(40), rng.below(60), "t").file;
    std::vector<Shot> shots;
    const auto n = rng.below(6);
    for (std::size_t s = 0; s < n; ++s) {
      shots.push_back(make_shot(synthetic(rng.chance(0.5) ? Label::Misconfig : Label::ValidConfig,
                                          1 + rng.below(25), rng.below(80), "s" + std::to_string(s))));
    }
    const std::size_t limit = 40 + rng.below(3000);
    const bool alone_too_big = build_prompt(compress(target), {}).token_estimate() > limit;
    try {
      const auto p = fit_to_budget(build_prompt(target, shots), limit);
      if (estimate_tokens(p.text()) > limit) ++over;
      if (alone_too_big) ++wrong_abort;
    } catch (const BudgetExceeded&) {
      ++aborts;
      if (!alone_too_big) ++wrong_abort;
    }
  }
  std::string d = "1000 fuzz cases, " + std::to_string(over) + " over the limit, " + std::to_string(aborts) +
                  " aborts, " + std::to_string(wrong_abort) + " misplaced aborts";
  return over || wrong_abort || aborts == 0 ? fail(d) : pass(d);
}

Result sweep_shape() {
  const auto sweep = shot_sweep(5);
  std::set<std::pair<std::size_t, std::size_t>> distinct;
  for (const auto& c : sweep) {
    if (c.total() <= 5) distinct.insert({c.valid_count, c.misconfig_count});
  }
  // Run the sweep on a small corpus and count the combinations each project received.
  GenerationOptions opts;
  opts.sample_per_subcategory = 5;
  const auto corpus = generate_corpus(cfgval::testing::bundled_specs(), 7, opts);
  const auto shots = ShotDatabase::from_dataset(corpus);
  MockBackend backend({}, script(MockBehavior::EchoGroundTruth), dataset_truth(corpus));
  PipelineConfig cfg;
  cfg.num_queries = 1;
  std::map<std::string, std::size_t> per_project;
  std::size_t failures = 0;
  for (const auto& combo : sweep) {
    cfg.shots = combo;
    const auto run = evaluate_dataset(corpus, backend, shots, cfg, 4);
    failures += run.failures.size();
    for (const auto& [name, p] : run.report.projects) ++per_project[name];
  }
  bool ok = sweep.size() == 21 && distinct.size() == 21 && per_project.size() == 6 && failures == 0;
  for (const auto& [name, n] : per_project) ok = ok && n == 21;
  std::string d = std::to_string(sweep.size()) + " combinations (" + std::to_string(distinct.size()) +
                  " distinct), evaluated for " + std::to_string(per_project.size()) + " projects, " +
                  std::to_string(failures) + " failures";
  return ok ? pass(d) : fail(d);
}

Result live_smoke() {
  const char* flag = std::getenv("CFGVAL_LIVE_SMOKE");
  if (!flag || std::string(flag) != "1") return {Outcome::Skip, "set CFGVAL_LIVE_SMOKE=1 to query a real backend"};
  FrameworkConfig cfg;
  cfg.backend = BackendKind::Http;
  if (const char* path = std::getenv("CFGVAL_LIVE_CONFIG")) cfg = load_framework_config(path);
  if (cfg.backend != BackendKind::Http) return fail("the live config must select the http backend");
  auto backend = make_backend(cfg);
  const auto& corpus = cfgval::testing::bundled_corpus();
  const auto shots = ShotDatabase::from_dataset(corpus);
  std::string d;
  for (auto label : {Label::ValidConfig, Label::Misconfig}) {
    const DatasetRecord* rec = nullptr;
    for (const auto* r : corpus.select(Split::EvalSet)) {
      if (r->labeled.label == label) {
        rec = r;
        break;
      }
    }
    try {
      const auto v = validate_file(rec->labeled.file, *backend, shots, cfg.pipeline);
      const auto j = verdict_json(v);
      const bool schema_ok = j.at("hasError").is_boolean() && j.at("errParameters").is_array() &&
                             j.at("reasons").is_array() && v.tally <= v.total_votes &&
                             v.has_error() == !v.reasons.empty();
      if (!schema_ok) return fail("verdict for " + rec->labeled.id + " is not schema-valid");
      d += (d.empty() ? "" : "; ") + std::string(to_string(label)) + " " + rec->project + "/" + rec->labeled.id +
           " -> " + (v.has_error() ? "misconfigured" : "valid") + " (" + std::to_string(v.tally) + "/" +
           std::to_string(v.total_votes) + ")";
    } catch (const std::exception& e) {
      return fail(std::string("backend call failed: ") + e.what());
    }
  }
  return pass(d);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"generation-soundness", generation_soundness},
      {"valid-config-soundness", valid_soundness},
      {"filter-rules", filter_rules},
      {"voting", voting},
      {"metrics-oracle", metrics_oracle},
      {"perfect-mock-identity", perfect_mock},
      {"noisy-mock-calibration", noisy_calibration},
      {"token-budget", token_budget},
      {"sweep-shape", sweep_shape},
      {"live-smoke", live_smoke},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = fail(std::string("exception: ") + e.what());
    }
    const char* tag = r.outcome == Outcome::Pass ? "PASS" : r.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    std::cout << tag << ' ' << name << ": " << r.detail << std::endl;
    failed += r.outcome == Outcome::Fail;
  }
  return failed ? 1 : 0;
}
