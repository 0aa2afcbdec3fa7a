#include "cfgval/pipeline.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "cfgval/tfidf.hpp"

namespace cfgval {

using nlohmann::json;

namespace {

// Top-level balanced {...} spans that parse as JSON objects.
std::vector<json> objects_in(std::string_view text) {
  std::vector<json> out;
  std::size_t depth = 0, start = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (depth > 0 && in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"' && depth > 0) {
      in_string = true;
    } else if (c == '{') {
      if (depth++ == 0) start = i;
    } else if (c == '}' && depth > 0) {
      if (--depth == 0) {
        auto j = json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object()) out.push_back(std::move(j));
      }
    }
  }
  return out;
}

std::vector<std::string_view> fenced_blocks(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    auto body = text.find('\n', open + 3);
    if (body == std::string_view::npos) break;
    auto close = text.find("```", body + 1);
    if (close == std::string_view::npos) break;
    out.push_back(text.substr(body + 1, close - body - 1));
    pos = close + 3;
  }
  return out;
}

std::vector<std::string> string_array(const json& obj, const char* key) {
  if (!obj.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  const auto& a = obj.at(key);
  if (!a.is_array()) throw FormatError(std::string("field '") + key + "' is not an array");
  std::vector<std::string> out;
  for (const auto& v : a) {
    if (!v.is_string()) throw FormatError(std::string("field '") + key + "' holds a non-string");
    out.push_back(v.get<std::string>());
  }
  return out;
}

// Union-find over reason indices.
std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

}  // namespace

ValidationResponse parse_response(std::string_view text) {
  std::vector<json> found;
  for (auto block : fenced_blocks(text)) {
    auto objs = objects_in(block);
    found.insert(found.end(), objs.begin(), objs.end());
  }
  if (found.empty()) found = objects_in(text);
  if (found.empty()) throw FormatError("no JSON object in the response");
  if (found.size() > 1) throw FormatError("the response holds " + std::to_string(found.size()) + " JSON objects");
  const auto& obj = found.front();
  if (!obj.contains("hasError")) throw FormatError("missing field 'hasError'");
  if (!obj.at("hasError").is_boolean()) throw FormatError("field 'hasError' is not a boolean");
  ValidationResponse r;
  r.has_error = obj.at("hasError").get<bool>();
  r.err_parameters = string_array(obj, "errParameter");
  r.reasons = string_array(obj, "reason");
  return r;
}

std::string_view to_string(FilterRule r) {
  switch (r) {
    case FilterRule::R1: return "R1";
    case FilterRule::R2: return "R2";
    case FilterRule::R3: return "R3";
    case FilterRule::R4: return "R4";
  }
  return "?";
}

std::optional<FilterRule> validate_response(const ValidationResponse& r) {
  if (!r.has_error && (!r.err_parameters.empty() || !r.reasons.empty())) return FilterRule::R1;
  if (r.has_error && (r.err_parameters.empty() || r.reasons.empty())) return FilterRule::R2;
  if (r.has_error && r.err_parameters.size() != r.reasons.size()) return FilterRule::R3;
  std::set<std::string> names(r.err_parameters.begin(), r.err_parameters.end());
  if (names.size() != r.err_parameters.size()) return FilterRule::R4;
  return std::nullopt;
}

CanonicalKey canonical_key(const ValidationResponse& r) {
  std::set<std::string> names(r.err_parameters.begin(), r.err_parameters.end());
  return {r.has_error, {names.begin(), names.end()}};
}

Verdict vote(const std::vector<ValidationResponse>& responses) {
  if (responses.empty()) throw std::invalid_argument("cannot vote over zero responses");
  std::map<CanonicalKey, std::size_t> counts;
  for (const auto& r : responses) ++counts[canonical_key(r)];
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    const auto& [key, n] = *it;
    if (n > best->second ||
        (n == best->second && (key.parameters.size() < best->first.parameters.size() ||
                               (key.parameters.size() == best->first.parameters.size() &&
                                key.parameters < best->first.parameters)))) {
      best = it;
    }
  }
  Verdict v;
  v.key = best->first;
  v.tally = best->second;
  v.total_votes = responses.size();
  v.responses = responses;
  if (v.key.has_error) v.reasons = select_reasons(responses, v);
  return v;
}

std::string select_representative(const std::vector<std::string>& reasons) {
  if (reasons.empty()) throw std::invalid_argument("no reasons to choose from");
  const std::size_t n = reasons.size();
  std::vector<std::vector<std::string>> docs;
  for (const auto& r : reasons) docs.push_back(tokenize(r));
  auto vecs = tfidf_vectors(docs);
  std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Identical strings always belong together, even if they have no tokens.
      sim[i][j] = sim[j][i] = reasons[i] == reasons[j] ? 1.0 : cosine(vecs[i], vecs[j]);
      if (sim[i][j] >= kReasonClusterThreshold) parent[find_root(parent, i)] = find_root(parent, j);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters[find_root(parent, i)].push_back(i);

  // Sums are compared with a tolerance so that rounding differences from
  // member order cannot decide a tie; exact ties go to the smaller string,
  // which keeps the choice independent of input order.
  constexpr double eps = 1e-9;
  struct Candidate {
    std::size_t size;
    double medoid_sum;
    std::size_t medoid;
  };
  std::optional<Candidate> best;
  for (const auto& [root, members] : clusters) {
    Candidate c{members.size(), -1.0, members.front()};
    for (auto i : members) {
      double s = 0;
      for (auto j : members) {
        if (i != j) s += sim[i][j];
      }
      if (s > c.medoid_sum + eps || (s > c.medoid_sum - eps && reasons[i] < reasons[c.medoid])) {
        c.medoid_sum = std::max(s, c.medoid_sum);
        c.medoid = i;
      }
    }
    if (!best || c.size > best->size) {
      best = c;
    } else if (c.size == best->size) {
      if (c.medoid_sum > best->medoid_sum + eps ||
          (c.medoid_sum > best->medoid_sum - eps && reasons[c.medoid] < reasons[best->medoid])) {
        best = c;
      }
    }
  }
  return reasons[best->medoid];
}

std::vector<std::string> select_reasons(const std::vector<ValidationResponse>& responses, const Verdict& verdict) {
  std::vector<std::string> out;
  for (const auto& p : verdict.key.parameters) {
    std::vector<std::string> pool;
    for (const auto& r : responses) {
      if (canonical_key(r) != verdict.key) continue;
      for (std::size_t i = 0; i < r.err_parameters.size() && i < r.reasons.size(); ++i) {
        if (r.err_parameters[i] == p) pool.push_back(r.reasons[i]);
      }
    }
    out.push_back(pool.empty() ? std::string() : select_representative(pool));
  }
  return out;
}

json verdict_json(const Verdict& v) {
  return {{"target", v.target},
          {"hasError", v.has_error()},
          {"errParameters", v.err_parameters()},
          {"reasons", v.reasons},
          {"tally", v.tally},
          {"total_votes", v.total_votes},
          {"discarded_count", v.discarded_count}};
}

void PipelineConfig::validate() const {
  if (num_queries == 0) throw std::invalid_argument("num_queries must be at least 1");
}

Verdict validate_file(const ConfigFile& target, Backend& backend, const ShotDatabase& shots,
                      const PipelineConfig& config, const TargetInfo& info) {
  config.validate();
  const auto fp = fingerprint(target);
  Rng rng(mix64(config.seed ^ fp));
  auto selected = select_shots(shots, target.project(), config.shots, config.strategy, rng,
                               SelectionTarget{&target, info.subcategory});
  const auto estimator = backend.estimator();
  auto prompt = fit_to_budget(build_prompt(target, std::move(selected), config.question_template, estimator),
                              backend.config().token_limit, estimator);

  std::vector<ValidationResponse> accepted;
  std::vector<AuditEntry> audit;
  std::vector<CallContext> pending;
  for (std::size_t i = 0; i < config.num_queries; ++i) pending.push_back({i, 0});
  std::vector<std::optional<ValidationResponse>> by_slot(config.num_queries);

  while (!pending.empty()) {
    auto results = query_calls(backend, prompt, pending);
    std::vector<CallContext> again;
    for (auto& res : results) {
      AuditEntry entry{res.call.slot, res.call.attempt, "", "", res.text.value_or("")};
      if (res.error) {
        const auto kind = res.error->kind();
        if (kind == BackendErrorKind::Auth || kind == BackendErrorKind::Precondition) throw *res.error;
        entry.outcome = "backend-error";
        entry.detail = res.error->what();
      } else {
        try {
          auto r = parse_response(*res.text);
          if (auto rule = validate_response(r)) {
            entry.outcome = "rejected-" + std::string(to_string(*rule));
          } else {
            entry.outcome = "accepted";
            by_slot[res.call.slot] = std::move(r);
          }
        } catch (const FormatError& e) {
          entry.outcome = "format-error";
          entry.detail = e.what();
        }
      }
      if (entry.outcome != "accepted" && res.call.attempt < config.retries) {
        again.push_back({res.call.slot, res.call.attempt + 1});
      }
      audit.push_back(std::move(entry));
    }
    pending = std::move(again);
  }
  for (auto& r : by_slot) {
    if (r) accepted.push_back(std::move(*r));
  }
  if (accepted.empty()) {
    throw ValidationFailed("no usable answer after " + std::to_string(audit.size()) + " queries");
  }
  auto v = vote(accepted);
  v.target_fingerprint = fp;
  v.target = info.label;
  v.discarded_count = audit.size() - accepted.size();
  v.audit = std::move(audit);
  return v;
}

Verdict validate_diff(const ConfigDiff& diff, Backend& backend, const ShotDatabase& shots,
                      const PipelineConfig& config, const TargetInfo& info) {
  return validate_file(diff_to_snippet(diff), backend, shots, config, info);
}

}  // namespace cfgval
