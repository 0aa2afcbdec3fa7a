#include "cfgval/prompting.hpp"

#include <algorithm>
#include <numeric>

#include "cfgval/tfidf.hpp"

namespace cfgval {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string file_block(const ConfigFile& f) {
  const auto fmt = f.format();
  return "```" + std::string(fmt == ConfigFormat::Xml ? "xml" : "ini") + "\n" + render_config(f, fmt) + "```\n";
}

std::vector<std::string> name_tokens(const ConfigFile& f) {
  std::vector<std::string> out;
  for (const auto& e : f.entries()) {
    auto t = tokenize(e.name);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

// Candidates in preference order for one label.
std::vector<const Shot*> rank_candidates(const std::vector<const Shot*>& same,
                                         const std::vector<const Shot*>& other, SelectionStrategy strategy,
                                         Rng& rng, const SelectionTarget& target) {
  auto a = same;
  auto b = other;
  if (strategy == SelectionStrategy::CosineSimilarity) {
    if (target.file == nullptr) throw std::invalid_argument("cosine selection needs the target file");
    std::vector<std::vector<std::string>> docs{name_tokens(*target.file)};
    for (const auto* s : a) docs.push_back(name_tokens(s->labeled.file));
    for (const auto* s : b) docs.push_back(name_tokens(s->labeled.file));
    auto vecs = tfidf_vectors(docs);
    std::size_t next = 1;
    for (auto* group : {&a, &b}) {
      std::vector<std::pair<double, const Shot*>> scored;
      for (const auto* s : *group) scored.emplace_back(cosine(vecs[0], vecs[next++]), s);
      std::stable_sort(scored.begin(), scored.end(),
                       [](const auto& x, const auto& y) { return x.first > y.first; });
      group->clear();
      for (const auto& [score, s] : scored) group->push_back(s);
    }
  } else {
    rng.shuffle(a);
    rng.shuffle(b);
  }
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::size_t estimate_with(const TokenEstimator& estimator, const std::string& text) {
  return estimator ? estimator(text) : estimate_tokens(text);
}

}  // namespace

Shot make_shot(LabeledFile labeled) {
  Shot s;
  s.answer = ground_truth_answer(labeled);
  s.source_project = labeled.file.project();
  s.labeled = std::move(labeled);
  return s;
}

ShotDatabase::ShotDatabase(std::vector<Shot> shots) : shots_(std::move(shots)) {
  for (const auto& s : shots_) {
    const bool misconfig = s.labeled.label == Label::Misconfig;
    if (s.answer.has_error != misconfig) {
      throw std::invalid_argument("shot " + s.labeled.id + ": answer disagrees with its label");
    }
    if (misconfig && (!s.labeled.injected || s.answer.err_parameters != std::vector{s.labeled.injected->parameter})) {
      throw std::invalid_argument("shot " + s.labeled.id + ": answer must flag exactly the injected parameter");
    }
  }
}

ShotDatabase ShotDatabase::from_dataset(const Dataset& d) {
  std::vector<Shot> shots;
  for (const auto* r : d.select(Split::ShotPool)) shots.push_back(make_shot(r->labeled));
  return ShotDatabase(std::move(shots));
}

std::vector<ShotCombination> shot_sweep(std::size_t max_total) {
  std::vector<ShotCombination> out;
  for (std::size_t n = 0; n <= max_total; ++n) {
    for (std::size_t m = 0; m <= n; ++m) out.push_back({n - m, m});
  }
  return out;
}

std::string_view to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::Random: return "random";
    case SelectionStrategy::SameSubcategory: return "same-subcategory";
    case SelectionStrategy::CosineSimilarity: return "cosine";
  }
  return "?";
}

SelectionStrategy strategy_from_string(std::string_view s) {
  for (auto v : {SelectionStrategy::Random, SelectionStrategy::SameSubcategory, SelectionStrategy::CosineSimilarity}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown selection strategy '" + std::string(s) + "'");
}

std::vector<Shot> select_shots(const ShotDatabase& db, std::string_view project, ShotCombination combo,
                               SelectionStrategy strategy, Rng& rng, const SelectionTarget& target) {
  if (strategy == SelectionStrategy::SameSubcategory && !target.subcategory) {
    throw std::invalid_argument("same-subcategory selection needs the target's sub-category");
  }
  std::vector<Shot> out;
  for (auto [label, count] : {std::pair{Label::ValidConfig, combo.valid_count}, {Label::Misconfig, combo.misconfig_count}}) {
    if (count == 0) continue;
    std::vector<const Shot*> same, other;
    for (const auto& s : db.shots()) {
      if (s.labeled.label != label) continue;
      if (strategy == SelectionStrategy::SameSubcategory && label == Label::Misconfig &&
          s.labeled.origin != *target.subcategory) {
        continue;
      }
      if (target.file != nullptr && fingerprint(s.labeled.file) == fingerprint(*target.file)) continue;
      (s.source_project == project ? same : other).push_back(&s);
    }
    auto ranked = rank_candidates(same, other, strategy, rng, target);
    if (ranked.size() < count) {
      throw InsufficientShots("need " + std::to_string(count) + " " + std::string(to_string(label)) +
                              " shots but only " + std::to_string(ranked.size()) + " are available");
    }
    for (std::size_t i = 0; i < count; ++i) out.push_back(*ranked[i]);
  }
  return out;
}

const std::string& default_question_template() {
  static const std::string q =
      "Are there any mistakes in the above configuration file for [PROJECT] version [VERSION]? "
      "Respond in a JSON format similar to the following:\n"
      "{\n"
      "  \"hasError\": boolean,  // true if any parameter is misconfigured, otherwise false\n"
      "  \"errParameter\": [],  // names of the misconfigured parameters; empty when hasError is false\n"
      "  \"reason\": []  // one explanation per entry of errParameter, in the same order\n"
      "}";
  return q;
}

std::string render_question(std::string_view question_template, std::string_view project,
                            std::string_view version) {
  std::string q(question_template);
  replace_all(q, "[PROJECT]", project);
  replace_all(q, "[VERSION]", version);
  return q;
}

Prompt::Prompt(std::vector<Shot> shots, ConfigFile target, std::string question_template,
               const TokenEstimator& estimator)
    : shots_(std::move(shots)), target_(std::move(target)), question_template_(std::move(question_template)) {
  if (target_.project().empty() || target_.version().empty()) {
    throw std::invalid_argument("the target file needs a project and a version");
  }
  for (const auto& s : shots_) {
    text_ += file_block(s.labeled.file);
    text_ += render_question(question_template_, s.labeled.file.project(), s.labeled.file.version());
    text_ += "\n" + to_json_text(s.answer) + "\n\n";
  }
  text_ += file_block(target_);
  text_ += render_question(question_template_, target_.project(), target_.version());
  text_ += "\n";
  token_estimate_ = estimate_with(estimator, text_);
}

Prompt build_prompt(const ConfigFile& target, std::vector<Shot> shots, const std::string& question_template,
                    const TokenEstimator& estimator) {
  std::stable_partition(shots.begin(), shots.end(),
                        [](const Shot& s) { return s.labeled.label == Label::ValidConfig; });
  return Prompt(std::move(shots), target, question_template, estimator);
}

Prompt fit_to_budget(const Prompt& prompt, std::size_t limit, const TokenEstimator& estimator) {
  if (limit == 0) throw std::invalid_argument("token limit must be positive");
  if (prompt.token_estimate() <= limit) return prompt;

  // Removal order: valid shots from the back, then misconfig shots from the back.
  const auto& all = prompt.shots();
  std::vector<std::size_t> drop_order;
  for (auto label : {Label::ValidConfig, Label::Misconfig}) {
    for (std::size_t i = all.size(); i-- > 0;) {
      if (all[i].labeled.label == label) drop_order.push_back(i);
    }
  }
  auto fit_around = [&](const ConfigFile& target) -> std::optional<Prompt> {
    std::vector<bool> keep(all.size(), true);
    for (std::size_t dropped = 0;; ++dropped) {
      std::vector<Shot> kept;
      for (std::size_t i = 0; i < all.size(); ++i) {
        if (keep[i]) kept.push_back(all[i]);
      }
      Prompt p(std::move(kept), target, prompt.question_template(), estimator);
      if (p.token_estimate() <= limit) return p;
      if (dropped == drop_order.size()) return std::nullopt;
      keep[drop_order[dropped]] = false;
    }
  };
  if (auto p = fit_around(prompt.target())) return *p;
  const auto compact = compress(prompt.target());
  if (auto p = fit_around(compact)) return *p;
  Prompt bare({}, compact, prompt.question_template(), estimator);
  throw BudgetExceeded("prompt needs " + std::to_string(bare.token_estimate()) +
                       " tokens without shots after compression; the limit is " + std::to_string(limit));
}

std::vector<ConfigFile> split_config(const ConfigFile& file, std::size_t max_entries) {
  if (max_entries == 0) throw std::invalid_argument("snippets need at least one entry");
  std::vector<ConfigFile> out;
  const auto& entries = file.entries();
  for (std::size_t i = 0; i < entries.size(); i += max_entries) {
    auto end = std::min(entries.size(), i + max_entries);
    out.push_back(file.with_entries({entries.begin() + static_cast<std::ptrdiff_t>(i),
                                     entries.begin() + static_cast<std::ptrdiff_t>(end)}));
  }
  if (out.empty()) out.push_back(file);
  return out;
}

}  // namespace cfgval
