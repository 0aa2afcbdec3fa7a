#include "cfgval/framework.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "cfgval/spec_io.hpp"

namespace cfgval {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, _] : obj.items()) {
    if (!known.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

void FrameworkConfig::validate() const {
  backend_config.validate();
  mock.validate();
  pipeline.validate();
}

FrameworkConfig framework_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, "config", {"backend", "num_queries", "retries", "shots", "strategy", "seed", "specs", "shot_db",
                               "question_template"});
  FrameworkConfig c;
  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    reject_unknown(b, "backend", {"kind", "model", "temperature", "token_limit", "endpoint", "api_key_env",
                                  "timeout_ms", "max_parallel", "transport_attempts", "initial_backoff_ms", "mock"});
    std::string kind = "mock";
    read(b, "kind", kind);
    if (kind == "http") {
      c.backend = BackendKind::Http;
    } else if (kind == "mock") {
      c.backend = BackendKind::Mock;
    } else {
      throw ConfigError("backend kind must be 'http' or 'mock', not '" + kind + "'");
    }
    auto& bc = c.backend_config;
    read(b, "model", bc.model_id);
    read(b, "temperature", bc.temperature);
    read(b, "token_limit", bc.token_limit);
    read(b, "endpoint", bc.endpoint);
    read(b, "api_key_env", bc.api_key_env);
    read(b, "max_parallel", bc.max_parallel);
    read(b, "transport_attempts", bc.transport_attempts);
    long long ms = bc.request_timeout.count();
    read(b, "timeout_ms", ms);
    bc.request_timeout = std::chrono::milliseconds(ms);
    ms = bc.initial_backoff.count();
    read(b, "initial_backoff_ms", ms);
    bc.initial_backoff = std::chrono::milliseconds(ms);
    if (b.contains("mock")) {
      const auto& m = b.at("mock");
      reject_unknown(m, "backend.mock", {"behavior", "noise_rate", "seed"});
      std::string behavior(to_string(c.mock.behavior));
      read(m, "behavior", behavior);
      try {
        c.mock.behavior = mock_behavior_from_string(behavior);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      read(m, "noise_rate", c.mock.noise_rate);
      read(m, "seed", c.mock.seed);
    }
  }
  auto& p = c.pipeline;
  read(j, "num_queries", p.num_queries);
  read(j, "retries", p.retries);
  read(j, "seed", p.seed);
  read(j, "question_template", p.question_template);
  if (j.contains("shots")) {
    const auto& s = j.at("shots");
    reject_unknown(s, "shots", {"valid", "misconfig"});
    read(s, "valid", p.shots.valid_count);
    read(s, "misconfig", p.shots.misconfig_count);
  }
  if (j.contains("strategy")) {
    std::string s;
    read(j, "strategy", s);
    try {
      p.strategy = strategy_from_string(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("specs")) {
    std::vector<std::string> specs;
    if (j.at("specs").is_string()) {
      specs.push_back(j.at("specs").get<std::string>());
    } else {
      read(j, "specs", specs);
    }
    for (const auto& s : specs) c.spec_paths.push_back(resolve(base_dir, s));
  }
  if (j.contains("shot_db")) {
    std::string s;
    read(j, "shot_db", s);
    c.shot_db = resolve(base_dir, s);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json framework_config_to_json(const FrameworkConfig& c) {
  const auto& bc = c.backend_config;
  json mock = {{"behavior", to_string(c.mock.behavior)}, {"noise_rate", c.mock.noise_rate}, {"seed", c.mock.seed}};
  json j = {
      {"backend",
       {{"kind", c.backend == BackendKind::Http ? "http" : "mock"},
        {"model", bc.model_id},
        {"temperature", bc.temperature},
        {"token_limit", bc.token_limit},
        {"endpoint", bc.endpoint},
        {"api_key_env", bc.api_key_env},
        {"timeout_ms", bc.request_timeout.count()},
        {"max_parallel", bc.max_parallel},
        {"transport_attempts", bc.transport_attempts},
        {"initial_backoff_ms", bc.initial_backoff.count()},
        {"mock", mock}}},
      {"num_queries", c.pipeline.num_queries},
      {"retries", c.pipeline.retries},
      {"shots", {{"valid", c.pipeline.shots.valid_count}, {"misconfig", c.pipeline.shots.misconfig_count}}},
      {"strategy", to_string(c.pipeline.strategy)},
      {"seed", c.pipeline.seed},
      {"question_template", c.pipeline.question_template},
  };
  json specs = json::array();
  for (const auto& s : c.spec_paths) specs.push_back(s.string());
  j["specs"] = specs;
  if (c.shot_db) j["shot_db"] = c.shot_db->string();
  return j;
}

FrameworkConfig load_framework_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
  return framework_config_from_json(j, path.parent_path());
}

std::vector<SpecSet> load_specs(const std::vector<std::filesystem::path>& paths) {
  std::vector<SpecSet> out;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out.push_back(load_spec_set(f));
    } else {
      out.push_back(load_spec_set(p));
    }
  }
  return out;
}

std::unique_ptr<Backend> make_backend(const FrameworkConfig& c, TruthLookup truth) {
  if (c.backend == BackendKind::Http) return std::make_unique<HttpBackend>(c.backend_config);
  return std::make_unique<MockBackend>(c.backend_config, c.mock, std::move(truth));
}

}  // namespace cfgval
