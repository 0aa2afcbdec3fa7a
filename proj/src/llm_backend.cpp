#include "cfgval/llm_backend.hpp"

#include <cstdlib>
#include <regex>
#include <thread>

#include "httplib.h"

namespace cfgval {

using nlohmann::json;

void BackendConfig::validate() const {
  if (model_id.empty()) throw std::invalid_argument("backend model id is empty");
  if (!(temperature >= 0.0 && temperature <= 2.0)) throw std::invalid_argument("temperature must be in [0, 2]");
  if (token_limit == 0) throw std::invalid_argument("token limit must be positive");
  if (max_parallel == 0) throw std::invalid_argument("max_parallel must be positive");
  if (transport_attempts < 1) throw std::invalid_argument("transport attempts must be at least 1");
  if (request_timeout.count() <= 0) throw std::invalid_argument("request timeout must be positive");
}

std::string_view to_string(BackendErrorKind k) {
  switch (k) {
    case BackendErrorKind::Transport: return "transport";
    case BackendErrorKind::Timeout: return "timeout";
    case BackendErrorKind::RateLimited: return "rate-limited";
    case BackendErrorKind::Http: return "http";
    case BackendErrorKind::Auth: return "auth";
    case BackendErrorKind::Precondition: return "precondition";
  }
  return "?";
}

std::string query(Backend& backend, const Prompt& prompt, const CallContext& ctx) {
  const auto limit = backend.config().token_limit;
  const auto needed = backend.estimator()(prompt.text());
  if (needed > limit) {
    throw BackendError(BackendErrorKind::Precondition, "prompt needs " + std::to_string(needed) +
                                                           " tokens but the backend accepts " +
                                                           std::to_string(limit));
  }
  return backend.complete(prompt, ctx);
}

std::vector<SlotResult> query_calls(Backend& backend, const Prompt& prompt, const std::vector<CallContext>& calls) {
  std::vector<SlotResult> out(calls.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < calls.size(); i = next++) {
      out[i].call = calls[i];
      try {
        out[i].text = query(backend, prompt, calls[i]);
      } catch (const BackendError& e) {
        out[i].error = e;
      }
    }
  };
  const auto workers = std::min(backend.config().max_parallel, calls.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

std::vector<SlotResult> query_batch(Backend& backend, const Prompt& prompt, std::size_t count) {
  if (count == 0) throw std::invalid_argument("query_batch needs at least one query");
  std::vector<CallContext> calls;
  for (std::size_t i = 0; i < count; ++i) calls.push_back({i, 0});
  return query_calls(backend, prompt, calls);
}

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(BackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  config_.validate();
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url)) {
    throw std::invalid_argument("endpoint '" + config_.endpoint + "' is not an http(s) URL");
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
}

json HttpBackend::request_body(const Prompt& prompt) const {
  return {{"model", config_.model_id},
          {"temperature", config_.temperature},
          {"messages", json::array({{{"role", "user"}, {"content", prompt.text()}}})}};
}

std::string HttpBackend::completion_text(const std::string& body) {
  try {
    auto j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(BackendErrorKind::Http, std::string("unexpected completion body: ") + e.what(), 200);
  }
}

std::string HttpBackend::attempt(const std::string& body) {
  httplib::Client cli(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.request_timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = cli.Post(path_, headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw BackendError(BackendErrorKind::Timeout, "request timed out (" + httplib::to_string(err) + ")");
    }
    throw BackendError(BackendErrorKind::Transport, "request failed: " + httplib::to_string(err));
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw BackendError(BackendErrorKind::Auth, "authentication rejected (HTTP " + std::to_string(status) + ")", status);
  }
  if (status == 429) throw BackendError(BackendErrorKind::RateLimited, "rate limited (HTTP 429)", status);
  if (status < 200 || status >= 300) {
    throw BackendError(BackendErrorKind::Http, "HTTP " + std::to_string(status), status);
  }
  return completion_text(res->body);
}

std::string HttpBackend::complete(const Prompt& prompt, const CallContext& ctx) {
  const auto body = request_body(prompt).dump();
  auto delay = config_.initial_backoff;
  for (int i = 1;; ++i) {
    try {
      return attempt(body);
    } catch (const BackendError& e) {
      if (!e.retryable() || i >= config_.transport_attempts) throw;
    }
    // Jitter in [0.75, 1.25) of the nominal delay, derived from the call so
    // concurrent slots do not retry in lockstep.
    const double u = unit_interval(mix64(fnv1a(prompt.text()) ^ mix64(ctx.slot * 131 + ctx.attempt * 7 + i)));
    sleeper_(std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * (0.75 + 0.5 * u))));
    delay *= 2;
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(MockBehavior b) {
  switch (b) {
    case MockBehavior::EchoGroundTruth: return "echo";
    case MockBehavior::AlwaysValid: return "always-valid";
    case MockBehavior::Malformed: return "malformed";
    case MockBehavior::NoiseWithRate: return "noise";
  }
  return "?";
}

MockBehavior mock_behavior_from_string(std::string_view s) {
  for (auto b : {MockBehavior::EchoGroundTruth, MockBehavior::AlwaysValid, MockBehavior::Malformed,
                 MockBehavior::NoiseWithRate}) {
    if (to_string(b) == s) return b;
  }
  throw std::invalid_argument("unknown mock behavior '" + std::string(s) + "'");
}

void MockScript::validate() const {
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw std::invalid_argument("noise rate must be in [0, 1]");
}

MockBackend::MockBackend(BackendConfig config, MockScript script, TruthLookup truth)
    : config_(std::move(config)), script_(std::move(script)), truth_(std::move(truth)) {
  config_.validate();
  script_.validate();
}

ValidationResponse MockBackend::truth_for(const ConfigFile& target) const {
  std::optional<ValidationResponse> t;
  if (truth_) t = truth_(target);
  if (!t) {
    throw BackendError(BackendErrorKind::Precondition,
                       "mock backend has no ground truth for the " + target.project() + " target");
  }
  return *t;
}

std::string MockBackend::complete(const Prompt& prompt, const CallContext& ctx) {
  ++calls_;
  const auto now = ++in_flight_;
  auto seen = max_in_flight_.load();
  while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
  }
  struct Leave {
    std::atomic<std::size_t>& n;
    ~Leave() { --n; }
  } leave{in_flight_};
  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);

  const auto& target = prompt.target();
  const auto fp = fingerprint(target);
  if (!script_.scripted.empty()) {
    std::size_t index;
    {
      std::lock_guard lock(mu_);
      index = call_index_[fp]++;
    }
    if (auto it = script_.scripted.find({fp, index}); it != script_.scripted.end()) return it->second;
  }

  switch (script_.behavior) {
    case MockBehavior::AlwaysValid:
      return to_json_text(ValidationResponse{});
    case MockBehavior::Malformed:
      return "The configuration mostly looks reasonable, although a few values could be tuned.";
    case MockBehavior::EchoGroundTruth:
      return to_json_text(truth_for(target));
    case MockBehavior::NoiseWithRate: {
      auto truth = truth_for(target);
      const auto h = mix64(script_.seed ^ mix64(fp ^ mix64(ctx.slot ^ mix64(ctx.attempt))));
      if (unit_interval(h) >= script_.noise_rate) return to_json_text(truth);
      if (truth.has_error || target.size() == 0) return to_json_text(ValidationResponse{});
      const auto& e = target.entries()[mix64(h) % target.size()];
      return to_json_text(ValidationResponse{true, {e.name}, {"the value '" + e.value + "' looks wrong for " + e.name}});
    }
  }
  return {};
}

}  // namespace cfgval
