#pragma once

// Text-in/text-out model access: a backend interface, bounded parallel
// batch querying, an HTTP chat-completion client and a scripted mock.

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfgval/prompting.hpp"
#include "cfgval/response.hpp"

namespace cfgval {

struct BackendConfig {
  std::string model_id = "gpt-4";
  double temperature = 0.2;
  std::size_t token_limit = 8192;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  /// Name of the environment variable holding the API key.
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::milliseconds request_timeout{60000};
  std::size_t max_parallel = 4;
  /// Transport attempts per call, including the first.
  int transport_attempts = 5;
  std::chrono::milliseconds initial_backoff{1000};

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class BackendErrorKind { Transport, Timeout, RateLimited, Http, Auth, Precondition };

std::string_view to_string(BackendErrorKind k);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what, int status = 0)
      : std::runtime_error(what), kind_(kind), status_(status) {}
  BackendErrorKind kind() const { return kind_; }
  int status() const { return status_; }
  bool retryable() const {
    return kind_ == BackendErrorKind::Transport || kind_ == BackendErrorKind::Timeout ||
           kind_ == BackendErrorKind::RateLimited ||
           (kind_ == BackendErrorKind::Http && (status_ == 408 || status_ >= 500));
  }

 private:
  BackendErrorKind kind_;
  int status_;
};

/// Identifies one call within a batch: the query slot and how many times
/// that slot has already been re-asked after an unusable answer.
struct CallContext {
  std::size_t slot = 0;
  std::size_t attempt = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual const BackendConfig& config() const = 0;
  /// Counts tokens the way this backend's model does.
  virtual TokenEstimator estimator() const { return estimate_tokens; }
  /// One completion. Implementations must be safe to call concurrently.
  virtual std::string complete(const Prompt& prompt, const CallContext& ctx) = 0;
};

/// Checks the token budget, then asks the backend once. Over-budget prompts
/// raise a Precondition error without contacting the backend.
std::string query(Backend& backend, const Prompt& prompt, const CallContext& ctx = {});

struct SlotResult {
  CallContext call;
  std::optional<std::string> text;
  /// Set when the call failed after the backend's own retries.
  std::optional<BackendError> error;
};

/// Runs the calls with at most backend.config().max_parallel in flight.
/// Results are in the order of `calls`.
std::vector<SlotResult> query_calls(Backend& backend, const Prompt& prompt, const std::vector<CallContext>& calls);

/// `count` first-attempt calls on slots 0..count-1.
std::vector<SlotResult> query_batch(Backend& backend, const Prompt& prompt, std::size_t count);

/// Waits between transport attempts; injectable so tests need not sleep.
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Chat-completion over HTTP(S): the prompt is sent as a single user
/// message and the first choice's message content is returned. Retries
/// transport faults, timeouts, 408, 429 and 5xx with jittered exponential
/// backoff; 401/403 and other 4xx fail at once.
class HttpBackend : public Backend {
 public:
  /// Reads the API key from the environment variable named in the config;
  /// an unset variable means no Authorization header.
  explicit HttpBackend(BackendConfig config, Sleeper sleeper = {});

  const BackendConfig& config() const override { return config_; }
  std::string complete(const Prompt& prompt, const CallContext& ctx) override;

  /// Request body for one prompt.
  nlohmann::json request_body(const Prompt& prompt) const;
  /// Extracts the completion text; throws BackendError on a malformed body.
  static std::string completion_text(const std::string& body);

 private:
  std::string attempt(const std::string& body);

  BackendConfig config_;
  Sleeper sleeper_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_;
};

enum class MockBehavior { EchoGroundTruth, AlwaysValid, Malformed, NoiseWithRate };

std::string_view to_string(MockBehavior b);
MockBehavior mock_behavior_from_string(std::string_view s);

struct MockScript {
  MockBehavior behavior = MockBehavior::EchoGroundTruth;
  /// NoiseWithRate: probability that an answer is corrupted.
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
  /// Fixed responses keyed by (target fingerprint, call index), where the
  /// call index counts calls for that target in arrival order. Unscripted
  /// calls fall back to `behavior`.
  std::map<std::pair<std::uint64_t, std::size_t>, std::string> scripted;

  void validate() const;
};

/// Ground truth for a target file, or nullopt when unknown.
using TruthLookup = std::function<std::optional<ValidationResponse>(const ConfigFile&)>;

/// Deterministic stand-in for a model. EchoGroundTruth answers with the
/// truth; NoiseWithRate does the same but, with probability p per call,
/// answers "no error" for a misconfigured file or flags a random entry of
/// a valid one. The corruption draw is a hash of (seed, target, slot,
/// attempt), so results do not depend on scheduling.
class MockBackend : public Backend {
 public:
  MockBackend(BackendConfig config, MockScript script, TruthLookup truth = {});

  const BackendConfig& config() const override { return config_; }
  std::string complete(const Prompt& prompt, const CallContext& ctx) override;

  std::size_t calls() const { return calls_.load(); }
  std::size_t max_in_flight() const { return max_in_flight_.load(); }
  /// Optional artificial latency, used to exercise concurrency.
  void set_latency(std::chrono::milliseconds d) { latency_ = d; }

 private:
  ValidationResponse truth_for(const ConfigFile& target) const;

  BackendConfig config_;
  MockScript script_;
  TruthLookup truth_;
  std::chrono::milliseconds latency_{0};
  std::mutex mu_;
  std::map<std::uint64_t, std::size_t> call_index_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> max_in_flight_{0};
};

}  // namespace cfgval
