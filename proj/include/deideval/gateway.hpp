#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace deideval {

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;
};

struct DecodeParams {
  double temperature = 0.0;  // fixed low default for reproducibility
  int max_output_tokens = 2048;
};

struct ChatRequest {
  std::string backend_id;
  std::string model_id;
  std::vector<ChatMessage> messages;
  DecodeParams decode;
};

struct ChatResponse {
  std::string text;
  bool from_cache = false;
  std::int64_t latency_ms = 0;
  int attempts = 0;  // HTTP attempts made; 0 on cache hit
};

struct RetryPolicy {
  int max_attempts = 4;
  int base_backoff_ms = 250;
};

struct BackendConfig {
  enum class Kind { kHttp, kScripted };

  std::string backend_id;
  Kind kind = Kind::kScripted;
  std::string base_url;      // http only; OpenAI-compatible prefix, no trailing slash needed
  std::string api_key_env;   // http only; optional env var holding the bearer token
  std::filesystem::path fixture_path;  // scripted only
  int max_in_flight = 4;
  RetryPolicy retry;
};

struct GatewayStats {
  std::int64_t backend_calls = 0;   // completions served by a backend (not the cache)
  std::int64_t cache_hits = 0;
  std::int64_t http_attempts = 0;   // individual HTTP tries, retries included
  int max_in_flight_observed = 0;
};

// Uniform access to chat-completion backends with a content-addressed on-disk
// response cache, bounded retries, and a per-backend concurrency cap.
//
// The cache stores prompts and completions verbatim, clinical text included;
// the directory is created with owner-only permissions and must be treated as
// sensitively as the corpus itself.
class Gateway {
 public:
  explicit Gateway(std::filesystem::path cache_dir, bool offline = false);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void register_backend(const BackendConfig& config);

  // Test and tooling seam: a backend whose completions come from an
  // in-process handler. Behaves like kind=scripted for caching and stats.
  void register_synthetic(const std::string& backend_id,
                          std::function<std::string(const ChatRequest&)> handler,
                          int max_in_flight = 4);

  bool has_backend(const std::string& backend_id) const;

  // Observes every completion served by a backend (cache hits excluded).
  // Used by the fixture recorder.
  void set_response_observer(
      std::function<void(const std::string& backend_id, const std::string& digest,
                         const std::string& text)>
          observer);

  // Serves from cache when possible, otherwise calls the backend with
  // bounded retries and exponential backoff, caching the result.
  ChatResponse complete(const ChatRequest& request);

  GatewayStats stats() const;

  // Stable content digest over backend, model, messages, and decode params.
  static std::string cache_key(const ChatRequest& request);

 private:
  struct Backend;

  ChatResponse dispatch(Backend& backend, const ChatRequest& request, const std::string& digest);
  std::filesystem::path cache_path(const std::string& digest) const;

  std::filesystem::path cache_dir_;
  bool offline_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Backend>> backends_;
  GatewayStats stats_;
  std::function<void(const std::string&, const std::string&, const std::string&)> observer_;
};

std::string sha256_hex(std::string_view data);

}  // namespace deideval
