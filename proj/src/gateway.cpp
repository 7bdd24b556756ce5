#include "deideval/gateway.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "deideval/errors.hpp"

namespace deideval {

namespace {

using nlohmann::json;

constexpr int kMaxBackoffMs = 10'000;
constexpr int kConnectTimeoutSec = 10;
constexpr int kReadTimeoutSec = 300;

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

// Splits "http://host:port/v1" into origin and path prefix.
void split_base_url(const std::string& base_url, std::string* origin, std::string* prefix) {
  const auto scheme_end = base_url.find("://");
  const std::size_t path_start =
      base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) {
    *origin = base_url;
    prefix->clear();
  } else {
    *origin = base_url.substr(0, path_start);
    *prefix = base_url.substr(path_start);
  }
  while (!prefix->empty() && prefix->back() == '/') prefix->pop_back();
}

void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  static std::atomic<std::uint64_t> counter{0};
  const auto tmp = path.parent_path() /
                   (path.filename().string() + ".tmp." +
                    std::to_string(counter.fetch_add(1, std::memory_order_relaxed)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error("cache write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void make_private_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::filesystem::permissions(dir, std::filesystem::perms::owner_all,
                               std::filesystem::perm_options::replace);
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0F]);
  }
  return out;
}

struct Gateway::Backend {
  BackendConfig config;
  bool synthetic = false;
  std::function<std::string(const ChatRequest&)> handler;  // synthetic only
  std::map<std::string, std::string> fixtures;             // scripted only
  int fixture_delay_ms = 0;

  std::mutex slots_mutex;
  std::condition_variable slots_cv;
  int in_flight = 0;
};

Gateway::Gateway(std::filesystem::path cache_dir, bool offline)
    : cache_dir_(std::move(cache_dir)), offline_(offline) {
  make_private_dir(cache_dir_);
}

Gateway::~Gateway() = default;

void Gateway::register_backend(const BackendConfig& config) {
  auto backend = std::make_unique<Backend>();
  backend->config = config;
  if (config.backend_id.empty()) throw ConfigError("backend_id is empty");
  if (config.max_in_flight < 1) throw ConfigError("max_in_flight must be positive");
  if (config.kind == BackendConfig::Kind::kHttp) {
    if (config.base_url.empty()) {
      throw ConfigError("http backend " + config.backend_id + " requires base_url");
    }
  } else {
    if (config.fixture_path.empty()) {
      throw ConfigError("scripted backend " + config.backend_id + " requires a fixture path");
    }
    std::ifstream in(config.fixture_path, std::ios::binary);
    if (!in) throw MissingFileError(config.fixture_path.string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("fixture file " + config.fixture_path.string() + ": " + e.what());
    }
    backend->fixture_delay_ms = doc.value("delay_ms", 0);
    const auto responses = doc.find("responses");
    if (responses == doc.end() || !responses->is_object()) {
      throw ConfigError("fixture file " + config.fixture_path.string() +
                        " has no \"responses\" object");
    }
    for (const auto& [digest, value] : responses->items()) {
      if (!value.is_string()) {
        throw ConfigError("fixture response for " + digest + " is not a string");
      }
      backend->fixtures[digest] = value.get<std::string>();
    }
  }
  std::lock_guard<std::mutex> lock(mutex_);
  backends_[config.backend_id] = std::move(backend);
}

void Gateway::register_synthetic(const std::string& backend_id,
                                 std::function<std::string(const ChatRequest&)> handler,
                                 int max_in_flight) {
  auto backend = std::make_unique<Backend>();
  backend->config.backend_id = backend_id;
  backend->config.kind = BackendConfig::Kind::kScripted;
  backend->config.max_in_flight = max_in_flight;
  backend->synthetic = true;
  backend->handler = std::move(handler);
  std::lock_guard<std::mutex> lock(mutex_);
  backends_[backend_id] = std::move(backend);
}

bool Gateway::has_backend(const std::string& backend_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return backends_.count(backend_id) > 0;
}

void Gateway::set_response_observer(
    std::function<void(const std::string&, const std::string&, const std::string&)> observer) {
  std::lock_guard<std::mutex> lock(mutex_);
  observer_ = std::move(observer);
}

std::string Gateway::cache_key(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  const json doc = {
      {"backend_id", request.backend_id},
      {"model_id", request.model_id},
      {"messages", std::move(messages)},
      {"decode",
       {{"temperature", request.decode.temperature},
        {"max_output_tokens", request.decode.max_output_tokens}}},
  };
  return sha256_hex(doc.dump());
}

std::filesystem::path Gateway::cache_path(const std::string& digest) const {
  return cache_dir_ / digest.substr(0, 2) / (digest + ".json");
}

ChatResponse Gateway::complete(const ChatRequest& request) {
  Backend* backend = nullptr;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = backends_.find(request.backend_id);
    if (it == backends_.end()) throw UnknownBackendError(request.backend_id);
    backend = it->second.get();
  }

  const std::string digest = cache_key(request);
  const auto path = cache_path(digest);
  {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      json doc;
      try {
        doc = json::parse(in);
        ChatResponse response;
        response.text = doc.at("response_text").get<std::string>();
        response.from_cache = true;
        std::lock_guard<std::mutex> lock(mutex_);
        ++stats_.cache_hits;
        return response;
      } catch (const json::exception&) {
        // Unreadable cache entry: fall through and recompute it.
      }
    }
  }

  // Bounded concurrency per backend.
  {
    std::unique_lock<std::mutex> slots(backend->slots_mutex);
    backend->slots_cv.wait(slots,
                           [&] { return backend->in_flight < backend->config.max_in_flight; });
    ++backend->in_flight;
    std::lock_guard<std::mutex> lock(mutex_);
    stats_.max_in_flight_observed = std::max(stats_.max_in_flight_observed, backend->in_flight);
  }

  ChatResponse response;
  try {
    response = dispatch(*backend, request, digest);
  } catch (...) {
    {
      std::lock_guard<std::mutex> slots(backend->slots_mutex);
      --backend->in_flight;
    }
    backend->slots_cv.notify_one();
    throw;
  }
  {
    std::lock_guard<std::mutex> slots(backend->slots_mutex);
    --backend->in_flight;
  }
  backend->slots_cv.notify_one();

  json entry = {
      {"digest", digest},
      {"backend_id", request.backend_id},
      {"model_id", request.model_id},
      {"response_text", response.text},
  };
  make_private_dir(path.parent_path());
  write_file_atomically(path, entry.dump(2) + "\n");

  std::function<void(const std::string&, const std::string&, const std::string&)> observer;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++stats_.backend_calls;
    stats_.http_attempts += response.attempts;
    observer = observer_;
  }
  if (observer) observer(request.backend_id, digest, response.text);
  return response;
}

ChatResponse Gateway::dispatch(Backend& backend, const ChatRequest& request,
                               const std::string& digest) {
  const auto start = std::chrono::steady_clock::now();
  ChatResponse response;

  if (backend.synthetic) {
    response.text = backend.handler(request);
    response.attempts = 1;
  } else if (backend.config.kind == BackendConfig::Kind::kScripted) {
    const auto it = backend.fixtures.find(digest);
    if (it == backend.fixtures.end()) throw FixtureMissError(digest);
    if (backend.fixture_delay_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backend.fixture_delay_ms));
    }
    response.text = it->second;
    response.attempts = 1;
  } else {
    if (offline_) throw OfflineViolationError(backend.config.backend_id);

    std::string origin;
    std::string prefix;
    split_base_url(backend.config.base_url, &origin, &prefix);

    json messages = json::array();
    for (const auto& m : request.messages) {
      messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    const json body_doc = {
        {"model", request.model_id},
        {"messages", std::move(messages)},
        {"temperature", request.decode.temperature},
        {"max_tokens", request.decode.max_output_tokens},
    };
    const std::string body = body_doc.dump();

    httplib::Headers headers;
    if (!backend.config.api_key_env.empty()) {
      if (const char* key = std::getenv(backend.config.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
    }

    httplib::Client client(origin);
    client.set_connection_timeout(kConnectTimeoutSec, 0);
    client.set_read_timeout(kReadTimeoutSec, 0);

    const RetryPolicy& retry = backend.config.retry;
    int last_status = 0;
    for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
      ++response.attempts;
      auto result = client.Post(prefix + "/chat/completions", headers, body, "application/json");
      if (result) {
        last_status = result->status;
        if (result->status >= 200 && result->status < 300) {
          try {
            const json doc = json::parse(result->body);
            response.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
          } catch (const json::exception& e) {
            throw Error("backend " + backend.config.backend_id +
                        " returned malformed completion JSON: " + e.what());
          }
          response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - start)
                                    .count();
          return response;
        }
        if (!retryable_status(result->status)) break;
      } else {
        last_status = 0;  // transport failure
      }
      if (attempt < retry.max_attempts) {
        const int backoff =
            std::min(kMaxBackoffMs, retry.base_backoff_ms * (1 << (attempt - 1)));
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      }
    }
    throw ExhaustedRetriesError(backend.config.backend_id, last_status, response.attempts);
  }

  response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return response;
}

GatewayStats Gateway::stats() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return stats_;
}

}  // namespace deideval
