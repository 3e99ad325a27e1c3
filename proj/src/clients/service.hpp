#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace thg::clients {

enum class RequestKind { Chat, Embed, Pageviews, Resolve };

const char* request_kind_name(RequestKind kind);
std::optional<RequestKind> parse_request_kind(std::string_view name);

// Sampling parameters travel as canonical strings so a request digest never
// depends on floating-point formatting.
using SamplingParams = std::map<std::string, std::string>;

// Pure function of its inputs: identical requests always share a digest.
std::string request_digest(RequestKind kind, std::string_view model, const SamplingParams& params,
                           std::string_view payload);

std::string pageview_payload(std::string_view title, std::string_view start,
                             std::string_view end);

struct ChatTranscript {
  std::string prompt;
  std::string response;
  std::string model_id;
  std::string request_digest;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

struct MonthCount {
  std::string month;  // YYYY-MM
  std::uint64_t views = 0;
  bool operator==(const MonthCount&) const = default;
};

// A 404 from the pageview service is an answer, not a failure: the title has
// no article, so callers treat the entity as unresolvable.
struct PageviewLookup {
  bool article_missing = false;
  std::vector<MonthCount> months;
};

inline constexpr const char* kPageviewModel = "wikimedia-pageviews/per-article/all-access/user";
inline constexpr const char* kResolveModel = "enwiki-title-resolver/redirects-1";

// ---- backends: the only code that touches the network ----------------------

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::string& model, const std::string& prompt,
                               const SamplingParams& params) = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<double> embed(const std::string& model, const std::string& text) = 0;
};

class PageviewBackend {
 public:
  virtual ~PageviewBackend() = default;
  virtual PageviewLookup monthly(const std::string& title, const std::string& start,
                                 const std::string& end) = 0;
};

// Resolves a title to its canonical article title following at most one
// redirect; nullopt when no article exists.
class TitleBackend {
 public:
  virtual ~TitleBackend() = default;
  virtual std::optional<std::string> resolve(const std::string& title) = 0;
};

// ---- response store ----------------------------------------------------------

// Content-addressed responses, JSONL of {digest, kind, response[, request]}.
// Write-once per digest; concurrent readers, serialized writers. When bound to
// a directory, each kind appends to its own <kind>.jsonl file.
class ResponseStore {
 public:
  ResponseStore() = default;

  // Loads a fixture or cache file. Corrupt entries fail the load with an error
  // naming the digest.
  void load(const std::filesystem::path& path);

  // Loads any existing <kind>.jsonl files and appends new entries there.
  void bind_directory(const std::filesystem::path& dir);

  std::optional<nlohmann::json> find(const std::string& digest) const;

  // Returns false (and keeps the original) when the digest is already stored.
  bool put(const std::string& digest, RequestKind kind, const nlohmann::json& response,
           const nlohmann::json& request = nullptr);

  std::size_t size() const;

  // Writes every entry, sorted by digest, as a standalone fixture file.
  void export_fixture(const std::filesystem::path& path) const;

 private:
  struct Entry {
    RequestKind kind;
    nlohmann::json response;
    nlohmann::json request;
  };

  void insert_checked(const std::string& digest, Entry entry, const std::string& origin);

  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Entry> entries_;
  std::optional<std::filesystem::path> dir_;
};

// Validates a stored response against the shape its kind requires.
void check_response_shape(RequestKind kind, const nlohmann::json& response,
                          const std::string& digest);

// ---- concurrency ---------------------------------------------------------------

// Bounds in-flight requests to `limit`, optionally spacing request starts by
// `min_interval`. Tracks the highest concurrency it ever admitted.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(std::size_t limit,
                              std::chrono::milliseconds min_interval = std::chrono::milliseconds(0));

  class Permit {
   public:
    explicit Permit(ConcurrencyLimiter& owner) : owner_(&owner) { owner_->acquire(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    ~Permit() { owner_->release(); }

   private:
    ConcurrencyLimiter* owner_;
  };

  std::size_t limit() const { return limit_; }
  std::size_t max_in_flight() const { return max_seen_.load(); }

 private:
  void acquire();
  void release();

  std::size_t limit_;
  std::chrono::milliseconds min_interval_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::atomic<std::size_t> max_seen_{0};
  std::chrono::steady_clock::time_point next_start_{};
};

// ---- client facade ---------------------------------------------------------------

struct ClientOptions {
  std::string chat_model = "default-chat";
  std::string embedding_model = "default-embedding";
  SamplingParams default_params = {{"temperature", "0"}};
  std::size_t parallelism = 4;
  std::chrono::milliseconds min_interval{0};
  int max_retries = 3;
  std::chrono::milliseconds retry_backoff{200};
  // Offline clients never reach a backend: a store miss is FixtureMissing.
  bool offline = false;
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t network_calls = 0;
};

struct Backends {
  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<EmbeddingBackend> embedding;
  std::shared_ptr<PageviewBackend> pageviews;
  std::shared_ptr<TitleBackend> titles;
};

// Uniform entry point for every remote dependency. Every request is looked up
// in the store by digest first; at most one backend call is ever made per
// digest, even under concurrent callers. Calls block until answered.
class ServiceClient {
 public:
  ServiceClient(ClientOptions options, std::shared_ptr<ResponseStore> store, Backends backends);

  ChatTranscript chat(const std::string& prompt, const SamplingParams& extra = {});
  EmbeddingVector embed(const std::string& text);
  PageviewLookup monthly_pageviews(const std::string& title, const std::string& start,
                                   const std::string& end);
  std::optional<std::string> resolve_title(const std::string& title);

  const ClientOptions& options() const { return options_; }
  CacheStats stats() const;
  void reset_stats();
  const ConcurrencyLimiter& limiter() const { return limiter_; }
  ResponseStore& store() { return *store_; }

 private:
  using Fetch = std::function<nlohmann::json()>;
  nlohmann::json fetch(RequestKind kind, const std::string& digest, const nlohmann::json& request,
                       bool has_backend, const Fetch& call);

  ClientOptions options_;
  std::shared_ptr<ResponseStore> store_;
  Backends backends_;
  ConcurrencyLimiter limiter_;
  std::mutex inflight_mu_;
  std::unordered_map<std::string, std::shared_future<nlohmann::json>> inflight_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
  std::atomic<std::uint64_t> network_calls_{0};
};

// Client answered purely from a fixture file; never touches the network.
std::shared_ptr<ServiceClient> replay_client(const std::filesystem::path& fixture_path,
                                             ClientOptions options = {});

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace thg::clients
