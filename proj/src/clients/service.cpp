#include "clients/service.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/files.hpp"
#include "common/text.hpp"

namespace thg::clients {

using nlohmann::json;

const char* request_kind_name(RequestKind kind) {
  switch (kind) {
    case RequestKind::Chat: return "chat";
    case RequestKind::Embed: return "embed";
    case RequestKind::Pageviews: return "pageviews";
    case RequestKind::Resolve: return "resolve";
  }
  return "chat";
}

std::optional<RequestKind> parse_request_kind(std::string_view name) {
  if (name == "chat") return RequestKind::Chat;
  if (name == "embed") return RequestKind::Embed;
  if (name == "pageviews") return RequestKind::Pageviews;
  if (name == "resolve") return RequestKind::Resolve;
  return std::nullopt;
}

std::string request_digest(RequestKind kind, std::string_view model, const SamplingParams& params,
                           std::string_view payload) {
  // Unit/record separators keep field boundaries unambiguous.
  std::string buf = "thg-v1\x1f";
  buf += request_kind_name(kind);
  buf += '\x1f';
  buf += model;
  buf += '\x1f';
  for (const auto& [k, v] : params) {
    buf += k;
    buf += '=';
    buf += v;
    buf += '\x1e';
  }
  buf += '\x1f';
  buf += payload;
  return sha256_hex(buf);
}

std::string pageview_payload(std::string_view title, std::string_view start,
                             std::string_view end) {
  std::string p(title);
  p += '\x1e';
  p += start;
  p += '\x1e';
  p += end;
  return p;
}

// ---- response store ------------------------------------------------------------

namespace {

bool is_hex_digest(const std::string& s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

json request_json(RequestKind kind, const std::string& model, const SamplingParams& params,
                  const std::string& payload) {
  json r = json::object();
  r["kind"] = request_kind_name(kind);
  r["model"] = model;
  r["params"] = params;
  r["payload"] = payload;
  return r;
}

std::string digest_of_request(const json& request) {
  const auto kind = parse_request_kind(request.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown kind");
  return request_digest(*kind, request.at("model").get<std::string>(),
                        request.at("params").get<SamplingParams>(),
                        request.at("payload").get<std::string>());
}

}  // namespace

void check_response_shape(RequestKind kind, const json& response, const std::string& digest) {
  auto corrupt = [&](const std::string& why) {
    fail(ErrorCode::FixtureCorrupt, "entry " + digest + ": " + why);
  };
  switch (kind) {
    case RequestKind::Chat:
      if (!response.is_string()) corrupt("chat response must be a string");
      break;
    case RequestKind::Embed:
      if (!response.is_array() || response.empty()) corrupt("embedding must be a nonempty array");
      for (const auto& v : response) {
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
          corrupt("embedding values must be finite numbers");
        }
      }
      break;
    case RequestKind::Pageviews:
      if (response.is_null()) break;
      if (!response.is_array()) corrupt("pageviews must be null or an array");
      for (const auto& m : response) {
        if (!m.is_object() || !m.contains("month") || !m.contains("views") ||
            !m["month"].is_string() || !m["views"].is_number_unsigned()) {
          corrupt("pageview items need a string month and non-negative integer views");
        }
      }
      break;
    case RequestKind::Resolve:
      if (!response.is_null() && !response.is_string()) {
        corrupt("resolve response must be null or a string");
      }
      break;
  }
}

void ResponseStore::insert_checked(const std::string& digest, Entry entry,
                                   const std::string& origin) {
  auto it = entries_.find(digest);
  if (it != entries_.end()) {
    if (it->second.response != entry.response) {
      fail(ErrorCode::FixtureCorrupt,
           "entry " + digest + ": conflicting responses for one digest (" + origin + ")");
    }
    return;
  }
  entries_.emplace(digest, std::move(entry));
}

void ResponseStore::load(const std::filesystem::path& path) {
  const auto lines = files::read_lines(path);
  std::unique_lock lock(mu_);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::string origin = path.string() + ":" + std::to_string(i + 1);
    json doc;
    try {
      doc = json::parse(lines[i]);
    } catch (const json::exception&) {
      fail(ErrorCode::FixtureCorrupt, origin + ": malformed JSON");
    }
    if (!doc.is_object() || !doc.contains("digest") || !doc["digest"].is_string()) {
      fail(ErrorCode::FixtureCorrupt, origin + ": missing digest");
    }
    const std::string digest = doc["digest"].get<std::string>();
    if (!is_hex_digest(digest)) {
      fail(ErrorCode::FixtureCorrupt, "entry " + digest + ": digest is not a sha256 hex string");
    }
    if (!doc.contains("kind") || !doc["kind"].is_string() ||
        !parse_request_kind(doc["kind"].get<std::string>())) {
      fail(ErrorCode::FixtureCorrupt, "entry " + digest + ": unknown kind");
    }
    const RequestKind kind = *parse_request_kind(doc["kind"].get<std::string>());
    if (!doc.contains("response")) {
      fail(ErrorCode::FixtureCorrupt, "entry " + digest + ": missing response");
    }
    check_response_shape(kind, doc["response"], digest);
    json request = doc.value("request", json(nullptr));
    if (!request.is_null()) {
      std::string recomputed;
      try {
        recomputed = digest_of_request(request);
      } catch (const std::exception&) {
        fail(ErrorCode::FixtureCorrupt, "entry " + digest + ": malformed request record");
      }
      if (recomputed != digest) {
        fail(ErrorCode::FixtureCorrupt, "entry " + digest + ": digest does not match its request");
      }
    }
    insert_checked(digest, Entry{kind, doc["response"], std::move(request)}, origin);
  }
}

void ResponseStore::bind_directory(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (auto kind : {RequestKind::Chat, RequestKind::Embed, RequestKind::Pageviews,
                    RequestKind::Resolve}) {
    const auto file = dir / (std::string(request_kind_name(kind)) + ".jsonl");
    if (std::filesystem::exists(file)) load(file);
  }
  std::unique_lock lock(mu_);
  dir_ = dir;
}

std::optional<json> ResponseStore::find(const std::string& digest) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second.response;
}

bool ResponseStore::put(const std::string& digest, RequestKind kind, const json& response,
                        const json& request) {
  check_response_shape(kind, response, digest);
  std::unique_lock lock(mu_);
  if (entries_.count(digest)) return false;
  entries_.emplace(digest, Entry{kind, response, request});
  if (dir_) {
    json line = json::object();
    line["digest"] = digest;
    line["kind"] = request_kind_name(kind);
    line["response"] = response;
    if (!request.is_null()) line["request"] = request;
    files::append_line(*dir_ / (std::string(request_kind_name(kind)) + ".jsonl"), line.dump());
  }
  return true;
}

std::size_t ResponseStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

void ResponseStore::export_fixture(const std::filesystem::path& path) const {
  std::shared_lock lock(mu_);
  std::vector<std::string> digests;
  digests.reserve(entries_.size());
  for (const auto& [d, _] : entries_) digests.push_back(d);
  std::sort(digests.begin(), digests.end());
  std::string out;
  for (const auto& d : digests) {
    const auto& e = entries_.at(d);
    json line = json::object();
    line["digest"] = d;
    line["kind"] = request_kind_name(e.kind);
    line["response"] = e.response;
    if (!e.request.is_null()) line["request"] = e.request;
    out += line.dump();
    out += '\n';
  }
  files::write_atomic(path, out);
}

// ---- limiter ---------------------------------------------------------------------

ConcurrencyLimiter::ConcurrencyLimiter(std::size_t limit, std::chrono::milliseconds min_interval)
    : limit_(std::max<std::size_t>(limit, 1)), min_interval_(min_interval) {}

void ConcurrencyLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < limit_; });
  ++in_flight_;
  std::size_t seen = max_seen_.load();
  while (in_flight_ > seen && !max_seen_.compare_exchange_weak(seen, in_flight_)) {
  }
  if (min_interval_.count() > 0) {
    const auto now = std::chrono::steady_clock::now();
    const auto start = std::max(now, next_start_);
    next_start_ = start + min_interval_;
    lock.unlock();
    std::this_thread::sleep_until(start);
  }
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

// ---- client facade ---------------------------------------------------------------

ServiceClient::ServiceClient(ClientOptions options, std::shared_ptr<ResponseStore> store,
                             Backends backends)
    : options_(std::move(options)),
      store_(store ? std::move(store) : std::make_shared<ResponseStore>()),
      backends_(std::move(backends)),
      limiter_(options_.parallelism, options_.min_interval) {}

json ServiceClient::fetch(RequestKind kind, const std::string& digest, const json& request,
                          bool has_backend, const Fetch& call) {
  if (auto hit = store_->find(digest)) {
    ++hits_;
    return *hit;
  }
  std::shared_future<json> pending;
  std::promise<json> promise;
  bool owner = false;
  {
    std::lock_guard lock(inflight_mu_);
    // Re-check under the lock: another caller may have finished meanwhile.
    if (auto hit = store_->find(digest)) {
      ++hits_;
      return *hit;
    }
    auto it = inflight_.find(digest);
    if (it != inflight_.end()) {
      pending = it->second;
    } else {
      pending = promise.get_future().share();
      inflight_.emplace(digest, pending);
      owner = true;
    }
  }
  if (!owner) {
    ++hits_;
    return pending.get();
  }

  ++misses_;
  auto finish = [&] {
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(digest);
  };
  try {
    if (options_.offline || !has_backend) {
      fail(ErrorCode::FixtureMissing, std::string("no stored response for ") +
                                          request_kind_name(kind) + " request " + digest);
    }
    json response;
    for (int attempt = 0;; ++attempt) {
      try {
        ConcurrencyLimiter::Permit permit(limiter_);
        ++network_calls_;
        response = call();
        break;
      } catch (const Error& e) {
        if (!e.retryable() || attempt >= options_.max_retries) throw;
      }
      std::this_thread::sleep_for(options_.retry_backoff * (1 << attempt));
    }
    store_->put(digest, kind, response, request);
    promise.set_value(response);
    finish();
    return response;
  } catch (...) {
    promise.set_exception(std::current_exception());
    finish();
    throw;
  }
}

ChatTranscript ServiceClient::chat(const std::string& prompt, const SamplingParams& extra) {
  SamplingParams params = options_.default_params;
  for (const auto& [k, v] : extra) params[k] = v;
  const auto& model = options_.chat_model;
  const std::string digest = request_digest(RequestKind::Chat, model, params, prompt);
  const json response =
      fetch(RequestKind::Chat, digest, request_json(RequestKind::Chat, model, params, prompt),
            backends_.chat != nullptr,
            [&] { return json(backends_.chat->complete(model, prompt, params)); });
  return ChatTranscript{prompt, response.get<std::string>(), model, digest};
}

EmbeddingVector ServiceClient::embed(const std::string& text) {
  const auto& model = options_.embedding_model;
  const std::string digest = request_digest(RequestKind::Embed, model, {}, text);
  const json response =
      fetch(RequestKind::Embed, digest, request_json(RequestKind::Embed, model, {}, text),
            backends_.embedding != nullptr,
            [&] { return json(backends_.embedding->embed(model, text)); });
  EmbeddingVector v{response.get<std::vector<double>>()};
  return v;
}

PageviewLookup ServiceClient::monthly_pageviews(const std::string& title, const std::string& start,
                                                const std::string& end) {
  if (title.empty()) fail(ErrorCode::InvalidArgument, "pageview title must be nonempty");
  if (start.size() != 8 || end.size() != 8 || start > end) {
    fail(ErrorCode::InvalidArgument, "pageview window must be YYYYMMDD with start <= end");
  }
  const std::string payload = pageview_payload(title, start, end);
  const std::string digest = request_digest(RequestKind::Pageviews, kPageviewModel, {}, payload);
  const json response = fetch(
      RequestKind::Pageviews, digest,
      request_json(RequestKind::Pageviews, kPageviewModel, {}, payload),
      backends_.pageviews != nullptr, [&] {
        const PageviewLookup lookup = backends_.pageviews->monthly(title, start, end);
        if (lookup.article_missing) return json(nullptr);
        json arr = json::array();
        for (const auto& m : lookup.months) arr.push_back({{"month", m.month}, {"views", m.views}});
        return arr;
      });
  PageviewLookup out;
  if (response.is_null()) {
    out.article_missing = true;
    return out;
  }
  for (const auto& m : response) {
    out.months.push_back(MonthCount{m["month"].get<std::string>(), m["views"].get<std::uint64_t>()});
  }
  return out;
}

std::optional<std::string> ServiceClient::resolve_title(const std::string& title) {
  const std::string digest = request_digest(RequestKind::Resolve, kResolveModel, {}, title);
  const json response = fetch(RequestKind::Resolve, digest,
                              request_json(RequestKind::Resolve, kResolveModel, {}, title),
                              backends_.titles != nullptr, [&] {
                                auto t = backends_.titles->resolve(title);
                                return t ? json(*t) : json(nullptr);
                              });
  if (response.is_null()) return std::nullopt;
  return response.get<std::string>();
}

CacheStats ServiceClient::stats() const {
  return CacheStats{hits_.load(), misses_.load(), network_calls_.load()};
}

void ServiceClient::reset_stats() {
  hits_ = 0;
  misses_ = 0;
  network_calls_ = 0;
}

std::shared_ptr<ServiceClient> replay_client(const std::filesystem::path& fixture_path,
                                             ClientOptions options) {
  auto store = std::make_shared<ResponseStore>();
  store->load(fixture_path);
  options.offline = true;
  return std::make_shared<ServiceClient>(std::move(options), std::move(store), Backends{});
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim() || a.dim() == 0) {
    fail(ErrorCode::InvalidArgument, "embedding dimensions differ");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) {
    fail(ErrorCode::UndefinedValue, "cosine similarity is undefined for a zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace thg::clients
