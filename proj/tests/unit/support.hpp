#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "clients/service.hpp"
#include "common/error.hpp"

namespace test {

inline std::filesystem::path fixtures() { return THG_FIXTURES; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("thg-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Chat backend answering from a function of the prompt and params.
class FnChat : public thg::clients::ChatBackend {
 public:
  using Fn = std::function<std::string(const std::string&, const thg::clients::SamplingParams&)>;
  explicit FnChat(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const std::string&, const std::string& prompt,
                       const thg::clients::SamplingParams& params) override {
    ++calls;
    return fn_(prompt, params);
  }
  std::atomic<int> calls{0};

 private:
  Fn fn_;
};

// Embeddings looked up by text; unknown text is a transport failure.
class MapEmbedding : public thg::clients::EmbeddingBackend {
 public:
  explicit MapEmbedding(std::map<std::string, std::vector<double>> m) : m_(std::move(m)) {}
  std::vector<double> embed(const std::string&, const std::string& text) override {
    auto it = m_.find(text);
    if (it == m_.end()) thg::fail(thg::ErrorCode::Transport, "no embedding for " + text);
    return it->second;
  }

 private:
  std::map<std::string, std::vector<double>> m_;
};

class MapPageviews : public thg::clients::PageviewBackend {
 public:
  explicit MapPageviews(std::map<std::string, std::vector<thg::clients::MonthCount>> m)
      : m_(std::move(m)) {}
  thg::clients::PageviewLookup monthly(const std::string& title, const std::string&,
                                       const std::string&) override {
    thg::clients::PageviewLookup out;
    auto it = m_.find(title);
    if (it == m_.end()) {
      out.article_missing = true;
    } else {
      out.months = it->second;
    }
    return out;
  }

 private:
  std::map<std::string, std::vector<thg::clients::MonthCount>> m_;
};

class MapTitles : public thg::clients::TitleBackend {
 public:
  explicit MapTitles(std::map<std::string, std::string> m) : m_(std::move(m)) {}
  std::optional<std::string> resolve(const std::string& title) override {
    auto it = m_.find(title);
    if (it == m_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> m_;
};

inline std::shared_ptr<thg::clients::ServiceClient> make_client(thg::clients::Backends b,
                                                                std::size_t parallelism = 4) {
  thg::clients::ClientOptions o;
  o.parallelism = parallelism;
  o.retry_backoff = std::chrono::milliseconds(1);
  return std::make_shared<thg::clients::ServiceClient>(
      o, std::make_shared<thg::clients::ResponseStore>(), std::move(b));
}

inline std::shared_ptr<thg::clients::ServiceClient> chat_client(FnChat::Fn fn,
                                                                std::size_t parallelism = 4) {
  thg::clients::Backends b;
  b.chat = std::make_shared<FnChat>(std::move(fn));
  return make_client(std::move(b), parallelism);
}

}  // namespace test

#define CHECK_THROWS_CODE(expr, ec)                                  \
  do {                                                               \
    bool thrown_ = false;                                            \
    try {                                                            \
      (void)(expr);                                                  \
    } catch (const thg::Error& e_) {                                 \
      thrown_ = true;                                                \
      CHECK_MESSAGE(e_.code() == (ec), std::string(thg::error_code_name(e_.code())), \
                    ": ", e_.what());                                \
    }                                                                \
    CHECK_MESSAGE(thrown_, "expected thg::Error from " #expr);       \
  } while (0)
