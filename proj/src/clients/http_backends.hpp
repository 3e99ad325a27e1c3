#pragma once

#include <map>
#include <memory>
#include <string>

#include "clients/service.hpp"

namespace thg::clients {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal request surface the backends need. Tests substitute a recording
// double; production uses cpp-httplib.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string& path,
                           const std::map<std::string, std::string>& headers) = 0;
  virtual HttpResponse post_json(const std::string& path, const std::string& body,
                                 const std::map<std::string, std::string>& headers) = 0;
};

// `base_url` is scheme://host[:port]; request paths are appended verbatim.
std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   int timeout_seconds = 60);

struct EndpointConfig {
  std::string base_url;       // e.g. https://api.example.com
  std::string path;           // e.g. /v1/chat/completions
  std::string token_env_var;  // bearer token source; empty for none
};

// User-Agent plus a bearer token read from config.token_env_var when set.
std::map<std::string, std::string> auth_headers(const EndpointConfig& config);

// 2xx JSON body or Error(Transport) naming `what`.
nlohmann::json parse_body(const HttpResponse& res, const std::string& what);

// OpenAI-style chat completions: {model, messages:[{role:user, content}], ...params}.
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(std::shared_ptr<HttpTransport> transport, EndpointConfig config);
  std::string complete(const std::string& model, const std::string& prompt,
                       const SamplingParams& params) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  EndpointConfig config_;
};

// OpenAI-style embeddings: {model, input} -> data[0].embedding.
class HttpEmbeddingBackend : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(std::shared_ptr<HttpTransport> transport, EndpointConfig config);
  std::vector<double> embed(const std::string& model, const std::string& text) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  EndpointConfig config_;
};

// Wikimedia REST pageviews, per-article/monthly/all-access/user.
class WikimediaPageviewBackend : public PageviewBackend {
 public:
  explicit WikimediaPageviewBackend(std::shared_ptr<HttpTransport> transport,
                                    std::string path_prefix = "/api/rest_v1");
  PageviewLookup monthly(const std::string& title, const std::string& start,
                         const std::string& end) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string prefix_;
};

// MediaWiki action API title lookup with redirects=1.
class MediaWikiTitleBackend : public TitleBackend {
 public:
  explicit MediaWikiTitleBackend(std::shared_ptr<HttpTransport> transport);
  std::optional<std::string> resolve(const std::string& title) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
};

// Wikimedia article-title encoding: spaces become underscores, everything
// outside the unreserved set is percent-encoded.
std::string encode_article_title(const std::string& title);

// The bit-exact pageview REST path for one article and window.
std::string pageview_path(const std::string& title, const std::string& start,
                          const std::string& end);

}  // namespace thg::clients
