#include "clients/http_backends.hpp"

#include <cstdlib>

#include <httplib.h>

#include "common/error.hpp"

namespace thg::clients {

using nlohmann::json;

namespace {

class HttplibTransport : public HttpTransport {
 public:
  HttplibTransport(const std::string& base_url, int timeout_seconds)
      : client_(base_url) {
    client_.set_connection_timeout(timeout_seconds, 0);
    client_.set_read_timeout(timeout_seconds, 0);
    client_.set_follow_location(true);
  }

  HttpResponse get(const std::string& path,
                   const std::map<std::string, std::string>& headers) override {
    std::lock_guard lock(mu_);
    return convert(client_.Get(path, to_headers(headers)), path);
  }

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const std::map<std::string, std::string>& headers) override {
    std::lock_guard lock(mu_);
    return convert(client_.Post(path, to_headers(headers), body, "application/json"), path);
  }

 private:
  static httplib::Headers to_headers(const std::map<std::string, std::string>& h) {
    httplib::Headers out;
    for (const auto& [k, v] : h) out.emplace(k, v);
    return out;
  }

  static HttpResponse convert(const httplib::Result& res, const std::string& path) {
    if (!res) {
      fail(ErrorCode::Transport, "request to " + path + " failed: " + httplib::to_string(res.error()));
    }
    return HttpResponse{res->status, res->body};
  }

  // httplib::Client is not safe for concurrent requests on one connection.
  std::mutex mu_;
  httplib::Client client_;
};

}  // namespace

std::map<std::string, std::string> auth_headers(const EndpointConfig& config) {
  std::map<std::string, std::string> h{{"User-Agent", "triviahg-toolkit/1.0"}};
  if (!config.token_env_var.empty()) {
    if (const char* token = std::getenv(config.token_env_var.c_str())) {
      h["Authorization"] = std::string("Bearer ") + token;
    }
  }
  return h;
}

json parse_body(const HttpResponse& res, const std::string& what) {
  if (res.status == 429 || res.status >= 500) {
    fail(ErrorCode::Transport, what + " returned HTTP " + std::to_string(res.status));
  }
  if (res.status < 200 || res.status >= 300) {
    fail(ErrorCode::Transport,
         what + " returned HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
  }
  try {
    return json::parse(res.body);
  } catch (const json::exception&) {
    fail(ErrorCode::Transport, what + " returned a non-JSON body");
  }
}

std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   int timeout_seconds) {
  return std::make_shared<HttplibTransport>(base_url, timeout_seconds);
}

HttpChatBackend::HttpChatBackend(std::shared_ptr<HttpTransport> transport, EndpointConfig config)
    : transport_(std::move(transport)), config_(std::move(config)) {}

std::string HttpChatBackend::complete(const std::string& model, const std::string& prompt,
                                      const SamplingParams& params) {
  json body = json::object();
  body["model"] = model;
  body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
  for (const auto& [k, v] : params) {
    // "attempt" only separates retry digests; it is not a provider parameter.
    if (k == "attempt") continue;
    char* end = nullptr;
    const double num = std::strtod(v.c_str(), &end);
    if (end != v.c_str() && *end == '\0') {
      body[k] = num;
    } else {
      body[k] = v;
    }
  }
  const json reply = parse_body(
      transport_->post_json(config_.path, body.dump(), auth_headers(config_)), "chat endpoint");
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    fail(ErrorCode::Transport, "chat endpoint reply lacks choices[0].message.content");
  }
}

HttpEmbeddingBackend::HttpEmbeddingBackend(std::shared_ptr<HttpTransport> transport,
                                           EndpointConfig config)
    : transport_(std::move(transport)), config_(std::move(config)) {}

std::vector<double> HttpEmbeddingBackend::embed(const std::string& model,
                                                const std::string& text) {
  json body = {{"model", model}, {"input", text}};
  const json reply = parse_body(
      transport_->post_json(config_.path, body.dump(), auth_headers(config_)),
      "embedding endpoint");
  try {
    return reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception&) {
    fail(ErrorCode::Transport, "embedding endpoint reply lacks data[0].embedding");
  }
}

std::string encode_article_title(const std::string& title) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char ch : title) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == ' ') {
      out.push_back('_');
    } else if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
               c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0F]);
    }
  }
  return out;
}

std::string pageview_path(const std::string& title, const std::string& start,
                          const std::string& end) {
  return "/metrics/pageviews/per-article/en.wikipedia/all-access/user/" +
         encode_article_title(title) + "/monthly/" + start + "/" + end;
}

WikimediaPageviewBackend::WikimediaPageviewBackend(std::shared_ptr<HttpTransport> transport,
                                                   std::string path_prefix)
    : transport_(std::move(transport)), prefix_(std::move(path_prefix)) {}

PageviewLookup WikimediaPageviewBackend::monthly(const std::string& title,
                                                 const std::string& start,
                                                 const std::string& end) {
  const auto res = transport_->get(prefix_ + pageview_path(title, start, end),
                                   {{"User-Agent", "triviahg-toolkit/1.0"}});
  PageviewLookup out;
  if (res.status == 404) {
    out.article_missing = true;
    return out;
  }
  const json reply = parse_body(res, "pageview API");
  try {
    for (const auto& item : reply.at("items")) {
      const auto ts = item.at("timestamp").get<std::string>();  // YYYYMMDDHH
      if (ts.size() < 6) continue;
      out.months.push_back(
          MonthCount{ts.substr(0, 4) + "-" + ts.substr(4, 2), item.at("views").get<std::uint64_t>()});
    }
  } catch (const json::exception&) {
    fail(ErrorCode::Transport, "pageview API reply has an unexpected shape");
  }
  return out;
}

MediaWikiTitleBackend::MediaWikiTitleBackend(std::shared_ptr<HttpTransport> transport)
    : transport_(std::move(transport)) {}

std::optional<std::string> MediaWikiTitleBackend::resolve(const std::string& title) {
  const std::string path = "/w/api.php?action=query&format=json&formatversion=2&redirects=1&titles=" +
                           encode_article_title(title);
  const json reply = parse_body(transport_->get(path, {{"User-Agent", "triviahg-toolkit/1.0"}}),
                                "title lookup");
  try {
    const auto& pages = reply.at("query").at("pages");
    if (pages.empty()) return std::nullopt;
    const auto& page = pages.at(0);
    if (page.value("missing", false) || page.value("invalid", false)) return std::nullopt;
    return page.at("title").get<std::string>();
  } catch (const json::exception&) {
    fail(ErrorCode::Transport, "title lookup reply has an unexpected shape");
  }
}

}  // namespace thg::clients
