#include "orchestrator/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

#include "common/error.hpp"
#include "common/files.hpp"
#include "common/text.hpp"

namespace thg::orchestrator {
namespace {

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string s = text::to_lower_ascii(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(ErrorCode::InvalidArgument, "config key " + key + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::InvalidArgument, "config key " + key + ": expected a number, got '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::InvalidArgument, "config key " + key + ": expected an integer, got '" + v + "'");
}

std::string unquote(const std::string& raw) {
  std::string v = text::trim(raw);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  // Trailing comment on an unquoted value.
  if (auto hash = v.find(" #"); hash != std::string::npos) v = text::trim(v.substr(0, hash));
  return v;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = text::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string env_name(const std::string& key) {
  std::string s = "THG_";
  for (char c : key) {
    s.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return s;
}

const std::vector<std::string>& path_keys() {
  static const std::vector<std::string> keys = {"calibration", "gazetteer", "input", "output_dir",
                                                "cache_dir"};
  return keys;
}

}  // namespace

void set_config_value(PipelineConfig& c, const std::string& key, const std::string& v) {
  if (key == "chat.base_url") c.chat.base_url = v;
  else if (key == "chat.path") c.chat.path = v;
  else if (key == "chat.model") c.chat_model = v;
  else if (key == "chat.token_env") c.chat.token_env_var = v;
  else if (key == "embedding.base_url") c.embedding.base_url = v;
  else if (key == "embedding.path") c.embedding.path = v;
  else if (key == "embedding.model") c.embedding_model = v;
  else if (key == "embedding.token_env") c.embedding.token_env_var = v;
  else if (key == "pageviews.base_url") c.pageview_base_url = v;
  else if (key == "wiki.base_url") c.wiki_base_url = v;
  else if (key == "similarity_threshold") c.similarity_threshold = parse_double(key, v);
  else if (key == "hints_per_question") c.hints_per_question = static_cast<int>(parse_int(key, v));
  else if (key == "min_hints") c.min_hints = static_cast<int>(parse_int(key, v));
  else if (key == "candidate_count") c.candidate_count = static_cast<int>(parse_int(key, v));
  else if (key == "candidate_generate_max") c.candidate_generate_max = static_cast<int>(parse_int(key, v));
  else if (key == "sample_fraction") c.sample_fraction = parse_double(key, v);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, v));
  else if (key == "classifier") c.classifier = v;
  else if (key == "entity_extractor") c.entity_extractor = v;
  else if (key == "hifas_mode") c.hifas_mode = v;
  else if (key == "parallelism") c.parallelism = static_cast<std::size_t>(parse_int(key, v));
  else if (key == "min_interval_ms") c.min_interval_ms = static_cast<int>(parse_int(key, v));
  else if (key == "max_retries") c.max_retries = static_cast<int>(parse_int(key, v));
  else if (key == "offline") c.offline = parse_bool(key, v);
  else if (key == "fixtures") c.fixtures = split_list(v);
  else if (key == "cache_dir") c.cache_dir = v;
  else if (key == "calibration") c.calibration = v;
  else if (key == "gazetteer") c.gazetteer = v;
  else if (key == "input") c.input = v;
  else if (key == "output_dir") c.output_dir = v;
  else fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
}

void PipelineConfig::check() const {
  auto bad = [](const std::string& key, const std::string& why) {
    fail(ErrorCode::InvalidArgument, "config key " + key + ": " + why);
  };
  if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0)) bad("similarity_threshold", "must lie in (0,1]");
  if (hints_per_question < 1) bad("hints_per_question", "must be >= 1");
  if (min_hints < 1) bad("min_hints", "must be >= 1");
  if (candidate_count < 1) bad("candidate_count", "must be >= 1");
  if (candidate_generate_max < candidate_count) bad("candidate_generate_max", "must be >= candidate_count");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) bad("sample_fraction", "must lie in (0,1]");
  if (classifier != "keyword" && classifier != "llm") bad("classifier", "must be keyword or llm");
  if (entity_extractor != "gazetteer" && entity_extractor != "llm") bad("entity_extractor", "must be gazetteer or llm");
  if (entity_extractor == "gazetteer" && gazetteer.empty()) bad("gazetteer", "required by the gazetteer extractor");
  if (hifas_mode != "min" && hifas_mode != "avg" && hifas_mode != "max") bad("hifas_mode", "must be min, avg or max");
  if (parallelism < 1) bad("parallelism", "must be >= 1");
  if (offline && fixtures.empty()) bad("fixtures", "offline runs need at least one fixture");
  if (calibration.empty()) bad("calibration", "a calibration file is required");
  if (input.empty()) bad("input", "required");
  if (output_dir.empty()) bad("output_dir", "required");
}

std::string PipelineConfig::canonical() const {
  // Paths and endpoints that do not change results are left out, so the
  // digest is stable across machines.
  std::ostringstream o;
  o.precision(17);
  o << "chat.model=" << chat_model << "\n"
    << "embedding.model=" << embedding_model << "\n"
    << "similarity_threshold=" << similarity_threshold << "\n"
    << "hints_per_question=" << hints_per_question << "\n"
    << "min_hints=" << min_hints << "\n"
    << "candidate_count=" << candidate_count << "\n"
    << "candidate_generate_max=" << candidate_generate_max << "\n"
    << "sample_fraction=" << sample_fraction << "\n"
    << "seed=" << seed << "\n"
    << "classifier=" << classifier << "\n"
    << "entity_extractor=" << entity_extractor << "\n"
    << "hifas_mode=" << hifas_mode << "\n"
    << "offline=" << (offline ? "true" : "false") << "\n";
  return o.str();
}

PipelineConfig load_config(const std::filesystem::path& path,
                           const std::map<std::string, std::string>* env_override) {
  PipelineConfig c;
  std::map<std::string, std::string> values;
  std::string section;
  std::size_t n = 0;
  for (const auto& raw : files::read_lines(path)) {
    ++n;
    const std::string line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::Parse, path.string() + " line " + std::to_string(n) + ": bad section header");
      section = text::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::Parse, path.string() + " line " + std::to_string(n) + ": expected key = value");
    }
    std::string key = text::trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    values[key] = unquote(line.substr(eq + 1));
  }

  // Environment overrides for every key the file could set.
  static const std::vector<std::string> all_keys = {
      "chat.base_url", "chat.path", "chat.model", "chat.token_env", "embedding.base_url",
      "embedding.path", "embedding.model", "embedding.token_env", "pageviews.base_url",
      "wiki.base_url", "similarity_threshold", "hints_per_question", "min_hints",
      "candidate_count", "candidate_generate_max", "sample_fraction", "seed", "classifier",
      "entity_extractor", "hifas_mode", "parallelism", "min_interval_ms", "max_retries",
      "offline", "fixtures", "cache_dir", "calibration", "gazetteer", "input", "output_dir"};
  for (const auto& key : all_keys) {
    const std::string name = env_name(key);
    if (env_override) {
      if (auto it = env_override->find(name); it != env_override->end()) values[key] = it->second;
    } else if (const char* v = std::getenv(name.c_str())) {
      values[key] = v;
    }
  }

  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
  };
  for (const auto& [key, value] : values) {
    std::string v = value;
    if (std::find(path_keys().begin(), path_keys().end(), key) != path_keys().end()) v = resolve(v);
    set_config_value(c, key, v);
  }
  for (auto& f : c.fixtures) f = resolve(f);
  return c;
}

std::shared_ptr<clients::ServiceClient> make_client(const PipelineConfig& config) {
  clients::ClientOptions opts;
  opts.chat_model = config.chat_model;
  opts.embedding_model = config.embedding_model;
  opts.parallelism = config.parallelism;
  opts.min_interval = std::chrono::milliseconds(config.min_interval_ms);
  opts.max_retries = config.max_retries;
  opts.offline = config.offline;

  auto store = std::make_shared<clients::ResponseStore>();
  for (const auto& f : config.fixtures) store->load(f);
  if (!config.cache_dir.empty()) store->bind_directory(config.cache_dir);

  clients::Backends backends;
  if (!config.offline) {
    if (!config.chat.base_url.empty()) {
      backends.chat = std::make_shared<clients::HttpChatBackend>(
          clients::make_http_transport(config.chat.base_url), config.chat);
    }
    if (!config.embedding.base_url.empty()) {
      backends.embedding = std::make_shared<clients::HttpEmbeddingBackend>(
          clients::make_http_transport(config.embedding.base_url), config.embedding);
    }
    backends.pageviews = std::make_shared<clients::WikimediaPageviewBackend>(
        clients::make_http_transport(config.pageview_base_url));
    backends.titles = std::make_shared<clients::MediaWikiTitleBackend>(
        clients::make_http_transport(config.wiki_base_url));
  }
  return std::make_shared<clients::ServiceClient>(opts, store, backends);
}

}  // namespace thg::orchestrator
