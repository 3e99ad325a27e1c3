#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "clients/http_backends.hpp"
#include "clients/service.hpp"

namespace thg::orchestrator {

struct PipelineConfig {
  clients::EndpointConfig chat{"", "/v1/chat/completions", "THG_CHAT_TOKEN"};
  std::string chat_model = "default-chat";
  clients::EndpointConfig embedding{"", "/v1/embeddings", "THG_EMBEDDING_TOKEN"};
  std::string embedding_model = "default-embedding";
  std::string pageview_base_url = "https://wikimedia.org";
  std::string wiki_base_url = "https://en.wikipedia.org";

  double similarity_threshold = 0.72;
  int hints_per_question = 10;
  int min_hints = 5;
  int candidate_count = 11;
  int candidate_generate_max = 20;
  double sample_fraction = 1.0;
  std::uint64_t seed = 42;
  std::string classifier = "keyword";        // keyword | llm
  std::string entity_extractor = "gazetteer";  // gazetteer | llm
  std::string hifas_mode = "avg";
  std::size_t parallelism = 4;
  int min_interval_ms = 0;
  int max_retries = 3;

  bool offline = false;
  std::vector<std::string> fixtures;
  std::string cache_dir;  // empty: no persistent cache
  std::string calibration;
  std::string gazetteer;
  std::string input;
  std::string output_dir;

  // Throws Error(InvalidArgument) naming the bad key.
  void check() const;

  // Canonical key=value listing; its sha256 is the run's config digest.
  std::string canonical() const;
};

// Plain-text key = value file. "[section]" prefixes following keys with
// "section."; "#" starts a comment; values may be quoted. Environment
// variables THG_<KEY> (dots as underscores, upper case) override file values.
// Relative paths resolve against the config file's directory.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::map<std::string, std::string>* env_override = nullptr);

// Applies one key to a config; unknown keys raise Error(InvalidArgument).
void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value);

// Client wired per config: fixtures and cache preloaded, HTTP backends
// attached unless offline.
std::shared_ptr<clients::ServiceClient> make_client(const PipelineConfig& config);

}  // namespace thg::orchestrator
