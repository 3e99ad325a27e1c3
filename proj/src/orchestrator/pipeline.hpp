#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clients/service.hpp"
#include "familiarity/familiarity.hpp"
#include "model/record.hpp"
#include "orchestrator/config.hpp"

namespace thg::orchestrator {

// Stage names in execution order.
const std::vector<std::string>& stage_names();

struct StageReport {
  std::string name;
  std::size_t input = 0;
  std::size_t output = 0;
  std::size_t rejected = 0;
  std::map<std::string, std::vector<std::string>> rejected_ids;  // reason -> q_ids
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  clients::CacheStats cache;

  nlohmann::ordered_json to_json() const;
  static StageReport from_json(const nlohmann::ordered_json& j);
};

struct RunOptions {
  std::optional<std::string> stop_after;  // stage name
  bool resume = true;
};

struct RunResult {
  bool completed = false;
  std::vector<StageReport> stages;
  std::vector<model::QuestionRecord> final_records;
  nlohmann::ordered_json manifest;  // null unless completed
  std::filesystem::path final_path;
  std::filesystem::path manifest_path;
};

// Runs every stage in order under config.output_dir:
//   stages/NN-<name>.jsonl      stage output
//   checkpoints/NN-<name>.json  stage report plus digests for resuming
//   final.jsonl, stats.json, manifest.json
// A stage whose checkpoint matches the config digest and upstream output is
// loaded instead of recomputed.
RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

// Runs one named stage outside a full pipeline run. Stages that need files
// (gazetteer, calibration) read them from `config`.
std::vector<model::QuestionRecord> run_stage(const std::string& name,
                                             const std::vector<model::QuestionRecord>& in,
                                             const PipelineConfig& config,
                                             std::shared_ptr<clients::ServiceClient> client,
                                             StageReport& report);

// Loads a normalizer JSON, or fits one from a {title, mean_monthly_views}
// JSONL corpus when the path ends in ".jsonl".
familiarity::FamiliarityNormalizer load_or_fit_normalizer(const std::filesystem::path& path);

// Extractor named by config.entity_extractor.
std::shared_ptr<familiarity::EntityExtractor> make_extractor(
    const PipelineConfig& config, std::shared_ptr<clients::ServiceClient> client);

}  // namespace thg::orchestrator
