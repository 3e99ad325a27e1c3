#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clients/service.hpp"
#include "model/record.hpp"

namespace thg::familiarity {

inline constexpr const char* kWindowStart = "20150101";
inline constexpr const char* kWindowEnd = "20231231";

// Finds entity spans in text. Returned mentions are non-overlapping, in text
// order, and may already carry a wiki_title.
class EntityExtractor {
 public:
  virtual ~EntityExtractor() = default;
  virtual std::vector<model::EntityMention> extract(const std::string& text) = 0;
};

// Longest-match lookup of known surfaces at word boundaries (case-sensitive).
class GazetteerExtractor : public EntityExtractor {
 public:
  struct Entry {
    std::string surface;
    std::optional<std::string> title;
  };
  explicit GazetteerExtractor(std::vector<Entry> entries);
  // JSONL of {"surface": ..., "title": ...}; title may be null or omitted.
  static std::shared_ptr<GazetteerExtractor> load(const std::filesystem::path& path);

  std::vector<model::EntityMention> extract(const std::string& text) override;

 private:
  std::vector<Entry> entries_;  // longest surface first
};

inline constexpr const char* kDefaultEntityPrompt =
    "List the named entities mentioned in the text below as bullet points, copying each one "
    "exactly as written. Reply NONE if there are none.\n\nText: {TEXT}";

// Asks the chat model for entity surfaces and keeps the ones found verbatim
// in the text.
class LlmEntityExtractor : public EntityExtractor {
 public:
  LlmEntityExtractor(std::shared_ptr<clients::ServiceClient> chat,
                     std::string prompt = kDefaultEntityPrompt);
  std::vector<model::EntityMention> extract(const std::string& text) override;

 private:
  std::shared_ptr<clients::ServiceClient> chat_;
  std::string prompt_;
};

// Mentions for `text`; titles the extractor left empty are resolved through
// `titles` when given.
std::vector<model::EntityMention> extract_entities(const std::string& text,
                                                   EntityExtractor& extractor,
                                                   clients::ServiceClient* titles = nullptr);

// Mean monthly views over the window; absent for a missing article or a
// window without data.
std::optional<double> raw_popularity(const std::string& title, clients::ServiceClient& pageviews,
                                     const std::string& start = kWindowStart,
                                     const std::string& end = kWindowEnd);

// Linear-interpolation quantile (h = (n-1)p) of an unsorted sample.
double quantile(std::vector<double> values, double p);

struct FamiliarityNormalizer {
  double q1 = 0, q3 = 0, iqr = 0, lower = 0, upper = 0;
  std::size_t corpus_size = 0;

  double normalize(double views) const;

  nlohmann::json to_json() const;
  static FamiliarityNormalizer from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static FamiliarityNormalizer load(const std::filesystem::path& path);
};

// Requires at least 4 finite values.
FamiliarityNormalizer fit_normalizer(const std::vector<double>& corpus_views);

// JSONL of {"title": ..., "mean_monthly_views": ...}.
std::vector<std::pair<std::string, double>> read_calibration_corpus(
    const std::filesystem::path& path);

enum class AggregateMode { Min, Avg, Max };
const char* aggregate_mode_name(AggregateMode m);
std::optional<AggregateMode> parse_aggregate_mode(std::string_view name);

std::optional<double> hifas(const std::vector<double>& values,
                            AggregateMode mode = AggregateMode::Avg);

struct FamiliarityResult {
  struct Scored {
    model::EntityMention entity;
    std::optional<double> normalized;
  };
  std::vector<Scored> per_entity;
  AggregateMode aggregate_mode = AggregateMode::Avg;
  std::optional<double> hifas;
};

struct FamiliarityContext {
  EntityExtractor* extractor = nullptr;
  clients::ServiceClient* client = nullptr;  // pageviews and title resolution
  FamiliarityNormalizer normalizer;
  AggregateMode mode = AggregateMode::Avg;
};

FamiliarityResult evaluate_text(const std::string& text, const FamiliarityContext& ctx);

// Fills entities, popularities and hifas on every hint, q_popularity,
// exact_answer_popularity and the record's mean familiarity.
void score_record(model::QuestionRecord& record, const FamiliarityContext& ctx);

}  // namespace thg::familiarity
