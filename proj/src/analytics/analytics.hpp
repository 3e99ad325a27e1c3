#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "clients/http_backends.hpp"
#include "clients/service.hpp"
#include "convergence/convergence.hpp"
#include "familiarity/familiarity.hpp"
#include "model/record.hpp"

namespace thg::analytics {

// ---- difficulty ------------------------------------------------------------------

enum class Level { Easy, Medium, Hard };
enum class Basis { QuestionRetrieval, AnswerPopularity };
const char* level_name(Level l);

struct DifficultyLabel {
  Level level = Level::Medium;
  Basis basis = Basis::AnswerPopularity;
  double raw = 0;
};

// Easy > 0.66, Medium in [0.33, 0.66], Hard < 0.33.
DifficultyLabel answer_difficulty(double popularity);
// Hard < 1/3, Medium in [1/3, 2/3), Easy >= 2/3.
DifficultyLabel question_difficulty(double relevance_fraction);

class Retriever {
 public:
  virtual ~Retriever() = default;
  virtual std::vector<std::string> retrieve(const std::string& question, std::size_t k) = 0;
};

// Canned passages keyed by question text; JSONL of {"question", "passages"}.
class StubRetriever : public Retriever {
 public:
  explicit StubRetriever(std::map<std::string, std::vector<std::string>> passages);
  static std::shared_ptr<StubRetriever> load(const std::filesystem::path& path);
  std::vector<std::string> retrieve(const std::string& question, std::size_t k) override;

 private:
  std::map<std::string, std::vector<std::string>> passages_;
};

// POSTs {"query", "k"} and reads {"passages": [...]}.
class HttpRetriever : public Retriever {
 public:
  HttpRetriever(std::shared_ptr<clients::HttpTransport> transport, clients::EndpointConfig config);
  std::vector<std::string> retrieve(const std::string& question, std::size_t k) override;

 private:
  std::shared_ptr<clients::HttpTransport> transport_;
  clients::EndpointConfig config_;
};

// Share of the top-k passages whose tokens contain the normalized answer.
double relevance_fraction(const std::string& question, const std::string& answer,
                          Retriever& retriever, std::size_t k = 500);

// ---- correlation -----------------------------------------------------------------

// Raises Error(UndefinedValue) when either side has zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);
double mse(const std::vector<double>& xs, const std::vector<double>& ys);

struct CorrelationReport {
  double pearson_r = 0;
  double mse = 0;
  std::size_t n = 0;
};

CorrelationReport correlate(const std::vector<double>& metric, const std::vector<double>& human);

// ---- human ratings ---------------------------------------------------------------

inline constexpr const char* kRatingAttributes[] = {"relevance", "readability", "ambiguity",
                                                    "convergence", "familiarity"};

// Mean rating per (q_id, hint_idx, attribute), rescaled from 1..5 to [0,1].
using HumanScores = std::map<std::tuple<std::string, int, std::string>, double>;

// Reads the annotation export: JSONL of {annotator_id, q_id, hint_idx, attribute, value}.
HumanScores read_human_scores(const std::filesystem::path& path);

// ---- statistics ------------------------------------------------------------------

struct StatsReport {
  std::size_t n_questions = 0;
  std::size_t n_hints = 0;
  double avg_question_len = 0;
  double avg_hint_len = 0;
  double avg_hints_per_q = 0;
  double avg_entities_per_q = 0;
  double avg_entities_per_hint = 0;
  double avg_sources_per_q = 0;

  nlohmann::ordered_json to_json() const;
};

StatsReport dataset_stats(const std::vector<model::QuestionRecord>& records);

// ---- metric validation -----------------------------------------------------------

struct SweepPoint {
  int n = 0;
  std::optional<double> pearson_r;  // absent when undefined on this point
  std::size_t n_samples = 0;
};

// Re-scores HICOS for every rated hint at each candidate count and
// correlates with the human convergence ratings.
std::vector<SweepPoint> hicos_sweep(const std::vector<model::QuestionRecord>& records,
                                    const HumanScores& human, int n_from, int n_to,
                                    clients::ServiceClient& chat,
                                    const convergence::ConvergenceConfig& config = {});

std::string sweep_csv(const std::vector<SweepPoint>& curve);

struct AggregationComparison {
  std::map<familiarity::AggregateMode, std::optional<CorrelationReport>> reports;
  std::map<familiarity::AggregateMode, std::string> errors;
  std::optional<familiarity::AggregateMode> best;
};

// Pairs hint HIFAS under each mode (recomputed from stored entity
// popularities) with human familiarity ratings.
AggregationComparison compare_aggregations(const std::vector<model::QuestionRecord>& records,
                                           const HumanScores& human);

// Same comparison over precomputed per-mode values.
AggregationComparison compare_aggregations(
    const std::vector<double>& human,
    const std::map<familiarity::AggregateMode, std::vector<double>>& per_mode);

}  // namespace thg::analytics
