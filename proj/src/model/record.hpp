#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thg::model {

enum class MajorType { Human, Entity, Location, Other, Description };

const char* major_type_name(MajorType t);
std::optional<MajorType> parse_major_type(std::string_view name);

struct EntityMention {
  std::string surface;
  std::optional<std::string> wiki_title;
  std::optional<double> raw_views;  // mean monthly pageviews

  bool operator==(const EntityMention&) const = default;
};

struct Hint {
  std::string text;
  std::vector<int> source_indices;
  std::vector<EntityMention> entities;
  // One slot per entity; null when the entity has no pageview data.
  std::vector<std::optional<double>> h_popularity;
  // Aligned with the owning record's candidate_answers; null where the judge
  // gave no usable verdict.
  std::vector<std::optional<bool>> candidate_verdicts;
  std::optional<double> hicos;
  std::optional<double> hifas;
  bool leak_flag = false;
  std::optional<double> question_similarity;

  bool operator==(const Hint&) const = default;
};

struct QuestionRecord {
  std::string q_id;
  std::string question;
  std::string exact_answer;
  std::optional<MajorType> major_type;
  std::optional<std::string> minor_type;
  std::string snippet;
  std::vector<std::string> snippet_sources;
  std::vector<Hint> hints;
  std::vector<std::string> candidate_answers;
  std::vector<std::optional<double>> q_popularity;
  std::optional<double> exact_answer_popularity;
  std::optional<double> convergence;
  std::optional<double> familiarity;

  bool operator==(const QuestionRecord&) const = default;
};

// How much of the dataset contract a record must satisfy. Pipeline stages
// exchange partially built records, so the contract is layered:
//   Raw      - identity fields present, numeric ranges, structural alignment.
//   Admitted - Raw plus the question-shape rules (terminal '?', 6..20 words).
//   Final    - Admitted plus typed, non-DESCRIPTION, >= 5 clean hints.
enum class ValidationLevel { Raw, Admitted, Final };

inline constexpr std::size_t kMinQuestionWords = 6;
inline constexpr std::size_t kMaxQuestionWords = 20;
inline constexpr std::size_t kMinFinalHints = 5;
inline constexpr double kSimilarityThreshold = 0.72;

// Throws Error(Validation) naming the offending field.
void validate(const QuestionRecord& record, ValidationLevel level = ValidationLevel::Final);

// Parses one JSONL line. `line_number` only feeds error messages.
QuestionRecord parse_record(std::string_view json_line, std::size_t line_number = 1,
                            ValidationLevel level = ValidationLevel::Final);

// Deterministic key order; refuses records that fail `level`.
std::string serialize_record(const QuestionRecord& record,
                             ValidationLevel level = ValidationLevel::Final);

std::vector<QuestionRecord> read_dataset(const std::string& path,
                                         ValidationLevel level = ValidationLevel::Final);
void write_dataset(const std::string& path, const std::vector<QuestionRecord>& records,
                   ValidationLevel level = ValidationLevel::Final);

// Checks q_id uniqueness across a whole file.
void validate_unique_ids(const std::vector<QuestionRecord>& records);

}  // namespace thg::model
