#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clients/service.hpp"
#include "model/record.hpp"

namespace thg::hints {

// ---- prompting protocol ------------------------------------------------------

inline constexpr const char* kDefaultHintPrompt =
    "Produce {N} hints for the question \"{QUESTION}\" without including the answer in the "
    "hints.";

struct GenerationConfig {
  std::string hint_prompt = kDefaultHintPrompt;
  int hints_per_question = 10;
};

enum class GenerationStatus { AnswerNotFound, AnswerMismatch, Ok };

const char* generation_status_name(GenerationStatus s);

struct RawHint {
  std::string text;
  std::vector<int> source_indices;
  bool operator==(const RawHint&) const = default;
};

struct GenerationOutcome {
  GenerationStatus status = GenerationStatus::AnswerNotFound;
  std::optional<std::string> snippet;
  std::vector<std::string> snippet_sources;
  std::vector<RawHint> hints_raw;  // nonempty only when status == Ok
};

// Step 1 asks the question verbatim; step 2 checks the reply against the
// ground truth; step 3 requests the hint list. Transport errors propagate; an
// unparseable hint list raises Error(Generation).
GenerationOutcome elicit_and_verify(const std::string& question, const std::string& answer,
                                    clients::ServiceClient& chat,
                                    const GenerationConfig& config = {});

// Normalized containment in either direction (see text::normalized_answer_tokens).
bool answers_match(const std::string& generated, const std::string& ground_truth);

// True when a reply declines to answer ("I don't know", empty, ...).
bool is_declined_answer(const std::string& reply);

struct MarkerParse {
  std::string clean_text;
  std::vector<int> source_indices;  // deduplicated, first-seen order
};

// Strips bracketed integer markers such as "[2]" or "[1][3]" and collapses
// whitespace.
MarkerParse parse_source_markers(const std::string& text);

// Reference lines like "[1]: https://..." extracted from a reply.
struct SourceList {
  std::string body;  // reply without the reference lines
  std::vector<std::pair<int, std::string>> references;
};

SourceList extract_references(const std::string& reply);

// Numbered ("1." / "1)") or bulleted ("-", "*", "•") items; reference lines
// and preamble are skipped. Markers are parsed out of every item.
std::vector<RawHint> parse_hint_list(const std::string& reply);

// ---- filtering -------------------------------------------------------------------

struct LeakageReport {
  std::set<std::string> hint_lemmas;
  std::set<std::string> answer_lemmas;  // stopwords removed
  std::set<std::string> overlap;
  bool leaked = false;
};

LeakageReport leaks_answer(const std::string& hint, const std::string& answer);

using Embedder = std::function<clients::EmbeddingVector(const std::string&)>;

Embedder client_embedder(std::shared_ptr<clients::ServiceClient> client);

// Cosine of the two embeddings; a zero vector raises Error(UndefinedValue).
double question_similarity(const std::string& hint, const std::string& question,
                           const Embedder& embed);

struct FilterResult {
  std::vector<model::Hint> kept;
  std::vector<model::Hint> leaked;
  std::vector<model::Hint> rephrased;
};

// Drops leaking hints, then hints whose similarity to the question is
// >= threshold. Order is preserved and verdicts are recorded on every hint.
FilterResult filter_hints(const std::vector<model::Hint>& hints, const std::string& answer,
                          const std::string& question, const Embedder& embed,
                          double threshold = model::kSimilarityThreshold);

struct PruneResult {
  std::vector<model::QuestionRecord> kept;
  std::vector<std::string> dropped_ids;
};

PruneResult prune_questions(const std::vector<model::QuestionRecord>& records,
                            std::size_t min_hints = model::kMinFinalHints);

}  // namespace thg::hints
