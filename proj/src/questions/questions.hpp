#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "clients/service.hpp"
#include "model/record.hpp"

namespace thg::questions {

// ---- admission -------------------------------------------------------------------

enum class RejectReason { TooShort, TooLong, NoQuestionMark, AnswerNoWikiPage, DescriptionType };

const char* reject_reason_name(RejectReason r);

struct AdmissionVerdict {
  bool accepted = true;
  std::optional<RejectReason> reason;  // present iff !accepted

  static AdmissionVerdict accept() { return {}; }
  static AdmissionVerdict reject(RejectReason r) { return {false, r}; }
};

// Returns the canonical article title for an answer, or nullopt when no
// article exists. Transport failures propagate as retryable errors.
using WikiResolver = std::function<std::optional<std::string>(const std::string&)>;

WikiResolver client_resolver(std::shared_ptr<clients::ServiceClient> client);

// Checks run cheapest first: length, terminal '?', then the answer lookup.
AdmissionVerdict filter_question(const std::string& question, const std::string& answer,
                                 const WikiResolver& resolver);

// ---- classification ------------------------------------------------------------

struct QuestionTypeLabel {
  model::MajorType major = model::MajorType::Other;
  std::string minor;  // TREC "COARSE:fine"
  std::optional<double> confidence;
};

class QuestionClassifier {
 public:
  virtual ~QuestionClassifier() = default;
  virtual QuestionTypeLabel classify(const std::string& question) = 0;
};

// Deterministic wh-word/keyword rules; keeps the pipeline runnable offline.
class KeywordClassifier : public QuestionClassifier {
 public:
  QuestionTypeLabel classify(const std::string& question) override;
};

// Prompts a chat model to pick one fine-grained TREC label.
class LlmClassifier : public QuestionClassifier {
 public:
  explicit LlmClassifier(std::shared_ptr<clients::ServiceClient> client);
  QuestionTypeLabel classify(const std::string& question) override;

  static std::string build_prompt(const std::string& question);
  // Throws Error(Classification) when no known label appears in the reply.
  static QuestionTypeLabel parse_reply(const std::string& reply);

 private:
  std::shared_ptr<clients::ServiceClient> client_;
};

QuestionTypeLabel classify_type(const std::string& question, QuestionClassifier& classifier);

// ---- sampling ------------------------------------------------------------------

// Per-class quotas by the largest-remainder method so the total equals
// round(fraction * N); seeded selection inside each class; survivors keep
// their input order. Every record must carry a major type.
std::vector<model::QuestionRecord> stratified_sample(
    const std::vector<model::QuestionRecord>& records, double fraction, std::uint64_t seed);

// Quota per class in MajorType order, exposed for tests and reports.
std::vector<std::size_t> stratified_quotas(const std::vector<std::size_t>& class_sizes,
                                           double fraction);

}  // namespace thg::questions
