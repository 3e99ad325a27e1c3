#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "model/record.hpp"

namespace thg::orchestrator {

enum class Phase { RateAttributes, AnswerWithHints };

struct Attempt {
  std::string answer;
  bool correct = false;
  int revealed_hint_count = 0;
  std::int64_t ts = 0;
  bool operator==(const Attempt&) const = default;
};

struct HintRating {
  std::map<std::string, int> values;  // the five attributes, 1..5
  bool google_found = false;
  bool bing_found = false;
  std::int64_t ts = 0;
  bool operator==(const HintRating&) const = default;
};

enum class QuestionStatus { Open, Answered, Skipped };

struct QuestionState {
  int revealed_hint_count = 0;
  std::vector<Attempt> attempts;
  QuestionStatus status = QuestionStatus::Open;
  bool answered_before_hints = false;
  std::map<int, HintRating> ratings;
  bool operator==(const QuestionState&) const = default;
};

struct AnnotationSession {
  std::string id;
  std::string annotator_id;
  Phase phase = Phase::AnswerWithHints;
  bool show_answer = false;
  std::vector<std::string> question_ids;
  std::map<std::string, QuestionState> questions;
  bool operator==(const AnnotationSession&) const = default;
};

// Which annotator sees which questions. Annotators absent from the plan get
// every question in dataset order.
struct AssignmentPlan {
  struct Entry {
    std::optional<Phase> phase;
    std::vector<std::string> questions;
    bool show_answer = false;
  };
  std::map<std::string, Entry> annotators;

  // {"annotators": {"<id>": {"phase": "rate"|"answer", "questions": [...], "show_answer": bool}}}
  static AssignmentPlan from_json(const nlohmann::json& j);
  static AssignmentPlan load(const std::filesystem::path& path);
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
  std::string content_type = "application/json";
  std::string raw;  // set instead of body for JSONL exports
};

// Session protocol over an immutable dataset. State is a fold over an
// append-only event log, so replaying the log rebuilds it exactly.
class AnnotationStore {
 public:
  using Clock = std::function<std::int64_t()>;  // milliseconds

  AnnotationStore(std::vector<model::QuestionRecord> dataset, AssignmentPlan plan = {},
                  Clock clock = {});

  // Persists every event to `path` (JSONL). Existing events there are
  // replayed first.
  void attach_log(const std::filesystem::path& path);

  // Routes one request; `path` excludes the query string.
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);

  std::vector<nlohmann::json> events() const;
  void replay(const std::vector<nlohmann::json>& events);

  std::optional<AnnotationSession> session(const std::string& id) const;
  std::vector<std::string> session_ids() const;

  std::string export_ratings() const;
  std::string export_answers() const;

 private:
  void apply(const nlohmann::json& event);
  void record(nlohmann::json event);
  const model::QuestionRecord* find_question(const std::string& q_id) const;

  ApiResponse create_session(const nlohmann::json& body);
  ApiResponse next_question(AnnotationSession& s);
  ApiResponse attempt(AnnotationSession& s, const std::string& q_id, const nlohmann::json& body);
  ApiResponse reveal(AnnotationSession& s, const std::string& q_id);
  ApiResponse get_hint(AnnotationSession& s, const std::string& q_id, int k);
  ApiResponse rate(AnnotationSession& s, const std::string& q_id, int k, const nlohmann::json& body);
  ApiResponse skip(AnnotationSession& s, const std::string& q_id);

  std::vector<model::QuestionRecord> dataset_;
  std::map<std::string, std::size_t> index_;
  AssignmentPlan plan_;
  Clock clock_;
  mutable std::mutex mu_;
  std::vector<nlohmann::json> events_;
  std::map<std::string, AnnotationSession> sessions_;
  std::vector<std::string> session_order_;
  std::optional<std::filesystem::path> log_path_;
};

// HTTP front end for an AnnotationStore; every route lives under /v1.
class AnnotationServer {
 public:
  AnnotationServer(std::shared_ptr<AnnotationStore> store, std::string bearer_token = "");
  ~AnnotationServer();

  // Binds and serves on a background thread; port 0 picks a free port.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace thg::orchestrator
