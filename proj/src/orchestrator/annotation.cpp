#include "orchestrator/annotation.hpp"

#include <algorithm>
#include <chrono>

#include <httplib.h>

#include "analytics/analytics.hpp"
#include "common/error.hpp"
#include "common/files.hpp"
#include "common/text.hpp"
#include "hints/hints.hpp"

namespace thg::orchestrator {

using nlohmann::json;

namespace {

const char* phase_name(Phase p) { return p == Phase::RateAttributes ? "rate" : "answer"; }

std::optional<Phase> parse_phase(const std::string& s) {
  if (s == "rate" || s == "RateAttributes") return Phase::RateAttributes;
  if (s == "answer" || s == "AnswerWithHints") return Phase::AnswerWithHints;
  return std::nullopt;
}

const char* status_name(QuestionStatus s) {
  switch (s) {
    case QuestionStatus::Open: return "open";
    case QuestionStatus::Answered: return "answered";
    case QuestionStatus::Skipped: return "skipped";
  }
  return "open";
}

ApiResponse error(int status, const std::string& code, const std::string& message) {
  return ApiResponse{status, json{{"error", {{"code", code}, {"message", message}}}}, "application/json", ""};
}

ApiResponse ok(json body, int status = 200) {
  return ApiResponse{status, std::move(body), "application/json", ""};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

std::optional<int> parse_index(const std::string& s) {
  if (s.empty() || s.size() > 6 || !std::all_of(s.begin(), s.end(), ::isdigit)) return std::nullopt;
  return std::stoi(s);
}

}  // namespace

AssignmentPlan AssignmentPlan::from_json(const json& j) {
  AssignmentPlan plan;
  try {
    for (const auto& [id, entry] : j.at("annotators").items()) {
      Entry e;
      if (entry.contains("phase")) {
        e.phase = parse_phase(entry.at("phase").get<std::string>());
        if (!e.phase) fail(ErrorCode::Parse, "assignment plan: unknown phase for " + id);
      }
      if (entry.contains("questions")) e.questions = entry.at("questions").get<std::vector<std::string>>();
      e.show_answer = entry.value("show_answer", false);
      plan.annotators[id] = std::move(e);
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::Parse, std::string("assignment plan: ") + ex.what());
  }
  return plan;
}

AssignmentPlan AssignmentPlan::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(files::read_all(path)));
  } catch (const json::exception& ex) {
    fail(ErrorCode::Parse, path.string() + ": " + ex.what());
  }
}

AnnotationStore::AnnotationStore(std::vector<model::QuestionRecord> dataset, AssignmentPlan plan,
                                 Clock clock)
    : dataset_(std::move(dataset)), plan_(std::move(plan)), clock_(std::move(clock)) {
  if (!clock_) {
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  for (std::size_t i = 0; i < dataset_.size(); ++i) index_[dataset_[i].q_id] = i;
  for (const auto& [id, entry] : plan_.annotators) {
    for (const auto& q : entry.questions) {
      if (!index_.count(q)) {
        fail(ErrorCode::Validation, "assignment plan names unknown question '" + q + "' for " + id);
      }
    }
  }
}

void AnnotationStore::attach_log(const std::filesystem::path& path) {
  std::vector<json> existing;
  if (std::filesystem::exists(path)) {
    std::size_t n = 0;
    for (const auto& line : files::read_lines(path)) {
      ++n;
      if (text::trim(line).empty()) continue;
      try {
        existing.push_back(json::parse(line));
      } catch (const json::exception& ex) {
        fail(ErrorCode::Parse, path.string() + " line " + std::to_string(n) + ": " + ex.what());
      }
    }
  }
  replay(existing);
  std::lock_guard lock(mu_);
  log_path_ = path;
}

const model::QuestionRecord* AnnotationStore::find_question(const std::string& q_id) const {
  auto it = index_.find(q_id);
  return it == index_.end() ? nullptr : &dataset_[it->second];
}

void AnnotationStore::replay(const std::vector<json>& events) {
  std::lock_guard lock(mu_);
  events_.clear();
  sessions_.clear();
  session_order_.clear();
  for (const auto& e : events) {
    apply(e);
    events_.push_back(e);
  }
}

std::vector<json> AnnotationStore::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::optional<AnnotationSession> AnnotationStore::session(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> AnnotationStore::session_ids() const {
  std::lock_guard lock(mu_);
  return session_order_;
}

// Caller holds mu_.
void AnnotationStore::record(json event) {
  event["seq"] = events_.size() + 1;
  apply(event);
  events_.push_back(event);
  if (log_path_) files::append_line(*log_path_, event.dump());
}

// Caller holds mu_. Events are validated before they are recorded, so
// applying one never fails.
void AnnotationStore::apply(const json& e) {
  const std::string type = e.at("type").get<std::string>();
  if (type == "session_created") {
    AnnotationSession s;
    s.id = e.at("session_id").get<std::string>();
    s.annotator_id = e.at("annotator_id").get<std::string>();
    s.phase = *parse_phase(e.at("phase").get<std::string>());
    s.show_answer = e.value("show_answer", false);
    s.question_ids = e.at("questions").get<std::vector<std::string>>();
    for (const auto& q : s.question_ids) s.questions[q];
    session_order_.push_back(s.id);
    sessions_[s.id] = std::move(s);
    return;
  }
  auto& s = sessions_.at(e.at("session_id").get<std::string>());
  auto& q = s.questions.at(e.at("q_id").get<std::string>());
  const std::int64_t ts = e.at("ts").get<std::int64_t>();
  if (type == "attempt") {
    Attempt a{e.at("answer").get<std::string>(), e.at("correct").get<bool>(), q.revealed_hint_count, ts};
    q.attempts.push_back(a);
    if (a.correct) {
      q.status = QuestionStatus::Answered;
      q.answered_before_hints = q.revealed_hint_count == 0;
    }
  } else if (type == "reveal") {
    ++q.revealed_hint_count;
  } else if (type == "skip") {
    q.status = QuestionStatus::Skipped;
  } else if (type == "rating") {
    HintRating r;
    r.values = e.at("ratings").get<std::map<std::string, int>>();
    r.google_found = e.at("google_found").get<bool>();
    r.bing_found = e.at("bing_found").get<bool>();
    r.ts = ts;
    q.ratings[e.at("hint_idx").get<int>()] = std::move(r);
  } else {
    fail(ErrorCode::Parse, "unknown annotation event type '" + type + "'");
  }
}

ApiResponse AnnotationStore::handle(const std::string& method, const std::string& path,
                                    const std::string& body_text) {
  const auto parts = split_path(path);
  if (parts.empty() || parts[0] != "v1") return error(404, "not_found", "unknown route");

  json body = json::object();
  if (method == "POST" && !text::trim(body_text).empty()) {
    try {
      body = json::parse(body_text);
    } catch (const json::exception&) {
      return error(400, "malformed_json", "request body is not valid JSON");
    }
    if (!body.is_object()) return error(400, "malformed_json", "request body must be an object");
  }

  if (parts.size() == 3 && parts[1] == "export" && method == "GET") {
    ApiResponse r;
    r.content_type = "application/x-ndjson";
    if (parts[2] == "ratings.jsonl") {
      r.raw = export_ratings();
      return r;
    }
    if (parts[2] == "answers.jsonl") {
      r.raw = export_answers();
      return r;
    }
    return error(404, "not_found", "unknown export");
  }
  std::lock_guard lock(mu_);
  try {
    if (parts.size() == 2 && parts[1] == "sessions" && method == "POST") return create_session(body);
    if (parts.size() < 3 || parts[1] != "sessions") return error(404, "not_found", "unknown route");

    auto it = sessions_.find(parts[2]);
    if (it == sessions_.end()) return error(404, "unknown_session", "no session '" + parts[2] + "'");
    AnnotationSession& s = it->second;

    if (parts.size() == 3 && method == "GET") {
      json j{{"session_id", s.id}, {"annotator_id", s.annotator_id}, {"phase", phase_name(s.phase)},
             {"questions", s.question_ids}};
      return ok(j);
    }
    if (parts.size() == 4 && parts[3] == "next-question" && method == "GET") return next_question(s);
    if (parts.size() >= 6 && parts[3] == "questions") {
      const std::string& q_id = parts[4];
      if (!s.questions.count(q_id)) {
        return error(404, "unknown_question", "question '" + q_id + "' is not in this session");
      }
      if (parts.size() == 6 && method == "POST") {
        if (parts[5] == "attempt") return attempt(s, q_id, body);
        if (parts[5] == "reveal") return reveal(s, q_id);
        if (parts[5] == "skip") return skip(s, q_id);
      }
      if (parts[5] == "hints" && parts.size() >= 7) {
        const auto k = parse_index(parts[6]);
        if (!k) return error(400, "bad_hint_index", "hint index must be a non-negative integer");
        if (parts.size() == 7 && method == "GET") return get_hint(s, q_id, *k);
        if (parts.size() == 8 && parts[7] == "ratings" && method == "POST") return rate(s, q_id, *k, body);
      }
    }
    return error(404, "not_found", "unknown route");
  } catch (const json::exception& ex) {
    return error(400, "bad_request", ex.what());
  }
}

ApiResponse AnnotationStore::create_session(const json& body) {
  if (!body.contains("annotator_id") || !body.at("annotator_id").is_string() ||
      body.at("annotator_id").get<std::string>().empty()) {
    return error(400, "missing_field", "annotator_id is required");
  }
  const std::string annotator = body.at("annotator_id").get<std::string>();
  std::optional<Phase> phase;
  std::vector<std::string> questions;
  bool show_answer = false;
  if (auto it = plan_.annotators.find(annotator); it != plan_.annotators.end()) {
    phase = it->second.phase;
    questions = it->second.questions;
    show_answer = it->second.show_answer;
  }
  if (body.contains("phase")) {
    if (!body.at("phase").is_string()) return error(400, "bad_phase", "phase must be a string");
    const auto requested = parse_phase(body.at("phase").get<std::string>());
    if (!requested) return error(400, "bad_phase", "phase must be 'rate' or 'answer'");
    if (phase && *phase != *requested) {
      return error(409, "phase_conflict", "the assignment plan puts this annotator in another phase");
    }
    phase = requested;
  }
  if (!phase) phase = Phase::AnswerWithHints;
  if (questions.empty()) {
    for (const auto& r : dataset_) questions.push_back(r.q_id);
  }
  const std::string id = "s" + std::to_string(session_order_.size() + 1);
  record(json{{"type", "session_created"},
              {"ts", clock_()},
              {"session_id", id},
              {"annotator_id", annotator},
              {"phase", phase_name(*phase)},
              {"show_answer", show_answer},
              {"questions", questions}});
  return ok(json{{"session_id", id}, {"phase", phase_name(*phase)}, {"questions", questions}}, 201);
}

ApiResponse AnnotationStore::next_question(AnnotationSession& s) {
  for (const auto& q_id : s.question_ids) {
    const auto& st = s.questions.at(q_id);
    const auto* rec = find_question(q_id);
    if (s.phase == Phase::AnswerWithHints) {
      if (st.status != QuestionStatus::Open) continue;
      json revealed = json::array();
      for (int k = 0; k < st.revealed_hint_count; ++k) {
        revealed.push_back({{"hint_idx", k}, {"text", rec->hints[k].text}});
      }
      return ok(json{{"done", false},
                     {"q_id", q_id},
                     {"question", rec->question},
                     {"hint_count", rec->hints.size()},
                     {"revealed_hint_count", st.revealed_hint_count},
                     {"revealed_hints", revealed}});
    }
    if (st.ratings.size() >= rec->hints.size()) continue;
    json hints = json::array();
    int next = -1;
    for (std::size_t k = 0; k < rec->hints.size(); ++k) {
      hints.push_back({{"hint_idx", k}, {"text", rec->hints[k].text}});
      if (next < 0 && !st.ratings.count(static_cast<int>(k))) next = static_cast<int>(k);
    }
    json j{{"done", false}, {"q_id", q_id}, {"question", rec->question}, {"hints", hints},
           {"next_hint_idx", next}};
    if (s.show_answer) j["answer"] = rec->exact_answer;
    return ok(j);
  }
  return ok(json{{"done", true}});
}

ApiResponse AnnotationStore::attempt(AnnotationSession& s, const std::string& q_id, const json& body) {
  if (s.phase != Phase::AnswerWithHints) return error(409, "wrong_phase", "attempts belong to the answer phase");
  auto& st = s.questions.at(q_id);
  if (st.status != QuestionStatus::Open) return error(409, "question_closed", "question is already closed");
  if (!body.contains("answer") || !body.at("answer").is_string()) {
    return error(400, "missing_field", "answer must be a string (may be empty)");
  }
  const std::string answer = body.at("answer").get<std::string>();
  const bool correct = !text::trim(answer).empty() &&
                       hints::answers_match(answer, find_question(q_id)->exact_answer);
  record(json{{"type", "attempt"}, {"ts", clock_()}, {"session_id", s.id}, {"q_id", q_id},
              {"answer", answer}, {"correct", correct}});
  return ok(json{{"correct", correct},
                 {"revealed_hint_count", st.revealed_hint_count},
                 {"answered_before_hints", st.answered_before_hints},
                 {"status", status_name(st.status)}});
}

ApiResponse AnnotationStore::reveal(AnnotationSession& s, const std::string& q_id) {
  if (s.phase != Phase::AnswerWithHints) return error(409, "wrong_phase", "hints are revealed in the answer phase");
  auto& st = s.questions.at(q_id);
  const auto* rec = find_question(q_id);
  if (st.status != QuestionStatus::Open) return error(409, "question_closed", "question is already closed");
  if (st.revealed_hint_count >= static_cast<int>(rec->hints.size())) {
    return error(409, "no_more_hints", "all hints are already revealed");
  }
  const bool attempted = std::any_of(st.attempts.begin(), st.attempts.end(), [&](const Attempt& a) {
    return a.revealed_hint_count == st.revealed_hint_count && !a.correct;
  });
  if (!attempted) {
    return error(409, "attempt_required",
                 "submit an attempt with the hints revealed so far before revealing another");
  }
  record(json{{"type", "reveal"}, {"ts", clock_()}, {"session_id", s.id}, {"q_id", q_id}});
  const int k = st.revealed_hint_count - 1;
  return ok(json{{"hint_idx", k}, {"text", rec->hints[k].text},
                 {"revealed_hint_count", st.revealed_hint_count}});
}

ApiResponse AnnotationStore::get_hint(AnnotationSession& s, const std::string& q_id, int k) {
  const auto& st = s.questions.at(q_id);
  const auto* rec = find_question(q_id);
  if (k >= static_cast<int>(rec->hints.size())) return error(404, "unknown_hint", "hint index out of range");
  if (s.phase == Phase::AnswerWithHints && k >= st.revealed_hint_count) {
    return error(409, "hint_not_revealed", "hint " + std::to_string(k) + " has not been revealed");
  }
  return ok(json{{"hint_idx", k}, {"text", rec->hints[k].text}});
}

ApiResponse AnnotationStore::rate(AnnotationSession& s, const std::string& q_id, int k, const json& body) {
  if (s.phase != Phase::RateAttributes) return error(409, "wrong_phase", "ratings belong to the rating phase");
  const auto* rec = find_question(q_id);
  if (k >= static_cast<int>(rec->hints.size())) return error(404, "unknown_hint", "hint index out of range");
  json ratings = json::object();
  for (const char* attr : analytics::kRatingAttributes) {
    if (!body.contains(attr) || !body.at(attr).is_number_integer()) {
      return error(400, "missing_rating", std::string("rating '") + attr + "' must be an integer 1..5");
    }
    const int v = body.at(attr).get<int>();
    if (v < 1 || v > 5) return error(400, "rating_out_of_range", std::string("rating '") + attr + "' must be 1..5");
    ratings[attr] = v;
  }
  bool google = false, bing = false;
  for (auto [key, dest] : {std::pair<const char*, bool*>{"google_found", &google}, {"bing_found", &bing}}) {
    if (!body.contains(key)) continue;
    if (!body.at(key).is_boolean()) return error(400, "bad_flag", std::string(key) + " must be a boolean");
    *dest = body.at(key).get<bool>();
  }
  record(json{{"type", "rating"}, {"ts", clock_()}, {"session_id", s.id}, {"q_id", q_id},
              {"hint_idx", k}, {"ratings", ratings}, {"google_found", google}, {"bing_found", bing}});
  return ok(json{{"hint_idx", k}, {"ratings", ratings}}, 201);
}

ApiResponse AnnotationStore::skip(AnnotationSession& s, const std::string& q_id) {
  if (s.phase != Phase::AnswerWithHints) return error(409, "wrong_phase", "skipping belongs to the answer phase");
  auto& st = s.questions.at(q_id);
  if (st.status != QuestionStatus::Open) return error(409, "question_closed", "question is already closed");
  if (st.revealed_hint_count < static_cast<int>(find_question(q_id)->hints.size())) {
    return error(409, "hints_remaining", "a question can be left only after every hint is revealed");
  }
  record(json{{"type", "skip"}, {"ts", clock_()}, {"session_id", s.id}, {"q_id", q_id}});
  return ok(json{{"status", "skipped"}});
}

std::string AnnotationStore::export_ratings() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& id : session_order_) {
    const auto& s = sessions_.at(id);
    for (const auto& q_id : s.question_ids) {
      for (const auto& [k, r] : s.questions.at(q_id).ratings) {
        for (const char* attr : analytics::kRatingAttributes) {
          nlohmann::ordered_json line;
          line["annotator_id"] = s.annotator_id;
          line["q_id"] = q_id;
          line["hint_idx"] = k;
          line["attribute"] = attr;
          line["value"] = r.values.at(attr);
          line["google_found"] = r.google_found;
          line["bing_found"] = r.bing_found;
          out += line.dump() + "\n";
        }
      }
    }
  }
  return out;
}

std::string AnnotationStore::export_answers() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& id : session_order_) {
    const auto& s = sessions_.at(id);
    if (s.phase != Phase::AnswerWithHints) continue;
    for (const auto& q_id : s.question_ids) {
      const auto& st = s.questions.at(q_id);
      nlohmann::ordered_json line;
      line["annotator_id"] = s.annotator_id;
      line["q_id"] = q_id;
      line["status"] = status_name(st.status);
      line["answered_before_hints"] = st.answered_before_hints;
      line["revealed_hint_count"] = st.revealed_hint_count;
      line["attempts"] = nlohmann::ordered_json::array();
      for (const auto& a : st.attempts) {
        line["attempts"].push_back({{"answer", a.answer}, {"correct", a.correct},
                                    {"revealed_hint_count", a.revealed_hint_count}, {"ts", a.ts}});
      }
      out += line.dump() + "\n";
    }
  }
  return out;
}

// ---- HTTP ----------------------------------------------------------------------

struct AnnotationServer::Impl {
  std::shared_ptr<AnnotationStore> store;
  std::string token;
  httplib::Server server;
  std::thread thread;
};

AnnotationServer::AnnotationServer(std::shared_ptr<AnnotationStore> store, std::string bearer_token)
    : impl_(std::make_unique<Impl>()) {
  impl_->store = std::move(store);
  impl_->token = std::move(bearer_token);
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r;
    if (!impl_->token.empty() && req.get_header_value("Authorization") != "Bearer " + impl_->token) {
      r = ApiResponse{401, json{{"error", {{"code", "unauthorized"}, {"message", "bearer token required"}}}}, "application/json", ""};
    } else {
      r = impl_->store->handle(req.method, req.path, req.body);
    }
    res.status = r.status;
    if (!r.raw.empty() || r.content_type != "application/json") {
      res.set_content(r.raw, r.content_type);
    } else {
      res.set_content(r.body.dump(), "application/json");
    }
  };
  impl_->server.Get(R"(/v1/.*)", handler);
  impl_->server.Post(R"(/v1/.*)", handler);
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) fail(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void AnnotationServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    fail(ErrorCode::Io, "cannot serve on " + host + ":" + std::to_string(port));
  }
}

void AnnotationServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace thg::orchestrator
