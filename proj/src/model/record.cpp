#include "model/record.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "common/error.hpp"
#include "common/files.hpp"
#include "common/text.hpp"
#include "model/labels.hpp"

namespace thg::model {
namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  fail(ErrorCode::Validation, "field " + field + ": " + why);
}

void check_unit(const std::string& field, double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    invalid(field, "value must lie in [0, 1]");
  }
}

void check_unit(const std::string& field, const std::optional<double>& v) {
  if (v) check_unit(field, *v);
}

// ---- decoding helpers ------------------------------------------------------

// Reader over one JSON object that tracks which keys were consumed, so any
// leftover key can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) invalid(path_, "expected a JSON object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& require(const char* key) {
    const json* v = find(key);
    if (v == nullptr) invalid(field(key), "required field missing");
    return *v;
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void reject_unknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) invalid(field(it.key().c_str()), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) invalid(field, "expected a string");
  return v.get<std::string>();
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) invalid(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) invalid(field, "expected a finite number");
  return d;
}

std::optional<double> as_opt_number(const json* v, const std::string& field) {
  if (v == nullptr || v->is_null()) return std::nullopt;
  return as_number(*v, field);
}

std::optional<std::string> as_opt_string(const json* v, const std::string& field) {
  if (v == nullptr || v->is_null()) return std::nullopt;
  return as_string(*v, field);
}

const json& as_array(const json& v, const std::string& field) {
  if (!v.is_array()) invalid(field, "expected an array");
  return v;
}

std::vector<std::string> as_string_list(const json* v, const std::string& field) {
  std::vector<std::string> out;
  if (v == nullptr || v->is_null()) return out;
  for (const auto& item : as_array(*v, field)) out.push_back(as_string(item, field));
  return out;
}

std::vector<std::optional<double>> as_opt_number_list(const json* v, const std::string& field) {
  std::vector<std::optional<double>> out;
  if (v == nullptr || v->is_null()) return out;
  for (const auto& item : as_array(*v, field)) {
    out.push_back(item.is_null() ? std::nullopt : std::optional(as_number(item, field)));
  }
  return out;
}

EntityMention decode_entity(const json& v, const std::string& path) {
  ObjectReader r(v, path);
  EntityMention e;
  e.surface = as_string(r.require("Surface"), r.field("Surface"));
  e.wiki_title = as_opt_string(r.find("Wiki_Title"), r.field("Wiki_Title"));
  e.raw_views = as_opt_number(r.find("Raw_Views"), r.field("Raw_Views"));
  r.reject_unknown();
  return e;
}

Hint decode_hint(const json& v, const std::string& path) {
  ObjectReader r(v, path);
  Hint h;
  h.text = as_string(r.require("Hint"), r.field("Hint"));
  if (const json* src = r.find("Hints_Sources"); src != nullptr && !src->is_null()) {
    for (const auto& item : as_array(*src, r.field("Hints_Sources"))) {
      if (!item.is_number_integer()) invalid(r.field("Hints_Sources"), "expected integers");
      h.source_indices.push_back(item.get<int>());
    }
  }
  if (const json* ents = r.find("Entities"); ents != nullptr && !ents->is_null()) {
    std::size_t i = 0;
    for (const auto& item : as_array(*ents, r.field("Entities"))) {
      h.entities.push_back(decode_entity(item, r.field("Entities") + "[" + std::to_string(i++) + "]"));
    }
  }
  h.h_popularity = as_opt_number_list(r.find("H_Popularity"), r.field("H_Popularity"));
  if (const json* scores = r.find("Scores"); scores != nullptr && !scores->is_null()) {
    for (const auto& item : as_array(*scores, r.field("Scores"))) {
      if (item.is_null()) {
        h.candidate_verdicts.emplace_back(std::nullopt);
      } else if (item.is_boolean()) {
        h.candidate_verdicts.emplace_back(item.get<bool>());
      } else {
        invalid(r.field("Scores"), "expected booleans or null");
      }
    }
  }
  h.hicos = as_opt_number(r.find("Convergence"), r.field("Convergence"));
  h.hifas = as_opt_number(r.find("Familiarity"), r.field("Familiarity"));
  if (const json* leak = r.find("Leak"); leak != nullptr && !leak->is_null()) {
    if (!leak->is_boolean()) invalid(r.field("Leak"), "expected a boolean");
    h.leak_flag = leak->get<bool>();
  }
  h.question_similarity =
      as_opt_number(r.find("Question_Similarity"), r.field("Question_Similarity"));
  r.reject_unknown();
  return h;
}

// ---- encoding helpers ------------------------------------------------------

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json opt(const std::optional<std::string>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json encode_hint(const Hint& h) {
  ordered_json j = ordered_json::object();
  j["Hint"] = h.text;
  j["Hints_Sources"] = h.source_indices;
  ordered_json ents = ordered_json::array();
  for (const auto& e : h.entities) {
    ordered_json ej = ordered_json::object();
    ej["Surface"] = e.surface;
    ej["Wiki_Title"] = opt(e.wiki_title);
    ej["Raw_Views"] = opt(e.raw_views);
    ents.push_back(std::move(ej));
  }
  j["Entities"] = std::move(ents);
  ordered_json pop = ordered_json::array();
  for (const auto& p : h.h_popularity) pop.push_back(opt(p));
  j["H_Popularity"] = std::move(pop);
  ordered_json scores = ordered_json::array();
  for (const auto& s : h.candidate_verdicts) {
    scores.push_back(s ? ordered_json(*s) : ordered_json(nullptr));
  }
  j["Scores"] = std::move(scores);
  j["Convergence"] = opt(h.hicos);
  j["Familiarity"] = opt(h.hifas);
  j["Leak"] = h.leak_flag;
  j["Question_Similarity"] = opt(h.question_similarity);
  return j;
}

}  // namespace

const char* major_type_name(MajorType t) {
  switch (t) {
    case MajorType::Human: return "HUMAN";
    case MajorType::Entity: return "ENTITY";
    case MajorType::Location: return "LOCATION";
    case MajorType::Other: return "OTHER";
    case MajorType::Description: return "DESCRIPTION";
  }
  return "OTHER";
}

std::optional<MajorType> parse_major_type(std::string_view name) {
  if (name == "HUMAN") return MajorType::Human;
  if (name == "ENTITY") return MajorType::Entity;
  if (name == "LOCATION") return MajorType::Location;
  if (name == "OTHER") return MajorType::Other;
  if (name == "DESCRIPTION") return MajorType::Description;
  return std::nullopt;
}

void validate(const QuestionRecord& r, ValidationLevel level) {
  if (r.q_id.empty()) invalid("Q_ID", "must be nonempty");
  if (text::trim(r.question).empty()) invalid("Question", "must be nonempty");
  if (text::trim(r.exact_answer).empty()) invalid("ExactAnswer", "must be nonempty");
  if (r.minor_type) {
    const auto parent = parent_major(*r.minor_type);
    if (!parent) invalid("MinorType", "unknown fine-grained label '" + *r.minor_type + "'");
    if (r.major_type && *parent != *r.major_type) {
      invalid("MinorType", "coarse parent does not match MajorType");
    }
  }
  for (std::size_t i = 0; i < r.q_popularity.size(); ++i) {
    check_unit("Q_Popularity[" + std::to_string(i) + "]", r.q_popularity[i]);
  }
  check_unit("Exact_Answer_Popularity", r.exact_answer_popularity);
  check_unit("Convergence", r.convergence);
  check_unit("Familiarity", r.familiarity);

  for (std::size_t i = 0; i < r.hints.size(); ++i) {
    const Hint& h = r.hints[i];
    const std::string p = "Hints[" + std::to_string(i) + "]";
    if (text::trim(h.text).empty()) invalid(p + ".Hint", "must be nonempty");
    for (int s : h.source_indices) {
      if (s < 0) invalid(p + ".Hints_Sources", "indices must be non-negative");
    }
    if (h.h_popularity.size() != h.entities.size()) {
      invalid(p + ".H_Popularity", "length must equal the number of entities");
    }
    for (std::size_t k = 0; k < h.entities.size(); ++k) {
      const auto& e = h.entities[k];
      const std::string ep = p + ".Entities[" + std::to_string(k) + "]";
      if (e.surface.empty() || h.text.find(e.surface) == std::string::npos) {
        invalid(ep + ".Surface", "must be a substring of the hint text");
      }
      if (e.raw_views && (!std::isfinite(*e.raw_views) || *e.raw_views < 0.0)) {
        invalid(ep + ".Raw_Views", "must be non-negative");
      }
      check_unit(p + ".H_Popularity[" + std::to_string(k) + "]", h.h_popularity[k]);
    }
    if (!h.candidate_verdicts.empty() &&
        h.candidate_verdicts.size() != r.candidate_answers.size()) {
      invalid(p + ".Scores", "length must equal the number of candidate answers");
    }
    check_unit(p + ".Convergence", h.hicos);
    check_unit(p + ".Familiarity", h.hifas);
    if (h.question_similarity &&
        (!std::isfinite(*h.question_similarity) || *h.question_similarity < -1.0 ||
         *h.question_similarity > 1.0)) {
      invalid(p + ".Question_Similarity", "must lie in [-1, 1]");
    }
  }

  if (level == ValidationLevel::Raw) return;

  if (!text::ends_with_question_mark(r.question)) {
    invalid("Question", "must end with '?'");
  }
  const std::size_t words = text::word_count(r.question);
  if (words < kMinQuestionWords || words > kMaxQuestionWords) {
    invalid("Question", "word count " + std::to_string(words) + " outside [6, 20]");
  }

  if (level == ValidationLevel::Admitted) return;

  if (!r.major_type) invalid("MajorType", "required in a final dataset");
  if (*r.major_type == MajorType::Description) {
    invalid("MajorType", "DESCRIPTION questions are excluded from final datasets");
  }
  if (!r.minor_type) invalid("MinorType", "required in a final dataset");
  if (r.hints.size() < kMinFinalHints) {
    invalid("Hints", "final datasets need at least 5 hints, found " +
                         std::to_string(r.hints.size()));
  }
  for (std::size_t i = 0; i < r.hints.size(); ++i) {
    const Hint& h = r.hints[i];
    const std::string p = "Hints[" + std::to_string(i) + "]";
    if (h.leak_flag) invalid(p + ".Leak", "leaking hints are excluded from final datasets");
    if (!h.question_similarity) invalid(p + ".Question_Similarity", "required in a final dataset");
    if (*h.question_similarity >= kSimilarityThreshold) {
      invalid(p + ".Question_Similarity", "must be below 0.72 in a final dataset");
    }
  }
}

QuestionRecord parse_record(std::string_view json_line, std::size_t line_number,
                            ValidationLevel level) {
  const std::string where = "line " + std::to_string(line_number) + ": ";
  json doc;
  try {
    doc = json::parse(json_line);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, where + "malformed JSON (" + e.what() + ")");
  }
  try {
    ObjectReader r(doc, "");
    QuestionRecord rec;
    rec.q_id = as_string(r.require("Q_ID"), "Q_ID");
    rec.question = as_string(r.require("Question"), "Question");
    if (const json* hints = r.find("Hints"); hints != nullptr && !hints->is_null()) {
      std::size_t i = 0;
      for (const auto& h : as_array(*hints, "Hints")) {
        rec.hints.push_back(decode_hint(h, "Hints[" + std::to_string(i++) + "]"));
      }
    }
    rec.snippet = as_opt_string(r.find("Snippet"), "Snippet").value_or("");
    rec.snippet_sources = as_string_list(r.find("Snippet_Sources"), "Snippet_Sources");
    rec.exact_answer = as_string(r.require("ExactAnswer"), "ExactAnswer");
    if (auto major = as_opt_string(r.find("MajorType"), "MajorType")) {
      rec.major_type = parse_major_type(*major);
      if (!rec.major_type) invalid("MajorType", "unknown class '" + *major + "'");
    }
    rec.minor_type = as_opt_string(r.find("MinorType"), "MinorType");
    rec.candidate_answers = as_string_list(r.find("Candidate_Answers"), "Candidate_Answers");
    rec.q_popularity = as_opt_number_list(r.find("Q_Popularity"), "Q_Popularity");
    rec.exact_answer_popularity =
        as_opt_number(r.find("Exact_Answer_Popularity"), "Exact_Answer_Popularity");
    rec.convergence = as_opt_number(r.find("Convergence"), "Convergence");
    rec.familiarity = as_opt_number(r.find("Familiarity"), "Familiarity");
    r.reject_unknown();
    validate(rec, level);
    return rec;
  } catch (const Error& e) {
    throw Error(e.code(), where + e.what());
  } catch (const json::exception& e) {
    fail(ErrorCode::Validation, where + e.what());
  }
}

std::string serialize_record(const QuestionRecord& r, ValidationLevel level) {
  validate(r, level);
  ordered_json j = ordered_json::object();
  j["Q_ID"] = r.q_id;
  j["Question"] = r.question;
  ordered_json hints = ordered_json::array();
  for (const auto& h : r.hints) hints.push_back(encode_hint(h));
  j["Hints"] = std::move(hints);
  j["Snippet"] = r.snippet;
  j["Snippet_Sources"] = r.snippet_sources;
  j["ExactAnswer"] = r.exact_answer;
  j["MajorType"] = r.major_type ? ordered_json(major_type_name(*r.major_type)) : ordered_json(nullptr);
  j["MinorType"] = opt(r.minor_type);
  j["Candidate_Answers"] = r.candidate_answers;
  ordered_json qpop = ordered_json::array();
  for (const auto& p : r.q_popularity) qpop.push_back(opt(p));
  j["Q_Popularity"] = std::move(qpop);
  j["Exact_Answer_Popularity"] = opt(r.exact_answer_popularity);
  j["Convergence"] = opt(r.convergence);
  j["Familiarity"] = opt(r.familiarity);
  try {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
  } catch (const json::exception& e) {
    fail(ErrorCode::Validation, "record " + r.q_id + " is not valid UTF-8 (" + e.what() + ")");
  }
}

void validate_unique_ids(const std::vector<QuestionRecord>& records) {
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.q_id).second) invalid("Q_ID", "duplicate id '" + r.q_id + "'");
  }
}

std::vector<QuestionRecord> read_dataset(const std::string& path, ValidationLevel level) {
  std::vector<QuestionRecord> out;
  const auto lines = files::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    out.push_back(parse_record(lines[i], i + 1, level));
  }
  validate_unique_ids(out);
  return out;
}

void write_dataset(const std::string& path, const std::vector<QuestionRecord>& records,
                   ValidationLevel level) {
  validate_unique_ids(records);
  std::string content;
  for (const auto& r : records) {
    content += serialize_record(r, level);
    content += '\n';
  }
  files::write_atomic(path, content);
}

}  // namespace thg::model
