#include "questions/questions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "common/error.hpp"
#include "common/random.hpp"
#include "common/text.hpp"
#include "model/labels.hpp"

namespace thg::questions {

using model::MajorType;

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::TooShort: return "TooShort";
    case RejectReason::TooLong: return "TooLong";
    case RejectReason::NoQuestionMark: return "NoQuestionMark";
    case RejectReason::AnswerNoWikiPage: return "AnswerNoWikiPage";
    case RejectReason::DescriptionType: return "DescriptionType";
  }
  return "Unknown";
}

WikiResolver client_resolver(std::shared_ptr<clients::ServiceClient> client) {
  return [client = std::move(client)](const std::string& title) {
    return client->resolve_title(title);
  };
}

AdmissionVerdict filter_question(const std::string& question, const std::string& answer,
                                 const WikiResolver& resolver) {
  const std::size_t words = text::word_count(question);
  if (words < model::kMinQuestionWords) return AdmissionVerdict::reject(RejectReason::TooShort);
  if (words > model::kMaxQuestionWords) return AdmissionVerdict::reject(RejectReason::TooLong);
  if (!text::ends_with_question_mark(question)) {
    return AdmissionVerdict::reject(RejectReason::NoQuestionMark);
  }
  const std::string title = text::trim(answer);
  if (title.empty() || !resolver(title)) {
    return AdmissionVerdict::reject(RejectReason::AnswerNoWikiPage);
  }
  return AdmissionVerdict::accept();
}

// ---- keyword classifier ------------------------------------------------------

namespace {

struct HeadRule {
  std::initializer_list<std::string_view> nouns;
  std::string_view label;
};

// Head nouns that may follow "which"/"what"/"name" within a short window.
const std::array<HeadRule, 24> kHeadRules = {{
    {{"city", "cities", "town", "capital", "village", "port"}, "LOC:city"},
    {{"country", "countries", "nation", "kingdom", "republic"}, "LOC:country"},
    {{"state", "county", "province", "region"}, "LOC:state"},
    {{"mountain", "mountains", "peak", "volcano", "mount"}, "LOC:mount"},
    {{"river", "lake", "sea", "ocean", "island", "continent", "desert", "strait", "bay"},
     "LOC:other"},
    {{"team", "band", "group", "company", "club", "organization", "organisation", "party"},
     "HUM:gr"},
    {{"actor", "actress", "singer", "writer", "author", "president", "king", "queen",
      "composer", "painter", "artist", "poet", "player", "man", "woman", "person",
      "scientist", "explorer", "footballer", "director", "emperor", "prime"},
     "HUM:ind"},
    {{"title"}, "HUM:title"},
    {{"animal", "bird", "fish", "dog", "breed", "insect", "mammal", "creature"}, "ENTY:animal"},
    {{"language", "languages"}, "ENTY:lang"},
    {{"colour", "color"}, "ENTY:color"},
    {{"sport", "game"}, "ENTY:sport"},
    {{"currency"}, "ENTY:currency"},
    {{"disease", "illness", "condition"}, "ENTY:dismed"},
    {{"food", "dish", "drink", "cheese", "fruit", "vegetable", "cocktail"}, "ENTY:food"},
    {{"plant", "flower", "tree", "herb"}, "ENTY:plant"},
    {{"instrument"}, "ENTY:instru"},
    {{"religion", "faith"}, "ENTY:religion"},
    {{"element", "substance", "chemical", "metal", "gas", "mineral"}, "ENTY:substance"},
    {{"film", "movie", "book", "novel", "play", "song", "album", "opera", "painting", "poem",
      "musical", "show", "series"},
     "ENTY:cremat"},
    {{"car", "ship", "vehicle", "aircraft", "plane", "boat"}, "ENTY:veh"},
    {{"event", "war", "battle"}, "ENTY:event"},
    {{"word", "term", "name"}, "ENTY:termeq"},
    {{"letter"}, "ENTY:letter"},
}};

std::optional<std::string_view> head_noun_label(const std::vector<std::string>& tokens,
                                                std::size_t from) {
  const std::size_t end = std::min(tokens.size(), from + 3);
  for (std::size_t i = from; i < end; ++i) {
    for (const auto& rule : kHeadRules) {
      for (auto noun : rule.nouns) {
        if (tokens[i] == noun) return rule.label;
      }
    }
  }
  return std::nullopt;
}

bool has_token(const std::vector<std::string>& t, std::string_view w) {
  return std::find(t.begin(), t.end(), w) != t.end();
}

std::string_view keyword_label(const std::vector<std::string>& t) {
  static const std::set<std::string_view> kWh = {"who",  "whom", "whose", "where", "when",
                                                 "why",  "how",  "what",  "which", "name"};
  std::size_t w = 0;
  while (w < t.size() && !kWh.count(t[w])) ++w;
  if (w == t.size()) return "ENTY:other";

  const std::string_view wh = t[w];
  const std::string_view next = w + 1 < t.size() ? std::string_view(t[w + 1]) : "";

  if (wh == "how") {
    if (next == "many") return "NUM:count";
    if (next == "much") return has_token(t, "weigh") ? "NUM:weight" : "NUM:money";
    if (next == "long" || next == "old") return "NUM:period";
    if (next == "far" || next == "high" || next == "tall" || next == "deep" || next == "wide") {
      return "NUM:dist";
    }
    if (next == "fast") return "NUM:speed";
    if (next == "hot" || next == "cold") return "NUM:temp";
    return "DESC:manner";
  }
  if (wh == "why") return "DESC:reason";
  if (wh == "when") return "NUM:date";
  if (wh == "where") return "LOC:other";
  if (wh == "who" || wh == "whom" || wh == "whose") {
    // "Who is Barack Obama?" asks for a description of a named person.
    if ((next == "is" || next == "was") && t.size() - w <= 4) return "HUM:desc";
    return "HUM:ind";
  }
  // what / which / name
  if (next == "year" || next == "date" || next == "century" || next == "decade" ||
      next == "month" || next == "day") {
    return "NUM:date";
  }
  if (wh == "what" && has_token(t, "does") && has_token(t, "mean")) return "DESC:def";
  if (auto label = head_noun_label(t, w + 1)) return *label;
  return "ENTY:other";
}

}  // namespace

QuestionTypeLabel KeywordClassifier::classify(const std::string& question) {
  const auto tokens = text::word_tokens(question);
  const std::string_view label = keyword_label(tokens);
  QuestionTypeLabel out;
  out.minor = std::string(label);
  out.major = *model::parent_major(label);
  return out;
}

// ---- LLM classifier ------------------------------------------------------------

LlmClassifier::LlmClassifier(std::shared_ptr<clients::ServiceClient> client)
    : client_(std::move(client)) {}

std::string LlmClassifier::build_prompt(const std::string& question) {
  std::string prompt =
      "Classify the question into exactly one TREC question type label from this list: ";
  const auto labels = model::fine_grained_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) prompt += ", ";
    prompt += labels[i];
  }
  prompt += ". Reply with the label only.\nQuestion: ";
  prompt += question;
  return prompt;
}

QuestionTypeLabel LlmClassifier::parse_reply(const std::string& reply) {
  const std::string lower = text::to_lower_ascii(reply);
  std::size_t best_pos = std::string::npos;
  std::string_view best;
  for (auto label : model::fine_grained_labels()) {
    const auto pos = lower.find(text::to_lower_ascii(label));
    if (pos == std::string::npos) continue;
    // Earliest match wins; at equal positions the longer label is more specific.
    if (pos < best_pos || (pos == best_pos && label.size() > best.size())) {
      best_pos = pos;
      best = label;
    }
  }
  if (best.empty()) {
    fail(ErrorCode::Classification, "no question-type label in classifier reply: " +
                                        reply.substr(0, 120));
  }
  QuestionTypeLabel out;
  out.minor = std::string(best);
  out.major = *model::parent_major(best);
  return out;
}

QuestionTypeLabel LlmClassifier::classify(const std::string& question) {
  return parse_reply(client_->chat(build_prompt(question)).response);
}

QuestionTypeLabel classify_type(const std::string& question, QuestionClassifier& classifier) {
  return classifier.classify(question);
}

// ---- stratified sampling -------------------------------------------------------

std::vector<std::size_t> stratified_quotas(const std::vector<std::size_t>& class_sizes,
                                           double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "sampling fraction must lie in (0, 1]");
  }
  std::size_t total = 0;
  for (auto n : class_sizes) total += n;
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));

  std::vector<std::size_t> quota(class_sizes.size());
  std::vector<double> remainder(class_sizes.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    const double exact = fraction * static_cast<double>(class_sizes[c]);
    // The epsilon absorbs products like 0.29 * 100 = 28.999999999999996.
    quota[c] = std::min(class_sizes[c], static_cast<std::size_t>(std::floor(exact + 1e-9)));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(class_sizes.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    const std::size_t c = order[k];
    if (quota[c] < class_sizes[c] && remainder[c] > 1e-9) {
      ++quota[c];
      ++assigned;
    }
  }
  return quota;
}

std::vector<model::QuestionRecord> stratified_sample(
    const std::vector<model::QuestionRecord>& records, double fraction, std::uint64_t seed) {
  if (records.empty()) return {};
  constexpr std::size_t kClasses = 5;
  std::array<std::vector<std::size_t>, kClasses> members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].major_type) {
      fail(ErrorCode::InvalidArgument, "record " + records[i].q_id + " has no major type");
    }
    members[static_cast<std::size_t>(*records[i].major_type)].push_back(i);
  }
  std::vector<std::size_t> sizes;
  for (const auto& m : members) sizes.push_back(m.size());
  const auto quota = stratified_quotas(sizes, fraction);

  std::mt19937_64 rng(seed);
  std::vector<bool> chosen(records.size(), false);
  for (std::size_t c = 0; c < kClasses; ++c) {
    auto pool = members[c];
    // Partial Fisher-Yates: the first quota[c] slots become the sample.
    for (std::size_t k = 0; k < quota[c]; ++k) {
      const auto j = k + static_cast<std::size_t>(uniform_below(rng, pool.size() - k));
      std::swap(pool[k], pool[j]);
      chosen[pool[k]] = true;
    }
  }
  std::vector<model::QuestionRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (chosen[i]) out.push_back(records[i]);
  }
  return out;
}

}  // namespace thg::questions
