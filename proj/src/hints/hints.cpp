#include "hints/hints.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "common/error.hpp"
#include "common/text.hpp"
#include "hints/lemmatizer.hpp"

namespace thg::hints {

const char* generation_status_name(GenerationStatus s) {
  switch (s) {
    case GenerationStatus::AnswerNotFound: return "AnswerNotFound";
    case GenerationStatus::AnswerMismatch: return "AnswerMismatch";
    case GenerationStatus::Ok: return "Ok";
  }
  return "Unknown";
}

bool answers_match(const std::string& generated, const std::string& ground_truth) {
  const auto g = text::normalized_answer_tokens(generated);
  const auto t = text::normalized_answer_tokens(ground_truth);
  return text::contains_token_run(g, t) || text::contains_token_run(t, g);
}

bool is_declined_answer(const std::string& reply) {
  static constexpr std::array<std::string_view, 12> kDeclines = {
      "i don't know",       "i do not know",    "i don’t know",     "i'm not sure",
      "i am not sure",      "i cannot answer",  "i can't answer",   "unable to answer",
      "unable to find",     "i couldn't find",  "i could not find", "no answer",
  };
  const std::string lower = text::to_lower_ascii(text::trim(reply));
  if (lower.empty()) return true;
  return std::any_of(kDeclines.begin(), kDeclines.end(),
                     [&](std::string_view p) { return lower.find(p) != std::string::npos; });
}

MarkerParse parse_source_markers(const std::string& input) {
  MarkerParse out;
  std::string buf;
  buf.reserve(input.size());
  std::size_t i = 0;
  while (i < input.size()) {
    if (input[i] == '[') {
      std::size_t j = i + 1;
      while (j < input.size() && input[j] >= '0' && input[j] <= '9') ++j;
      if (j > i + 1 && j < input.size() && input[j] == ']' && j - i - 1 <= 6) {
        const int idx = std::stoi(input.substr(i + 1, j - i - 1));
        if (std::find(out.source_indices.begin(), out.source_indices.end(), idx) ==
            out.source_indices.end()) {
          out.source_indices.push_back(idx);
        }
        i = j + 1;
        // "word [1]." must not leave "word ." behind.
        const char next = i < input.size() ? input[i] : '\0';
        if (!buf.empty() && buf.back() == ' ' &&
            (next == '.' || next == ',' || next == ';' || next == ':' || next == '!' ||
             next == '?')) {
          buf.pop_back();
        }
        continue;
      }
    }
    buf.push_back(input[i]);
    ++i;
  }
  out.clean_text = text::collapse_whitespace(buf);
  return out;
}

namespace {

std::optional<std::pair<int, std::string>> reference_line(const std::string& line) {
  const std::string t = text::trim(line);
  if (t.size() < 4 || t[0] != '[') return std::nullopt;
  std::size_t j = 1;
  while (j < t.size() && t[j] >= '0' && t[j] <= '9') ++j;
  if (j == 1 || j >= t.size() || t[j] != ']') return std::nullopt;
  const int idx = std::stoi(t.substr(1, j - 1));
  std::size_t k = j + 1;
  if (k < t.size() && t[k] == ':') ++k;
  const auto rest = text::split_whitespace(t.substr(k));
  if (rest.empty()) return std::nullopt;
  const std::string& url = rest.front();
  if (url.find("://") == std::string::npos && url.rfind("www.", 0) != 0) return std::nullopt;
  return std::make_pair(idx, url);
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : s) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

// Returns the item text when `line` opens a list item.
std::optional<std::string> list_item(const std::string& line) {
  std::string t = text::trim(line);
  if (t.empty()) return std::nullopt;
  std::size_t j = 0;
  while (j < t.size() && t[j] >= '0' && t[j] <= '9') ++j;
  if (j > 0 && j < t.size() && (t[j] == '.' || t[j] == ')')) {
    return text::trim(t.substr(j + 1));
  }
  if (t[0] == '-' || t[0] == '*') {
    // "**bold**" at the start of a line is emphasis, not a bullet.
    if (t.size() > 1 && t[0] == '*' && t[1] == '*') return std::nullopt;
    return text::trim(t.substr(1));
  }
  if (t.rfind("\xE2\x80\xA2", 0) == 0) return text::trim(t.substr(3));
  return std::nullopt;
}

std::string strip_emphasis(std::string s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '*' && i + 1 < s.size() && s[i + 1] == '*') {
      ++i;
      continue;
    }
    out.push_back(s[i]);
  }
  return text::trim(out);
}

}  // namespace

SourceList extract_references(const std::string& reply) {
  SourceList out;
  std::vector<std::string> body;
  for (const auto& line : split_lines(reply)) {
    if (auto ref = reference_line(line)) {
      out.references.push_back(*ref);
    } else {
      body.push_back(line);
    }
  }
  out.body = text::join(body, "\n");
  std::stable_sort(out.references.begin(), out.references.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::vector<RawHint> parse_hint_list(const std::string& reply) {
  std::vector<std::string> items;
  bool in_item = false;
  for (const auto& line : split_lines(reply)) {
    if (reference_line(line)) {
      in_item = false;
      continue;
    }
    if (auto item = list_item(line)) {
      items.push_back(*item);
      in_item = true;
    } else if (text::trim(line).empty()) {
      in_item = false;
    } else if (in_item) {
      items.back() += " " + text::trim(line);
    }
  }
  std::vector<RawHint> out;
  for (const auto& item : items) {
    auto parsed = parse_source_markers(strip_emphasis(item));
    if (parsed.clean_text.empty()) continue;
    out.push_back(RawHint{parsed.clean_text, parsed.source_indices});
  }
  return out;
}

GenerationOutcome elicit_and_verify(const std::string& question, const std::string& answer,
                                    clients::ServiceClient& chat, const GenerationConfig& config) {
  GenerationOutcome out;
  const auto first = chat.chat(question);
  const SourceList answer_refs = extract_references(first.response);
  const std::string body = text::trim(answer_refs.body);
  if (!body.empty()) out.snippet = body;
  for (const auto& [idx, url] : answer_refs.references) {
    if (std::find(out.snippet_sources.begin(), out.snippet_sources.end(), url) ==
        out.snippet_sources.end()) {
      out.snippet_sources.push_back(url);
    }
  }
  if (is_declined_answer(body)) {
    out.status = GenerationStatus::AnswerNotFound;
    return out;
  }
  if (!answers_match(parse_source_markers(body).clean_text, answer)) {
    out.status = GenerationStatus::AnswerMismatch;
    return out;
  }

  const std::string prompt =
      text::fill_template(config.hint_prompt, {{"QUESTION", question},
                                               {"ANSWER", answer},
                                               {"N", std::to_string(config.hints_per_question)}});
  const auto second = chat.chat(prompt);
  const SourceList hint_refs = extract_references(second.response);
  auto hints = parse_hint_list(hint_refs.body);
  if (hints.empty()) {
    fail(ErrorCode::Generation, "no hint list could be parsed for question: " + question);
  }

  // Hint markers number the hint reply's own references; rewrite them as
  // 1-based positions in the merged source list.
  std::map<int, int> remap;
  for (const auto& [idx, url] : hint_refs.references) {
    auto it = std::find(out.snippet_sources.begin(), out.snippet_sources.end(), url);
    if (it == out.snippet_sources.end()) {
      out.snippet_sources.push_back(url);
      it = std::prev(out.snippet_sources.end());
    }
    remap[idx] = static_cast<int>(std::distance(out.snippet_sources.begin(), it)) + 1;
  }
  for (auto& h : hints) {
    std::vector<int> mapped;
    for (int idx : h.source_indices) {
      const int m = remap.count(idx) ? remap[idx] : idx;
      if (std::find(mapped.begin(), mapped.end(), m) == mapped.end()) mapped.push_back(m);
    }
    h.source_indices = std::move(mapped);
  }
  out.hints_raw = std::move(hints);
  out.status = GenerationStatus::Ok;
  return out;
}

// ---- filtering -------------------------------------------------------------------

LeakageReport leaks_answer(const std::string& hint, const std::string& answer) {
  LeakageReport r;
  for (const auto& tok : text::word_tokens(hint)) r.hint_lemmas.insert(lemmatize(tok));
  for (const auto& tok : text::word_tokens(answer)) {
    if (is_stopword(tok)) continue;
    r.answer_lemmas.insert(lemmatize(tok));
  }
  std::set_intersection(r.hint_lemmas.begin(), r.hint_lemmas.end(), r.answer_lemmas.begin(),
                        r.answer_lemmas.end(), std::inserter(r.overlap, r.overlap.begin()));
  r.leaked = !r.overlap.empty();
  return r;
}

Embedder client_embedder(std::shared_ptr<clients::ServiceClient> client) {
  return [client = std::move(client)](const std::string& text) { return client->embed(text); };
}

double question_similarity(const std::string& hint, const std::string& question,
                           const Embedder& embed) {
  return clients::cosine_similarity(embed(hint), embed(question));
}

FilterResult filter_hints(const std::vector<model::Hint>& hints, const std::string& answer,
                          const std::string& question, const Embedder& embed, double threshold) {
  FilterResult out;
  std::optional<clients::EmbeddingVector> question_vec;
  for (model::Hint h : hints) {
    h.leak_flag = leaks_answer(h.text, answer).leaked;
    if (h.leak_flag) {
      out.leaked.push_back(std::move(h));
      continue;
    }
    if (!question_vec) question_vec = embed(question);
    h.question_similarity = clients::cosine_similarity(embed(h.text), *question_vec);
    if (*h.question_similarity >= threshold) {
      out.rephrased.push_back(std::move(h));
    } else {
      out.kept.push_back(std::move(h));
    }
  }
  return out;
}

PruneResult prune_questions(const std::vector<model::QuestionRecord>& records,
                            std::size_t min_hints) {
  PruneResult out;
  for (const auto& r : records) {
    if (r.hints.size() >= min_hints) {
      out.kept.push_back(r);
    } else {
      out.dropped_ids.push_back(r.q_id);
    }
  }
  return out;
}

}  // namespace thg::hints
