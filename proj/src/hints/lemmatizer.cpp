#include "hints/lemmatizer.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "common/text.hpp"

namespace thg::hints {
namespace {

struct FormLemma {
  const char* form;
  const char* lemma;
};

constexpr FormLemma kNounExceptions[] = {
#include "hints/wordnet_noun_exc.inc"
};

constexpr FormLemma kVerbExceptions[] = {
#include "hints/wordnet_verb_exc.inc"
};

using Table = std::unordered_map<std::string_view, std::string_view>;

Table build_table(const FormLemma* begin, const FormLemma* end) {
  Table t;
  for (const auto* p = begin; p != end; ++p) t.emplace(p->form, p->lemma);
  return t;
}

const Table& noun_table() {
  static const Table t = build_table(std::begin(kNounExceptions), std::end(kNounExceptions));
  return t;
}

const Table& verb_table() {
  static const Table t = build_table(std::begin(kVerbExceptions), std::end(kVerbExceptions));
  return t;
}

constexpr std::array<std::string_view, 179> kStopwords = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
    "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
    "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
    "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't",
    "wouldn", "wouldn't",
};

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

bool all_alpha(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// "runn" -> "run", "stopp" -> "stop"; "fall", "miss", "buzz" keep the pair.
std::string undouble(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
  }
  return stem;
}

std::string suffix_rules(const std::string& w) {
  if (w.size() <= 3 || !all_alpha(w)) return w;

  if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "xes") || ends_with(w, "zes") || ends_with(w, "ches") || ends_with(w, "shes")) {
    return w.substr(0, w.size() - 2);
  }
  if (ends_with(w, "s")) {
    if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return w;
    return w.substr(0, w.size() - 1);
  }
  if (ends_with(w, "ing") && w.size() >= 6) {
    const std::string stem = w.substr(0, w.size() - 3);
    if (has_vowel(stem)) return undouble(stem);
    return w;
  }
  if (ends_with(w, "ed") && w.size() >= 5 && !ends_with(w, "eed")) {
    const std::string stem = w.substr(0, w.size() - 2);
    if (has_vowel(stem)) return undouble(stem);
    return w;
  }
  return w;
}

}  // namespace

std::string lemmatize(std::string_view token) {
  const std::string w = text::to_lower_ascii(token);
  if (auto it = noun_table().find(w); it != noun_table().end()) return std::string(it->second);
  if (auto it = verb_table().find(w); it != verb_table().end()) return std::string(it->second);
  return suffix_rules(w);
}

bool is_stopword(std::string_view lowercase_token) {
  static const std::unordered_set<std::string_view> set(kStopwords.begin(), kStopwords.end());
  return set.count(lowercase_token) > 0;
}

std::size_t stopword_count() { return kStopwords.size(); }

}  // namespace thg::hints
