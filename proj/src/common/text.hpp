#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace thg::text {

// Splits on any Unicode whitespace code point (UTF-8 input). Empty tokens are
// never produced.
std::vector<std::string> split_whitespace(std::string_view s);

// Word count used by the question-length filter and dataset statistics: tokens
// between Unicode whitespace, where a standalone trailing "?" is not a word.
std::size_t word_count(std::string_view s);

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

bool ends_with_question_mark(std::string_view s);

// Runs of ASCII letters/digits plus any non-ASCII byte sequence, lowercased.
// Punctuation and whitespace separate tokens.
std::vector<std::string> word_tokens(std::string_view s);

// Normalized token sequence for answer comparison: lowercase, '.' and '\''
// deleted, other punctuation treated as a separator, one leading article
// (a/an/the) removed.
std::vector<std::string> normalized_answer_tokens(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// True when `needle` occurs as a contiguous run inside `haystack`. An empty
// needle never matches.
bool contains_token_run(const std::vector<std::string>& haystack,
                        const std::vector<std::string>& needle);

// Replaces every "{KEY}" occurrence with its value; unknown keys are left as-is.
std::string fill_template(std::string_view tpl,
                          const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace thg::text
