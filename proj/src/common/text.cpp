#include "common/text.hpp"

#include <algorithm>
#include <cstdint>

namespace thg::text {
namespace {

bool is_unicode_space(std::uint32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

// Decodes one code point starting at s[i]; returns its byte length. Invalid
// sequences decode as a single byte so scanning always makes progress.
std::size_t decode_utf8(std::string_view s, std::size_t i, std::uint32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      cp = ((b0 & 0x1Fu) << 6) | static_cast<std::uint32_t>(c1);
      return 2;
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      cp = ((b0 & 0x0Fu) << 12) | (static_cast<std::uint32_t>(c1) << 6) |
           static_cast<std::uint32_t>(c2);
      return 3;
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      cp = ((b0 & 0x07u) << 18) | (static_cast<std::uint32_t>(c1) << 12) |
           (static_cast<std::uint32_t>(c2) << 6) | static_cast<std::uint32_t>(c3);
      return 4;
    }
  }
  cp = 0xFFFD;
  return 1;
}

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

}  // namespace

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  std::size_t i = 0;
  while (i < s.size()) {
    std::uint32_t cp = 0;
    const std::size_t len = decode_utf8(s, i, cp);
    if (is_unicode_space(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(s.substr(i, len));
    }
    i += len;
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::size_t word_count(std::string_view s) {
  auto tokens = split_whitespace(s);
  if (!tokens.empty() && tokens.back() == "?") tokens.pop_back();
  return tokens.size();
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto tokens_begin = s.find_first_not_of(" \t\r\n\f\v");
  if (tokens_begin == std::string_view::npos) return {};
  const auto tokens_end = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(tokens_begin, tokens_end - tokens_begin + 1));
}

std::string collapse_whitespace(std::string_view s) {
  return join(split_whitespace(s), " ");
}

bool ends_with_question_mark(std::string_view s) {
  const std::string t = trim(s);
  return !t.empty() && t.back() == '?';
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  for (char c : s) {
    const bool non_ascii = static_cast<unsigned char>(c) >= 0x80;
    if (is_ascii_alnum(c) || non_ascii) {
      current.push_back(c);
    } else if (!current.empty()) {
      out.push_back(to_lower_ascii(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(to_lower_ascii(current));
  return out;
}

std::vector<std::string> normalized_answer_tokens(std::string_view s) {
  std::string stripped;
  stripped.reserve(s.size());
  for (char c : s) {
    if (c == '.' || c == '\'') continue;
    stripped.push_back(c);
  }
  auto tokens = word_tokens(stripped);
  if (tokens.size() > 1 && (tokens.front() == "a" || tokens.front() == "an" ||
                            tokens.front() == "the")) {
    tokens.erase(tokens.begin());
  }
  return tokens;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

bool contains_token_run(const std::vector<std::string>& haystack,
                        const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

std::string fill_template(std::string_view tpl,
                          const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out(tpl);
  for (const auto& [key, value] : values) {
    const std::string needle = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = out.find(needle, pos)) != std::string::npos) {
      out.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  return out;
}

}  // namespace thg::text
