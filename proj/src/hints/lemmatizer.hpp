#pragma once

#include <string>
#include <string_view>

namespace thg::hints {

// Lowercased lemma: WordNet irregular forms first (noun, then verb), then the
// regular suffix rules -ies -> y, (s|x|z|ch|sh)es -> drop "es", -s -> drop,
// -ing/-ed -> strip with doubled-consonant repair. Words no rule applies to
// come back lowercased.
std::string lemmatize(std::string_view token);

// Fixed English stopword list (the NLTK list).
bool is_stopword(std::string_view lowercase_token);
std::size_t stopword_count();

}  // namespace thg::hints
