#include <doctest.h>

#include "hints/hints.hpp"
#include "hints/lemmatizer.hpp"
#include "support.hpp"

using namespace thg;
using namespace thg::hints;

TEST_CASE("stopword list is the 179-word NLTK list") {
  CHECK(stopword_count() == 179);
  for (const char* w : {"the", "a", "of", "and", "is", "it", "don't", "ourselves", "y"}) {
    CAPTURE(w);
    CHECK(is_stopword(w));
  }
  CHECK_FALSE(is_stopword("paris"));
  CHECK_FALSE(is_stopword(""));
}

TEST_CASE("lemmatizer rules and irregular forms") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"mice", "mouse"},     {"geese", "goose"},     {"children", "child"}, {"ran", "run"},
      {"cherries", "cherry"}, {"churches", "church"}, {"boxes", "box"},      {"cats", "cat"},
      {"running", "run"},    {"stopped", "stop"},    {"Leaves", "leaf"},    {"Paris", "paris"},
      {"walked", "walk"},    {"glass", "glass"},     {"is", "be"},
  };
  for (const auto& [in, out] : cases) {
    CAPTURE(in);
    CHECK(lemmatize(in) == out);
  }
}

TEST_CASE("source markers are stripped and collected") {
  auto m = parse_source_markers("Born in Bonn [2][1] and deaf [2].");
  CHECK(m.clean_text == "Born in Bonn and deaf.");
  CHECK(m.source_indices == std::vector<int>{2, 1});
  // Brackets that are not integer markers stay.
  m = parse_source_markers("Array [i] and [1a] stay");
  CHECK(m.clean_text == "Array [i] and [1a] stay");
  CHECK(m.source_indices.empty());
}

TEST_CASE("reference lines are split from the body") {
  const auto s = extract_references(
      "Paris is the answer [1].\n[2]: https://b.example\n[1] https://a.example\nnot [3] a ref");
  CHECK(s.body == "Paris is the answer [1].\nnot [3] a ref");
  REQUIRE(s.references.size() == 2);
  CHECK(s.references[0] == std::make_pair(1, std::string("https://a.example")));
  CHECK(s.references[1].second == "https://b.example");
}

TEST_CASE("hint lists in several formats") {
  const std::string reply =
      "Here are some hints:\n"
      "1. First clue [1].\n"
      "2) **Second** clue\n"
      "   continues here.\n"
      "\n"
      "- Third clue\n"
      "* Fourth clue\n"
      "\xE2\x80\xA2 Fifth clue\n"
      "\n"
      "**Not a bullet**\n"
      "[1]: https://example.org\n";
  const auto hints = parse_hint_list(reply);
  REQUIRE(hints.size() == 5);
  CHECK(hints[0].text == "First clue.");
  CHECK(hints[0].source_indices == std::vector<int>{1});
  CHECK(hints[1].text == "Second clue continues here.");
  CHECK(hints[4].text == "Fifth clue");
  CHECK(parse_hint_list("No list at all.").empty());
}

TEST_CASE("answer matching is normalized containment") {
  CHECK(answers_match("The answer is Neil Armstrong [1].", "Neil Armstrong"));
  CHECK(answers_match("Beatles", "The Beatles"));
  CHECK(answers_match("U.S.A.", "USA"));
  CHECK_FALSE(answers_match("Galileo Galilei", "Nicolaus Copernicus"));
  CHECK_FALSE(answers_match("Armstrong Neil", "Neil Armstrong"));
}

TEST_CASE("declined answers") {
  CHECK(is_declined_answer("I don't know."));
  CHECK(is_declined_answer("  "));
  CHECK(is_declined_answer("Sorry, I'm not sure about that."));
  CHECK_FALSE(is_declined_answer("Paris."));
}

namespace {

std::shared_ptr<clients::ServiceClient> scripted(std::string answer_reply, std::string hint_reply) {
  return test::chat_client([=](const std::string& p, const clients::SamplingParams&) {
    return p.rfind("Produce ", 0) == 0 ? hint_reply : answer_reply;
  });
}

}  // namespace

TEST_CASE("elicit and verify: success path merges sources") {
  auto c = scripted("It is Paris [1].\n[1]: https://a.example",
                    "1. Capital of a European country [1].\n2. On the Seine [2][1].\n"
                    "[1]: https://b.example\n[2]: https://a.example");
  const auto out = elicit_and_verify("Which city is the capital of France?", "Paris", *c);
  CHECK(out.status == GenerationStatus::Ok);
  CHECK(out.snippet == std::optional<std::string>("It is Paris [1]."));
  CHECK(out.snippet_sources == std::vector<std::string>{"https://a.example", "https://b.example"});
  REQUIRE(out.hints_raw.size() == 2);
  // Hint [1] is b.example, the second merged source; hint [2] is a.example.
  CHECK(out.hints_raw[0].source_indices == std::vector<int>{2});
  CHECK(out.hints_raw[1].source_indices == std::vector<int>{1, 2});
}

TEST_CASE("elicit and verify: the hint prompt carries question, answer and count") {
  std::string seen;
  auto c = test::chat_client([&](const std::string& p, const clients::SamplingParams&) {
    if (p.rfind("Produce ", 0) == 0) {
      seen = p;
      return std::string("1. A clue.");
    }
    return std::string("Paris");
  });
  GenerationConfig g;
  g.hints_per_question = 7;
  elicit_and_verify("Which city is the capital of France?", "Paris", *c, g);
  CHECK(seen ==
        "Produce 7 hints for the question \"Which city is the capital of France?\" without "
        "including the answer in the hints.");
}

TEST_CASE("elicit and verify: failure outcomes") {
  CHECK(elicit_and_verify("Q?", "Paris", *scripted("I don't know.", "")).status ==
        GenerationStatus::AnswerNotFound);
  const auto mismatch = elicit_and_verify("Q?", "Paris", *scripted("Lyon [1]\n[1]: https://x.y", ""));
  CHECK(mismatch.status == GenerationStatus::AnswerMismatch);
  CHECK(mismatch.snippet_sources == std::vector<std::string>{"https://x.y"});
  CHECK(mismatch.hints_raw.empty());
  CHECK_THROWS_CODE(elicit_and_verify("Q?", "Paris", *scripted("Paris", "I cannot help.")),
                    ErrorCode::Generation);
}

TEST_CASE("lexical leakage uses lemmas and ignores answer stopwords") {
  CHECK(leaks_answer("Each member was a Beatle.", "The Beatles").leaked);
  CHECK(leaks_answer("Two mice ran.", "Mouse").leaked);
  CHECK_FALSE(leaks_answer("They formed in Liverpool.", "The Beatles").leaked);
  // "of" and "the" in the answer never count as leaks.
  CHECK_FALSE(leaks_answer("It is the home of kings.", "The Lord of the Rings").leaked);
  const auto r = leaks_answer("Rings of power", "The Lord of the Rings");
  CHECK(r.leaked);
  CHECK(r.overlap == std::set<std::string>{"ring"});
  // Semantic leaks are out of reach of a lexical check.
  CHECK_FALSE(leaks_answer("The French capital.", "Paris").leaked);
}

TEST_CASE("filter_hints removes leaks first, then near-duplicates of the question") {
  std::map<std::string, std::vector<double>> vecs = {
      {"Q?", {1, 0}}, {"clean", {0.5, 0.8660254}}, {"close", {0.95, 0.3122499}}, {"edge", {1, 1}}};
  int embeds = 0;
  Embedder e = [&](const std::string& t) {
    ++embeds;
    return clients::EmbeddingVector{vecs.at(t)};
  };
  std::vector<model::Hint> hs(4);
  hs[0].text = "clean";
  hs[1].text = "Paris leak";
  hs[2].text = "close";
  hs[3].text = "edge";
  // The boundary value itself counts as too similar.
  const double edge = clients::cosine_similarity({{1, 0}}, {{1, 1}});
  const auto r = filter_hints(hs, "Paris", "Q?", e, edge);
  REQUIRE(r.kept.size() == 1);
  CHECK(r.kept[0].text == "clean");
  CHECK(r.kept[0].question_similarity.value() == doctest::Approx(0.5));
  CHECK_FALSE(r.kept[0].leak_flag);
  REQUIRE(r.leaked.size() == 1);
  CHECK(r.leaked[0].leak_flag);
  CHECK_FALSE(r.leaked[0].question_similarity.has_value());
  REQUIRE(r.rephrased.size() == 2);
  CHECK(r.rephrased[1].text == "edge");
  CHECK(embeds == 4);  // question once, three surviving hints
}

TEST_CASE("prune keeps questions with enough hints") {
  std::vector<model::QuestionRecord> rs(3);
  rs[0].q_id = "a";
  rs[0].hints.resize(5);
  rs[1].q_id = "b";
  rs[1].hints.resize(4);
  rs[2].q_id = "c";
  rs[2].hints.resize(9);
  const auto p = prune_questions(rs);
  CHECK(p.kept.size() == 2);
  CHECK(p.dropped_ids == std::vector<std::string>{"b"});
  CHECK(prune_questions(rs, 1).kept.size() == 3);
}
