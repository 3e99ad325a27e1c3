#include <doctest.h>

#include <map>

#include "model/labels.hpp"
#include "questions/questions.hpp"
#include "support.hpp"

using namespace thg;
using namespace thg::questions;
using model::MajorType;

namespace {

WikiResolver known(std::initializer_list<std::string> titles) {
  std::vector<std::string> t(titles);
  return [t](const std::string& s) -> std::optional<std::string> {
    for (const auto& x : t) {
      if (x == s) return x;
    }
    return std::nullopt;
  };
}

}  // namespace

TEST_CASE("admission checks run cheapest first") {
  int lookups = 0;
  WikiResolver counting = [&](const std::string&) -> std::optional<std::string> {
    ++lookups;
    return std::string("X");
  };
  CHECK(filter_question("Capital of France?", "Paris", counting).reason == RejectReason::TooShort);
  CHECK(filter_question(
            "one two three four five six seven eight nine ten eleven twelve thirteen fourteen "
            "fifteen sixteen seventeen eighteen nineteen twenty twentyone?",
            "X", counting)
            .reason == RejectReason::TooLong);
  CHECK(filter_question("Name the author of the novel Moby Dick", "Herman Melville", counting)
            .reason == RejectReason::NoQuestionMark);
  CHECK(lookups == 0);
  CHECK(filter_question("Who wrote the novel Moby Dick in 1851?", "Herman Melville", counting)
            .accepted);
  CHECK(lookups == 1);
}

TEST_CASE("length bounds are inclusive") {
  const auto r = known({"A"});
  CHECK(filter_question("one two three four five six?", "A", r).accepted);
  CHECK(filter_question("one two three four five?", "A", r).reason == RejectReason::TooShort);
  CHECK(filter_question("w w w w w w w w w w w w w w w w w w w w?", "A", r).accepted);
  // A detached "?" is not a word.
  CHECK(filter_question("one two three four five ?", "A", r).reason == RejectReason::TooShort);
}

TEST_CASE("answers without an article are rejected") {
  const auto r = known({"Paris"});
  CHECK(filter_question("Which city is the capital of France?", "Paris", r).accepted);
  const auto v = filter_question("Which kingdom is ruled by the Queen of Hearts?", "Wonderlandia", r);
  CHECK_FALSE(v.accepted);
  CHECK(v.reason == RejectReason::AnswerNoWikiPage);
  CHECK(filter_question("Which kingdom is ruled by the Queen of Hearts?", "  ", r).reason ==
        RejectReason::AnswerNoWikiPage);
}

TEST_CASE("resolver errors propagate") {
  WikiResolver failing = [](const std::string&) -> std::optional<std::string> {
    fail(ErrorCode::Transport, "down");
  };
  CHECK_THROWS_CODE(filter_question("Which city is the capital of France?", "Paris", failing),
                    ErrorCode::Transport);
}

TEST_CASE("keyword classifier labels") {
  KeywordClassifier k;
  const std::map<std::string, std::string> cases = {
      {"Which city hosted the Summer Olympic Games in 1992?", "LOC:city"},
      {"Who painted the ceiling of the Sistine Chapel?", "HUM:ind"},
      {"Who is Barack Obama?", "HUM:desc"},
      {"How many players are on a soccer team?", "NUM:count"},
      {"When did the Berlin Wall fall in Germany?", "NUM:date"},
      {"Why do leaves change colour in the autumn season?", "DESC:reason"},
      {"What does the word quixotic mean?", "DESC:def"},
      {"Which band released the album Abbey Road in 1969?", "HUM:gr"},
      {"Which instrument did Louis Armstrong play?", "ENTY:instru"},
      {"In what year did the Titanic sink?", "NUM:date"},
      {"Where is the Taj Mahal located?", "LOC:other"},
      {"How tall is Mount Everest?", "NUM:dist"},
      {"Which planet is known as the Red Planet?", "ENTY:other"},
  };
  for (const auto& [q, label] : cases) {
    CAPTURE(q);
    const auto out = k.classify(q);
    CHECK(out.minor == label);
    CHECK(model::parent_major(out.minor) == out.major);
  }
}

TEST_CASE("LLM classifier parses the earliest label") {
  CHECK(LlmClassifier::parse_reply("HUM:ind").minor == "HUM:ind");
  CHECK(LlmClassifier::parse_reply("The label is loc:city.").minor == "LOC:city");
  CHECK(LlmClassifier::parse_reply("ENTY:other, maybe LOC:other").minor == "ENTY:other");
  CHECK(LlmClassifier::parse_reply("NUM:date").major == MajorType::Other);
  CHECK_THROWS_CODE(LlmClassifier::parse_reply("no idea"), ErrorCode::Classification);
  const auto prompt = LlmClassifier::build_prompt("Who?");
  CHECK(prompt.find("ABBR:abb") != std::string::npos);
  CHECK(prompt.size() - prompt.rfind("Who?") == 4);
}

TEST_CASE("LLM classifier goes through the client") {
  auto client = test::chat_client([](const std::string& p, const clients::SamplingParams&) {
    return p.find("Which city") != std::string::npos ? "LOC:city" : "DESC:manner";
  });
  LlmClassifier c(client);
  CHECK(classify_type("Which city is largest?", c).major == MajorType::Location);
  CHECK(classify_type("How do birds fly?", c).major == MajorType::Description);
}

TEST_CASE("largest-remainder quotas") {
  CHECK(stratified_quotas({4000, 3000, 2000, 1000}, 1.0 / 3.0) ==
        std::vector<std::size_t>{1333, 1000, 667, 333});
  CHECK(stratified_quotas({10, 10, 10}, 0.5) == std::vector<std::size_t>{5, 5, 5});
  CHECK(stratified_quotas({1, 1, 1}, 0.5) == std::vector<std::size_t>{1, 1, 0});
  CHECK(stratified_quotas({100}, 0.29) == std::vector<std::size_t>{29});
  CHECK(stratified_quotas({7, 0, 3}, 1.0) == std::vector<std::size_t>{7, 0, 3});
  CHECK_THROWS_CODE(stratified_quotas({1}, 0.0), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(stratified_quotas({1}, 1.5), ErrorCode::InvalidArgument);
}

TEST_CASE("stratified sample is seeded and keeps input order") {
  std::vector<model::QuestionRecord> rs;
  for (int i = 0; i < 300; ++i) {
    model::QuestionRecord r;
    r.q_id = "q" + std::to_string(1000 + i);
    r.question = "Q?";
    r.exact_answer = "A";
    r.major_type = static_cast<MajorType>(i % 4);
    rs.push_back(r);
  }
  const auto a = stratified_sample(rs, 0.2, 11);
  CHECK(a.size() == 60);
  CHECK(stratified_sample(rs, 0.2, 11) == a);
  CHECK(stratified_sample(rs, 0.2, 12) != a);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].q_id < a[i].q_id);
  std::array<int, 5> per{};
  for (const auto& r : a) ++per[static_cast<std::size_t>(*r.major_type)];
  CHECK(per[0] == 15);
  CHECK(per[3] == 15);
  CHECK(stratified_sample(rs, 1.0, 1) == rs);
  rs[5].major_type.reset();
  CHECK_THROWS_CODE(stratified_sample(rs, 0.5, 1), ErrorCode::InvalidArgument);
}
