#include <doctest.h>

#include "convergence/convergence.hpp"
#include "support.hpp"

using namespace thg;
using namespace thg::convergence;

TEST_CASE("convergence score values") {
  CHECK(hicos({true, false, false, false}, false) == 0.0);
  CHECK(hicos(std::vector<bool>(11, false), false) == 0.0);
  std::vector<bool> only_answer(11, false);
  only_answer[3] = true;
  CHECK(hicos(only_answer, true) == 1.0);
  std::vector<bool> four(10, false);
  for (int i : {0, 2, 5, 9}) four[static_cast<std::size_t>(i)] = true;
  CHECK(hicos(four, true) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(hicos_exact(four, true) == Fraction{7, 10});
  // Every candidate valid still leaves 1/n.
  CHECK(hicos_exact(std::vector<bool>(5, true), true) == Fraction{1, 5});
}

TEST_CASE("convergence score rejects degenerate inputs") {
  CHECK_THROWS_CODE(hicos({}, true), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(hicos({false, false}, true), ErrorCode::InvalidArgument);
}

TEST_CASE("candidate parsing deduplicates by normalized form") {
  const auto c = parse_candidates("- Paris\n- the Paris\n- Lyon\n* Nice\n- U.S.A.\n- USA", 20);
  CHECK(c == std::vector<std::string>{"Paris", "Lyon", "Nice", "U.S.A."});
  CHECK(parse_candidates("1. a\n2. b\n3. c", 2).size() == 2);
  CHECK_THROWS_CODE(parse_candidates("No list here.", 5), ErrorCode::Generation);
  CHECK_THROWS_CODE(parse_candidates("- a", 0), ErrorCode::InvalidArgument);
}

TEST_CASE("candidate list construction") {
  const std::vector<std::string> gen{"Madrid", "paris", "Lyon", "Rome", "Nice"};
  SUBCASE("answer inside the window takes the exact text") {
    const auto c = candidate_list(gen, "Paris", 3);
    CHECK(c == std::vector<std::string>{"Madrid", "Paris", "Lyon"});
  }
  SUBCASE("answer outside the window replaces the last slot") {
    const auto c = candidate_list(gen, "Nice", 3);
    CHECK(c == std::vector<std::string>{"Madrid", "paris", "Nice"});
  }
  SUBCASE("short generations are padded with the answer") {
    const auto c = candidate_list({"Madrid"}, "Berlin", 11);
    CHECK(c == std::vector<std::string>{"Madrid", "Berlin"});
  }
  SUBCASE("n = 1 is the answer alone") {
    CHECK(candidate_list(gen, "Berlin", 1) == std::vector<std::string>{"Berlin"});
  }
  CHECK_THROWS_CODE(candidate_list(gen, "X", 0), ErrorCode::InvalidArgument);
  CHECK(answer_index({"a", "The Beatles"}, "Beatles") == 1);
  CHECK_THROWS_CODE(answer_index({"a"}, "b"), ErrorCode::InvalidArgument);
}

TEST_CASE("verdict parsing reads the first word") {
  CHECK(parse_verdict("Yes") == true);
  CHECK(parse_verdict("  no.") == false);
  CHECK(parse_verdict("**YES**, it does") == true);
  CHECK_FALSE(parse_verdict("Maybe yes").has_value());
  CHECK_FALSE(parse_verdict("").has_value());
  CHECK_FALSE(parse_verdict("Yesterday").has_value());
}

TEST_CASE("judge retries once with a distinct request") {
  std::vector<std::string> attempts;
  auto c = test::chat_client([&](const std::string&, const clients::SamplingParams& p) {
    const auto it = p.find("attempt");
    attempts.push_back(it == p.end() ? "1" : it->second);
    return std::string(attempts.size() == 1 ? "Unclear" : "No");
  }, 1);
  CHECK_FALSE(judge("hint", "cand", *c, {}));
  CHECK(attempts == std::vector<std::string>{"1", "2"});

  auto bad = test::chat_client([](const std::string&, const clients::SamplingParams&) {
    return std::string("Perhaps");
  });
  CHECK_THROWS_CODE(judge("hint", "cand", *bad, {}), ErrorCode::Judgement);
}

TEST_CASE("judge prompt wording") {
  std::string seen;
  auto c = test::chat_client([&](const std::string& p, const clients::SamplingParams&) {
    seen = p;
    return std::string("Yes");
  });
  judge("It is red.", "Mars", *c, {});
  CHECK(seen == "Does the hint \"It is red.\" refer to \"Mars\"? Choose ONLY between \"Yes\" or \"No\".");
}

TEST_CASE("partial judgement leaves the score absent") {
  auto c = test::chat_client([](const std::string& p, const clients::SamplingParams&) {
    if (p.find("\"B\"") != std::string::npos) return std::string("Hmm");
    return std::string("Yes");
  });
  const auto j = judge_candidates("h", {"A", "B", "C"}, "A", *c, {});
  CHECK(j.cand_valid == std::vector<std::optional<bool>>{true, std::nullopt, true});
  CHECK(j.ea_valid == true);
  CHECK_FALSE(j.score.has_value());
}

TEST_CASE("score_record fills candidates, verdicts and the mean") {
  auto c = test::chat_client([](const std::string& p, const clients::SamplingParams&) {
    if (p.rfind("Generate up to 20 candidate", 0) == 0) {
      return std::string("- Lyon\n- Paris\n- Nice\n- Rome");
    }
    const bool first = p.find("\"h1\"") != std::string::npos;
    if (p.find("\"Paris\"") != std::string::npos) return std::string(first ? "Yes" : "No");
    if (p.find("\"Lyon\"") != std::string::npos && first) return std::string("Yes");
    return std::string("No");
  });
  model::QuestionRecord r;
  r.question = "Which city is the capital of France?";
  r.exact_answer = "Paris";
  r.hints.resize(2);
  r.hints[0].text = "h1";
  r.hints[1].text = "h2";
  ConvergenceConfig cfg;
  cfg.n_candidates = 3;
  score_record(r, *c, cfg);
  CHECK(r.candidate_answers == std::vector<std::string>{"Lyon", "Paris", "Nice"});
  CHECK(r.hints[0].candidate_verdicts == std::vector<std::optional<bool>>{true, true, false});
  CHECK(*r.hints[0].hicos == doctest::Approx(2.0 / 3.0));
  CHECK(*r.hints[1].hicos == 0.0);
  CHECK(*r.convergence == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("evaluate_hint_convergence runs the whole protocol") {
  auto c = test::chat_client([](const std::string& p, const clients::SamplingParams&) {
    if (p.rfind("Generate", 0) == 0) return std::string("1. Mars\n2. Venus\n3. Jupiter");
    return std::string(p.find("\"Mars\"") != std::string::npos ? "Yes" : "No");
  });
  const auto j = evaluate_hint_convergence("Which planet is red?", "Mars", "It is red.", *c, {});
  CHECK(j.n_candidates == 3);
  CHECK(j.score == 1.0);
}
