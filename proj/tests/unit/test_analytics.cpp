#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "analytics/analytics.hpp"
#include "common/files.hpp"
#include "support.hpp"

using namespace thg;
using namespace thg::analytics;

TEST_CASE("answer difficulty thresholds") {
  CHECK(answer_difficulty(0.0).level == Level::Hard);
  CHECK(answer_difficulty(0.3299).level == Level::Hard);
  CHECK(answer_difficulty(0.33).level == Level::Medium);
  CHECK(answer_difficulty(0.66).level == Level::Medium);
  CHECK(answer_difficulty(0.6601).level == Level::Easy);
  CHECK(answer_difficulty(1.0).level == Level::Easy);
  CHECK(answer_difficulty(0.5).basis == Basis::AnswerPopularity);
  CHECK_THROWS_CODE(answer_difficulty(1.01), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(answer_difficulty(NAN), ErrorCode::InvalidArgument);
}

TEST_CASE("question difficulty thresholds") {
  CHECK(question_difficulty(0.0).level == Level::Hard);
  CHECK(question_difficulty(std::nextafter(1.0 / 3.0, 0.0)).level == Level::Hard);
  CHECK(question_difficulty(1.0 / 3.0).level == Level::Medium);
  CHECK(question_difficulty(std::nextafter(2.0 / 3.0, 0.0)).level == Level::Medium);
  CHECK(question_difficulty(2.0 / 3.0).level == Level::Easy);
  CHECK(question_difficulty(0.9).basis == Basis::QuestionRetrieval);
  CHECK(std::string(level_name(Level::Hard)) == "hard");
  CHECK_THROWS_CODE(question_difficulty(-0.1), ErrorCode::InvalidArgument);
}

TEST_CASE("relevance fraction over stub passages") {
  StubRetriever r({{"Q?", {"The Beatles were a band.", "Nothing here.", "beatles!", "Beat it."}}});
  CHECK(relevance_fraction("Q?", "The Beatles", r, 500) == 0.5);
  CHECK(relevance_fraction("Q?", "The Beatles", r, 1) == 1.0);
  CHECK_THROWS_CODE(relevance_fraction("other", "x", r), ErrorCode::NotFound);
  StubRetriever empty(std::map<std::string, std::vector<std::string>>{{"Q?", std::vector<std::string>{}}});
  CHECK_THROWS_CODE(relevance_fraction("Q?", "x", empty), ErrorCode::UndefinedValue);

  auto loaded = StubRetriever::load(test::fixtures() / "pipeline" / "passages.jsonl");
  CHECK(loaded != nullptr);
}

namespace {

class CannedTransport : public clients::HttpTransport {
 public:
  std::string last_body;
  clients::HttpResponse reply;
  clients::HttpResponse get(const std::string&, const std::map<std::string, std::string>&) override {
    return reply;
  }
  clients::HttpResponse post_json(const std::string&, const std::string& body,
                                  const std::map<std::string, std::string>&) override {
    last_body = body;
    return reply;
  }
};

}  // namespace

TEST_CASE("HTTP retriever request and reply shape") {
  auto t = std::make_shared<CannedTransport>();
  t->reply = {200, R"({"passages":["a","b","c"]})"};
  HttpRetriever r(t, {"http://x", "/search", ""});
  CHECK(r.retrieve("who?", 2) == std::vector<std::string>{"a", "b"});
  CHECK(nlohmann::json::parse(t->last_body) == nlohmann::json{{"query", "who?"}, {"k", 2}});
  t->reply = {200, R"({"docs":[]})"};
  CHECK_THROWS_CODE(r.retrieve("who?", 2), ErrorCode::Transport);
  t->reply = {503, ""};
  CHECK_THROWS_CODE(r.retrieve("who?", 2), ErrorCode::Transport);
}

TEST_CASE("pearson and mse") {
  std::vector<double> x, lin, neg;
  for (int i = 0; i < 50; ++i) {
    x.push_back(i * 0.37 - 3);
    lin.push_back(2 * x.back() + 3);
    neg.push_back(-x.back());
  }
  CHECK(pearson(lin, x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(neg, x) == doctest::Approx(-1.0).epsilon(1e-12));
  // Oracle: numpy.corrcoef([1,2,3,4,5],[2,1,4,3,5])[0,1] = 0.8
  CHECK(pearson({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK_THROWS_CODE(pearson({1, 1, 1}, {1, 2, 3}), ErrorCode::UndefinedValue);
  CHECK_THROWS_CODE(pearson({1}, {1}), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(pearson({1, 2}, {1, 2, 3}), ErrorCode::InvalidArgument);

  CHECK(mse({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(mse({0, 0}, {1, 3}) == 5.0);
  CHECK(mse({0.5}, {0.25}) == 0.0625);
  CHECK_THROWS_CODE(mse({}, {}), ErrorCode::InvalidArgument);

  const auto rep = correlate({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5});
  CHECK(rep.n == 5);
  CHECK(rep.mse == doctest::Approx(0.8));
}

TEST_CASE("human scores are averaged and rescaled") {
  test::TempDir dir;
  files::write_atomic(dir / "r.jsonl",
                      R"({"annotator_id":"a","q_id":"q1","hint_idx":0,"attribute":"convergence","value":5})"
                      "\n"
                      R"({"annotator_id":"b","q_id":"q1","hint_idx":0,"attribute":"convergence","value":2})"
                      "\n"
                      R"({"annotator_id":"a","q_id":"q1","hint_idx":1,"attribute":"familiarity","value":1})"
                      "\n");
  const auto s = read_human_scores(dir / "r.jsonl");
  CHECK(s.size() == 2);
  CHECK(s.at({"q1", 0, "convergence"}) == doctest::Approx(0.625));
  CHECK(s.at({"q1", 1, "familiarity"}) == 0.0);

  files::write_atomic(dir / "bad.jsonl",
                      R"({"annotator_id":"a","q_id":"q1","hint_idx":0,"attribute":"x","value":6})"
                      "\n");
  CHECK_THROWS_CODE(read_human_scores(dir / "bad.jsonl"), ErrorCode::Validation);
  files::write_atomic(dir / "junk.jsonl", "{\"q_id\":1}\n");
  CHECK_THROWS_CODE(read_human_scores(dir / "junk.jsonl"), ErrorCode::Parse);
}

TEST_CASE("dataset statistics match the frozen golden file") {
  const auto records =
      model::read_dataset((test::fixtures() / "stats" / "dataset.jsonl").string(), model::ValidationLevel::Raw);
  const auto golden = nlohmann::json::parse(files::read_all(test::fixtures() / "stats" / "golden.json"));
  const auto got = dataset_stats(records).to_json();
  for (const auto& [key, value] : golden.items()) {
    INFO(key);
    CHECK(got.at(key) == value);
  }
  CHECK_THROWS_CODE(dataset_stats({}), ErrorCode::InvalidArgument);
}

TEST_CASE("HICOS sweep replays the frozen curve") {
  const auto dir = test::fixtures() / "sweep";
  const auto records = model::read_dataset((dir / "dataset.jsonl").string(), model::ValidationLevel::Raw);
  const auto human = read_human_scores(dir / "ratings.jsonl");
  clients::ClientOptions o;
  o.offline = true;
  auto store = std::make_shared<clients::ResponseStore>();
  store->load(dir / "replay.jsonl");
  clients::ServiceClient client(o, store, {});
  const auto curve = hicos_sweep(records, human, 1, 20, client);
  REQUIRE(curve.size() == 20);

  std::istringstream expected(files::read_all(dir / "expected_curve.csv"));
  std::string line;
  std::getline(expected, line);
  for (const auto& p : curve) {
    REQUIRE(std::getline(expected, line));
    INFO(line);
    std::istringstream cells(line);
    std::string n, r, samples;
    std::getline(cells, n, ',');
    std::getline(cells, r, ',');
    std::getline(cells, samples, ',');
    CHECK(std::stoi(n) == p.n);
    CHECK(std::stoul(samples) == p.n_samples);
    if (r.empty()) {
      CHECK_FALSE(p.pearson_r.has_value());
    } else {
      REQUIRE(p.pearson_r.has_value());
      CHECK(*p.pearson_r == doctest::Approx(std::stod(r)).epsilon(1e-9));
    }
  }
  CHECK(sweep_csv({{1, std::nullopt, 3}, {2, 0.5, 3}}) == "n,pearson_r,n_samples\n1,,3\n2,0.5,3\n");
  CHECK_THROWS_CODE(hicos_sweep(records, human, 0, 3, client), ErrorCode::InvalidArgument);
}

TEST_CASE("aggregation comparison picks the best mode") {
  using familiarity::AggregateMode;
  const std::vector<double> human{0.1, 0.4, 0.9, 0.5};
  const auto c = compare_aggregations(
      human, {{AggregateMode::Min, {0.2, 0.2, 0.2, 0.2}},
              {AggregateMode::Avg, {0.1, 0.5, 0.8, 0.4}},
              {AggregateMode::Max, {0.9, 0.1, 0.5, 0.3}}});
  CHECK_FALSE(c.reports.at(AggregateMode::Min).has_value());
  CHECK(c.errors.count(AggregateMode::Min) == 1);
  CHECK(c.best == AggregateMode::Avg);

  model::QuestionRecord r;
  r.q_id = "q";
  r.hints.resize(3);
  r.hints[0].h_popularity = {0.1, 0.3};
  r.hints[1].h_popularity = {0.9, std::nullopt, 0.5};
  r.hints[2].h_popularity = {0.4};
  HumanScores h{{{"q", 0, "familiarity"}, 0.0}, {{"q", 1, "familiarity"}, 1.0}, {{"q", 2, "familiarity"}, 0.5}};
  const auto rc = compare_aggregations(std::vector<model::QuestionRecord>{r}, h);
  REQUIRE(rc.reports.at(AggregateMode::Max).has_value());
  CHECK(rc.reports.at(AggregateMode::Max)->n == 3);
  CHECK(rc.best.has_value());

  const auto none = compare_aggregations(std::vector<model::QuestionRecord>{}, h);
  CHECK_FALSE(none.best.has_value());
  CHECK(none.reports.size() == 3);
}
