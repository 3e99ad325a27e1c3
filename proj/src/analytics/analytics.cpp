#include "analytics/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/files.hpp"
#include "common/parallel.hpp"
#include "common/text.hpp"

namespace thg::analytics {

using nlohmann::json;

const char* level_name(Level l) {
  switch (l) {
    case Level::Easy: return "easy";
    case Level::Medium: return "medium";
    case Level::Hard: return "hard";
  }
  return "medium";
}

namespace {

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " must lie in [0,1], got " +
                                         std::to_string(v));
  }
}

}  // namespace

DifficultyLabel answer_difficulty(double popularity) {
  check_unit(popularity, "answer popularity");
  const Level l = popularity > 0.66 ? Level::Easy : popularity >= 0.33 ? Level::Medium : Level::Hard;
  return DifficultyLabel{l, Basis::AnswerPopularity, popularity};
}

DifficultyLabel question_difficulty(double fraction) {
  check_unit(fraction, "relevance fraction");
  const Level l = fraction < 1.0 / 3.0   ? Level::Hard
                  : fraction < 2.0 / 3.0 ? Level::Medium
                                         : Level::Easy;
  return DifficultyLabel{l, Basis::QuestionRetrieval, fraction};
}

StubRetriever::StubRetriever(std::map<std::string, std::vector<std::string>> passages)
    : passages_(std::move(passages)) {}

std::shared_ptr<StubRetriever> StubRetriever::load(const std::filesystem::path& path) {
  std::map<std::string, std::vector<std::string>> passages;
  std::size_t n = 0;
  for (const auto& line : files::read_lines(path)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      passages[j.at("question").get<std::string>()] =
          j.at("passages").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return std::make_shared<StubRetriever>(std::move(passages));
}

std::vector<std::string> StubRetriever::retrieve(const std::string& question, std::size_t k) {
  auto it = passages_.find(question);
  if (it == passages_.end()) fail(ErrorCode::NotFound, "no stub passages for: " + question);
  const auto& all = it->second;
  return {all.begin(), all.begin() + std::min(k, all.size())};
}

HttpRetriever::HttpRetriever(std::shared_ptr<clients::HttpTransport> transport,
                             clients::EndpointConfig config)
    : transport_(std::move(transport)), config_(std::move(config)) {}

std::vector<std::string> HttpRetriever::retrieve(const std::string& question, std::size_t k) {
  json body = json::object();
  body["query"] = question;
  body["k"] = k;
  const json reply = clients::parse_body(
      transport_->post_json(config_.path, body.dump(), clients::auth_headers(config_)),
      "retriever endpoint");
  try {
    auto passages = reply.at("passages").get<std::vector<std::string>>();
    if (passages.size() > k) passages.resize(k);
    return passages;
  } catch (const json::exception&) {
    fail(ErrorCode::Transport, "retriever reply lacks a passages array");
  }
}

double relevance_fraction(const std::string& question, const std::string& answer,
                          Retriever& retriever, std::size_t k) {
  const auto passages = retriever.retrieve(question, k);
  if (passages.empty()) fail(ErrorCode::UndefinedValue, "retriever returned no passages");
  const auto needle = text::normalized_answer_tokens(answer);
  std::size_t hits = 0;
  for (const auto& p : passages) {
    if (text::contains_token_run(text::normalized_answer_tokens(p), needle)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(passages.size());
}

// ---- correlation -----------------------------------------------------------------

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    fail(ErrorCode::InvalidArgument, "pearson needs two equal-length samples of size >= 2");
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) fail(ErrorCode::UndefinedValue, "correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double mse(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.empty()) {
    fail(ErrorCode::InvalidArgument, "mse needs two equal-length nonempty samples");
  }
  double s = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (xs[i] - ys[i]) * (xs[i] - ys[i]);
  return s / static_cast<double>(xs.size());
}

CorrelationReport correlate(const std::vector<double>& metric, const std::vector<double>& human) {
  return CorrelationReport{pearson(metric, human), mse(metric, human), metric.size()};
}

HumanScores read_human_scores(const std::filesystem::path& path) {
  std::map<std::tuple<std::string, int, std::string>, std::pair<double, int>> acc;
  std::size_t n = 0;
  for (const auto& line : files::read_lines(path)) {
    ++n;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(n);
    try {
      const json j = json::parse(line);
      const int value = j.at("value").get<int>();
      if (value < 1 || value > 5) fail(ErrorCode::Validation, where + ": rating outside 1..5");
      auto& slot = acc[{j.at("q_id").get<std::string>(), j.at("hint_idx").get<int>(),
                        j.at("attribute").get<std::string>()}];
      slot.first += value;
      slot.second += 1;
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, where + ": " + e.what());
    }
  }
  HumanScores out;
  for (const auto& [key, sum_count] : acc) {
    const double mean = sum_count.first / sum_count.second;
    out[key] = (mean - 1.0) / 4.0;
  }
  return out;
}

// ---- statistics ------------------------------------------------------------------

nlohmann::ordered_json StatsReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_questions"] = n_questions;
  j["n_hints"] = n_hints;
  j["avg_question_len"] = avg_question_len;
  j["avg_hint_len"] = avg_hint_len;
  j["avg_hints_per_q"] = avg_hints_per_q;
  j["avg_entities_per_q"] = avg_entities_per_q;
  j["avg_entities_per_hint"] = avg_entities_per_hint;
  j["avg_sources_per_q"] = avg_sources_per_q;
  return j;
}

StatsReport dataset_stats(const std::vector<model::QuestionRecord>& records) {
  if (records.empty()) fail(ErrorCode::InvalidArgument, "statistics of an empty dataset");
  StatsReport r;
  double q_words = 0, h_words = 0, q_entities = 0, h_entities = 0, sources = 0;
  for (const auto& rec : records) {
    q_words += static_cast<double>(text::word_count(rec.question));
    q_entities += static_cast<double>(rec.q_popularity.size());
    sources += static_cast<double>(rec.snippet_sources.size());
    for (const auto& h : rec.hints) {
      h_words += static_cast<double>(text::word_count(h.text));
      h_entities += static_cast<double>(h.entities.size());
    }
    r.n_hints += rec.hints.size();
  }
  r.n_questions = records.size();
  const double nq = static_cast<double>(r.n_questions);
  const double nh = static_cast<double>(r.n_hints);
  r.avg_question_len = q_words / nq;
  r.avg_hint_len = nh > 0 ? h_words / nh : 0.0;
  r.avg_hints_per_q = nh / nq;
  r.avg_entities_per_q = q_entities / nq;
  r.avg_entities_per_hint = nh > 0 ? h_entities / nh : 0.0;
  r.avg_sources_per_q = sources / nq;
  return r;
}

// ---- metric validation -----------------------------------------------------------

std::vector<SweepPoint> hicos_sweep(const std::vector<model::QuestionRecord>& records,
                                    const HumanScores& human, int n_from, int n_to,
                                    clients::ServiceClient& chat,
                                    const convergence::ConvergenceConfig& config) {
  if (n_from < 1 || n_to < n_from) fail(ErrorCode::InvalidArgument, "sweep range must satisfy 1 <= from <= to");

  struct Rated {
    std::size_t record;
    std::size_t hint;
    double human;
  };
  std::vector<Rated> rated;
  std::vector<std::size_t> questions;
  for (std::size_t r = 0; r < records.size(); ++r) {
    bool any = false;
    for (std::size_t h = 0; h < records[r].hints.size(); ++h) {
      auto it = human.find({records[r].q_id, static_cast<int>(h), "convergence"});
      if (it == human.end()) continue;
      rated.push_back({r, h, it->second});
      any = true;
    }
    if (any) questions.push_back(r);
  }

  std::map<std::size_t, std::vector<std::string>> generated;
  {
    auto lists = parallel_map<std::vector<std::string>>(
        questions.size(), chat.options().parallelism, [&](std::size_t i) {
          return convergence::generate_candidates(records[questions[i]].question, chat, config);
        });
    for (std::size_t i = 0; i < questions.size(); ++i) generated[questions[i]] = std::move(lists[i]);
  }

  // Every (hint, candidate) pair any n needs, judged once.
  using Task = std::pair<std::string, std::string>;
  std::set<Task> task_set;
  for (const auto& s : rated) {
    const auto& rec = records[s.record];
    for (int n = n_from; n <= n_to; ++n) {
      for (const auto& c : convergence::candidate_list(generated[s.record], rec.exact_answer,
                                                       static_cast<std::size_t>(n))) {
        task_set.insert({rec.hints[s.hint].text, c});
      }
    }
  }
  const std::vector<Task> tasks(task_set.begin(), task_set.end());
  const auto verdicts = parallel_map<std::optional<bool>>(
      tasks.size(), chat.options().parallelism, [&](std::size_t i) -> std::optional<bool> {
        try {
          return convergence::judge(tasks[i].first, tasks[i].second, chat, config);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Judgement) throw;
          return std::nullopt;
        }
      });
  std::map<Task, std::optional<bool>> verdict;
  for (std::size_t i = 0; i < tasks.size(); ++i) verdict[tasks[i]] = verdicts[i];

  std::vector<SweepPoint> curve;
  for (int n = n_from; n <= n_to; ++n) {
    std::vector<double> metric, ratings;
    for (const auto& s : rated) {
      const auto& rec = records[s.record];
      const auto cands = convergence::candidate_list(generated[s.record], rec.exact_answer,
                                                     static_cast<std::size_t>(n));
      const std::size_t ea = convergence::answer_index(cands, rec.exact_answer);
      std::vector<bool> flags;
      bool complete = true;
      for (const auto& c : cands) {
        const auto v = verdict.at({rec.hints[s.hint].text, c});
        if (!v) {
          complete = false;
          break;
        }
        flags.push_back(*v);
      }
      if (!complete) continue;
      metric.push_back(convergence::hicos(flags, flags[ea]));
      ratings.push_back(s.human);
    }
    SweepPoint p{n, std::nullopt, metric.size()};
    if (metric.size() >= 2) {
      try {
        p.pearson_r = pearson(metric, ratings);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UndefinedValue) throw;
      }
    }
    curve.push_back(p);
  }
  return curve;
}

std::string sweep_csv(const std::vector<SweepPoint>& curve) {
  std::ostringstream out;
  out << "n,pearson_r,n_samples\n";
  out.precision(17);
  for (const auto& p : curve) {
    out << p.n << ',';
    if (p.pearson_r) out << *p.pearson_r;
    out << ',' << p.n_samples << '\n';
  }
  return out.str();
}

AggregationComparison compare_aggregations(
    const std::vector<double>& human,
    const std::map<familiarity::AggregateMode, std::vector<double>>& per_mode) {
  AggregationComparison out;
  for (const auto& [mode, values] : per_mode) {
    try {
      out.reports[mode] = correlate(values, human);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UndefinedValue && e.code() != ErrorCode::InvalidArgument) throw;
      out.reports[mode] = std::nullopt;
      out.errors[mode] = e.what();
    }
  }
  for (const auto& [mode, report] : out.reports) {
    if (!report) continue;
    if (!out.best || report->pearson_r > out.reports[*out.best]->pearson_r) out.best = mode;
  }
  return out;
}

AggregationComparison compare_aggregations(const std::vector<model::QuestionRecord>& records,
                                           const HumanScores& human) {
  using familiarity::AggregateMode;
  std::vector<double> ratings;
  std::map<AggregateMode, std::vector<double>> per_mode;
  for (const auto& rec : records) {
    for (std::size_t h = 0; h < rec.hints.size(); ++h) {
      auto it = human.find({rec.q_id, static_cast<int>(h), "familiarity"});
      if (it == human.end()) continue;
      std::vector<double> values;
      for (const auto& p : rec.hints[h].h_popularity) {
        if (p) values.push_back(*p);
      }
      if (values.empty()) continue;
      ratings.push_back(it->second);
      for (auto mode : {AggregateMode::Min, AggregateMode::Avg, AggregateMode::Max}) {
        per_mode[mode].push_back(*familiarity::hifas(values, mode));
      }
    }
  }
  if (ratings.empty()) {
    for (auto mode : {AggregateMode::Min, AggregateMode::Avg, AggregateMode::Max}) per_mode[mode];
  }
  return compare_aggregations(ratings, per_mode);
}

}  // namespace thg::analytics
