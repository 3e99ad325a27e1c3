// One PASS/FAIL line per primary acceptance criterion. Exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analytics/analytics.hpp"
#include "common/error.hpp"
#include "common/files.hpp"
#include "common/text.hpp"
#include "convergence/convergence.hpp"
#include "familiarity/familiarity.hpp"
#include "hints/hints.hpp"
#include "hints/lemmatizer.hpp"
#include "model/record.hpp"
#include "questions/questions.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace thg;

namespace {

const fs::path kFixtures = THG_FIXTURES;
const std::string kCli = THG_CLI;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Returns "" on success or a description of the first failure.
using Check = std::function<std::string()>;

int failures = 0;

void criterion(const std::string& name, const Check& check) {
  std::string why;
  try {
    why = check();
  } catch (const std::exception& e) {
    why = std::string("exception: ") + e.what();
  }
  if (why.empty()) {
    std::cout << "PASS " << name << std::endl;
  } else {
    ++failures;
    std::cout << "FAIL " << name << ": " << why << std::endl;
  }
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("thg-accept-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

// ---- criteria ------------------------------------------------------------------

std::string eq1_oracle() {
  const auto t0 = Clock::now();
  std::size_t cases = 0;
  for (int n = 1; n <= 8; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<bool> valid(static_cast<std::size_t>(n));
      std::int64_t sum = 0;
      for (int i = 0; i < n; ++i) {
        valid[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
        sum += (mask >> i) & 1u;
      }
      for (bool ea : {false, true}) {
        ++cases;
        const std::string where = "n=" + std::to_string(n) + " mask=" + std::to_string(mask) +
                                  " ea=" + std::to_string(ea);
        // Brute force: 0 when the answer is invalid, else (n - (sum - 1)) / n.
        if (ea && sum == 0) {
          // A valid answer is itself a valid candidate; the input is inconsistent.
          try {
            convergence::hicos_exact(valid, ea);
            return where + ": inconsistent input accepted";
          } catch (const Error&) {
            continue;
          }
        }
        std::int64_t num = ea ? n - (sum - 1) : 0;
        std::int64_t den = ea ? n : 1;
        const std::int64_t g = std::gcd(num, den);
        num /= g;
        den /= g;
        auto got = convergence::hicos_exact(valid, ea);
        const std::int64_t gg = std::gcd(got.num, got.den);
        if (gg != 0) {
          got.num /= gg;
          got.den /= gg;
        }
        if (got.num != num || got.den != den) {
          return where + ": got " + std::to_string(got.num) + "/" + std::to_string(got.den) +
                 ", oracle " + std::to_string(num) + "/" + std::to_string(den);
        }
        if (convergence::hicos(valid, ea) != static_cast<double>(num) / static_cast<double>(den)) {
          return where + ": double value is not the rounded rational";
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  if (cases != 2 * 510) return "enumerated " + std::to_string(cases) + " cases";
  if (secs >= 1.0) return "took " + std::to_string(secs) + " s";
  return "";
}

std::string eq1_pinned() {
  std::vector<bool> some{true, false, true};
  if (convergence::hicos(some, false) != 0.0) return "ea_valid=0 is not 0.0";
  std::vector<bool> one(11, false);
  one[4] = true;
  if (convergence::hicos(one, true) != 1.0) return "n=11 sum=1 is not 1.0";
  std::vector<bool> four(10, false);
  four[0] = four[3] = four[6] = four[9] = true;
  const double v = convergence::hicos(four, true);
  if (std::fabs(v - 0.7) > 1e-12) return "n=10 sum=4 gave " + std::to_string(v);
  return "";
}

std::string iqr_normalizer() {
  std::vector<double> corpus;
  for (int i = 1; i <= 100; ++i) corpus.push_back(i);
  const auto n = familiarity::fit_normalizer(corpus);
  const double want[] = {25.75, 75.25, -48.5, 149.5};
  const double got[] = {n.q1, n.q3, n.lower, n.upper};
  for (int i = 0; i < 4; ++i) {
    if (std::fabs(want[i] - got[i]) > 1e-9) return "fitted value " + std::to_string(got[i]);
  }
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> wide(-1e4, 1e4);
  for (int i = 0; i < 10000; ++i) {
    double a = wide(rng), b = wide(rng);
    if (a > b) std::swap(a, b);
    const double na = n.normalize(a), nb = n.normalize(b);
    if (!(na >= 0 && na <= 1 && nb >= 0 && nb <= 1)) return "output outside [0,1]";
    if (na > nb) return "not monotonic at " + std::to_string(a) + ", " + std::to_string(b);
  }
  return "";
}

std::string pearson_mse() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> x(200), lin(200), neg(200);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = g(rng);
    lin[i] = 2 * x[i] + 3;
    neg[i] = -x[i];
  }
  if (std::fabs(analytics::pearson(lin, x) - 1) > 1e-9) return "r(2x+3, x) != 1";
  if (std::fabs(analytics::pearson(neg, x) + 1) > 1e-9) return "r(-x, x) != -1";

  std::uniform_real_distribution<double> scale(0.1, 10), shift(-100, 100);
  std::uniform_int_distribution<int> len(3, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(len(rng))), b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
    }
    const double r = analytics::pearson(a, b);
    const double s = scale(rng), t = shift(rng);
    std::vector<double> a2(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) a2[i] = s * a[i] + t;
    if (std::fabs(analytics::pearson(a2, b) - r) > 1e-9) return "scale/shift changed r on trial " + std::to_string(trial);
    if (r < -1 || r > 1) return "r outside [-1,1]";
  }
  if (analytics::mse({1, 2, 3}, {1, 2, 3}) != 0.0) return "mse of equal vectors";
  if (analytics::mse({0, 0}, {1, 3}) != 5.0) return "mse {0,0} vs {1,3}";
  if (analytics::mse({0.5, 1}, {0.25, 0}) != 0.53125) return "mse {0.5,1} vs {0.25,0}";
  return "";
}

std::string filtering_guarantee() {
  std::size_t leaks = 0, rephrases = 0, clean = 0;
  for (const auto& line : files::read_lines(kFixtures / "filter" / "hints.jsonl")) {
    if (text::trim(line).empty()) continue;
    const json row = json::parse(line);
    const std::string hint = row["hint"], question = row["question"], answer = row["answer"];
    const std::string planted = row["planted"];
    const auto qv = row["question_embedding"].get<std::vector<double>>();
    const auto hv = row["hint_embedding"].get<std::vector<double>>();
    hints::Embedder embed = [&](const std::string& t) -> clients::EmbeddingVector {
      if (t == question) return {qv};
      if (t == hint) return {hv};
      fail(ErrorCode::Internal, "unexpected embedding request");
    };
    model::Hint h;
    h.text = hint;
    const auto r = hints::filter_hints({h}, answer, question, embed, 0.72);
    const std::string id = row["id"].dump();
    if (planted == "leak") {
      ++leaks;
      if (r.leaked.size() != 1) return "planted leak " + id + " not removed as a leak";
    } else if (planted == "rephrase") {
      ++rephrases;
      if (r.rephrased.size() != 1) return "planted rephrase " + id + " not removed as a rephrase";
    } else {
      ++clean;
      if (r.kept.size() != 1) return "clean hint " + id + " was removed";
      // Lemma disjointness, recomputed here from the primitives.
      std::set<std::string> hint_lemmas;
      for (const auto& t : text::word_tokens(hint)) hint_lemmas.insert(hints::lemmatize(t));
      for (const auto& t : text::word_tokens(answer)) {
        if (!hints::is_stopword(t) && hint_lemmas.count(hints::lemmatize(t))) {
          return "kept hint " + id + " shares lemma '" + hints::lemmatize(t) + "' with the answer";
        }
      }
    }
  }
  if (leaks != 40 || rephrases != 20 || clean != 140) return "fixture does not have 40/20/140 rows";
  return "";
}

std::string pipeline_determinism() {
  TempDir a, b;
  const std::string conf = (kFixtures / "pipeline" / "pipeline.conf").string();
  for (const auto* dir : {&a, &b}) {
    const std::string cmd = "THG_OUTPUT_DIR=" + quote(dir->path.string()) + " " + quote(kCli) +
                            " run-all --offline --config " + quote(conf) + " > /dev/null";
    if (const int rc = run(cmd); rc != 0) return "run-all exited " + std::to_string(rc);
  }
  for (const char* name : {"final.jsonl", "manifest.json"}) {
    if (files::read_all(a.path / name) != files::read_all(b.path / name)) {
      return std::string(name) + " differs between runs";
    }
  }
  const auto records = model::read_dataset((a.path / "final.jsonl").string(), model::ValidationLevel::Final);
  model::validate_unique_ids(records);
  if (records.empty()) return "no final records";

  const json manifest = json::parse(files::read_all(a.path / "manifest.json"));
  std::size_t prev_out = 0;
  bool first = true;
  for (const auto& s : manifest["stages"]) {
    const std::size_t in = s["input"], out = s["output"], rej = s["rejected"];
    if (in != out + rej) return "stage " + s["name"].get<std::string>() + " does not balance";
    std::size_t listed = 0;
    for (const auto& [reason, ids] : s["rejected_ids"].items()) listed += ids.size();
    if (listed != rej) return "stage " + s["name"].get<std::string>() + " lists the wrong number of rejects";
    if (!first && in != prev_out) return "stage " + s["name"].get<std::string>() + " input != upstream output";
    prev_out = out;
    first = false;
  }
  if (prev_out != records.size() || manifest["final"]["records"] != records.size()) {
    return "final record count does not match the last stage";
  }
  return "";
}

std::string stratified_sampler() {
  const std::size_t sizes[] = {4000, 3000, 2000, 1000};
  std::vector<model::QuestionRecord> corpus;
  std::mt19937_64 rng(1);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < sizes[c]; ++i) {
      model::QuestionRecord r;
      r.q_id = "c" + std::to_string(c) + "-" + std::to_string(i);
      r.question = "Which synthetic question is this one?";
      r.exact_answer = "x";
      r.major_type = static_cast<model::MajorType>(c);
      corpus.push_back(std::move(r));
    }
  }
  std::shuffle(corpus.begin(), corpus.end(), rng);
  const double fraction = 1.0 / 3.0;
  const auto s1 = questions::stratified_sample(corpus, fraction, 42);
  const auto s2 = questions::stratified_sample(corpus, fraction, 42);
  if (s1 != s2) return "same seed gave different samples";
  if (s1.size() != 3333 && s1.size() != 3334) return "total " + std::to_string(s1.size());
  std::size_t per[4] = {0, 0, 0, 0};
  for (const auto& r : s1) ++per[static_cast<std::size_t>(*r.major_type)];
  for (std::size_t c = 0; c < 4; ++c) {
    const double ideal = static_cast<double>(sizes[c]) * fraction;
    if (std::fabs(static_cast<double>(per[c]) - ideal) > 1.0) {
      return "class " + std::to_string(c) + " got " + std::to_string(per[c]);
    }
  }
  return "";
}

std::string difficulty_grid() {
  using analytics::Level;
  std::size_t mismatches = 0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = i / 1000.0;
    const Level answer_want = i > 660 ? Level::Easy : i >= 330 ? Level::Medium : Level::Hard;
    // Question side: Hard < 1/3 <= Medium < 2/3 <= Easy, compared exactly as 3i vs 1000.
    const Level question_want = 3 * i < 1000 ? Level::Hard : 3 * i < 2000 ? Level::Medium : Level::Easy;
    if (analytics::answer_difficulty(v).level != answer_want) ++mismatches;
    if (analytics::question_difficulty(v).level != question_want) ++mismatches;
  }
  return mismatches ? std::to_string(mismatches) + " mismatches" : "";
}

std::string sweep_harness() {
  TempDir tmp;
  const fs::path dir = kFixtures / "sweep";
  const fs::path out = tmp.path / "curve.csv";
  const auto t0 = Clock::now();
  const std::string cmd = quote(kCli) + " sweep --in " + quote((dir / "dataset.jsonl").string()) +
                          " --human " + quote((dir / "ratings.jsonl").string()) + " --fixture " +
                          quote((dir / "replay.jsonl").string()) + " --n 1..20 --out " + quote(out.string());
  if (const int rc = run(cmd); rc != 0) return "sweep exited " + std::to_string(rc);
  const double secs = seconds_since(t0);
  if (secs >= 30.0) return "took " + std::to_string(secs) + " s";

  std::istringstream csv(files::read_all(out));
  std::string line;
  std::getline(csv, line);
  int best_n = -1, rows = 0;
  double best_r = -2;
  while (std::getline(csv, line)) {
    std::istringstream cells(line);
    std::string n, r;
    std::getline(cells, n, ',');
    std::getline(cells, r, ',');
    ++rows;
    if (r.empty()) continue;
    const double v = std::stod(r);
    if (v < -1 || v > 1) return "r out of range at n=" + n;
    if (v > best_r) {
      best_r = v;
      best_n = std::stoi(n);
    }
  }
  if (rows != 20) return std::to_string(rows) + " rows";
  if (best_n != 11) return "argmax n=" + std::to_string(best_n);
  return "";
}

std::string dataset_statistics() {
  TempDir tmp;
  const fs::path out = tmp.path / "stats.json";
  const std::string cmd = quote(kCli) + " stats --in " +
                          quote((kFixtures / "stats" / "dataset.jsonl").string()) + " --out " +
                          quote(out.string());
  if (const int rc = run(cmd); rc != 0) return "stats exited " + std::to_string(rc);
  const json got = json::parse(files::read_all(out));
  const json want = json::parse(files::read_all(kFixtures / "stats" / "golden.json"));
  if (got.size() != 8) return "expected 8 aggregates, got " + std::to_string(got.size());
  for (const auto& [key, value] : want.items()) {
    if (!got.contains(key) || got[key] != value) {
      return key + ": got " + (got.contains(key) ? got[key].dump() : "nothing") + ", want " + value.dump();
    }
  }
  return "";
}

}  // namespace

int main() {
  criterion("eq1-oracle-equivalence", eq1_oracle);
  criterion("eq1-pinned-points", eq1_pinned);
  criterion("iqr-normalizer", iqr_normalizer);
  criterion("pearson-mse", pearson_mse);
  criterion("filtering-guarantee", filtering_guarantee);
  criterion("pipeline-determinism", pipeline_determinism);
  criterion("stratified-sampler", stratified_sampler);
  criterion("difficulty-thresholds", difficulty_grid);
  criterion("sweep-harness", sweep_harness);
  criterion("dataset-statistics", dataset_statistics);
  return failures;
}
