// Command-line front end. Talks to the toolkit only through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "triviahg/triviahg.h"

namespace {

struct Failure {
  thg_status status;
  std::string message;
};

void check(thg_status s) {
  if (s != THG_OK) throw Failure{s, thg_last_error()};
}

struct DatasetDeleter {
  void operator()(thg_dataset* d) const { thg_dataset_free(d); }
};
struct ClientDeleter {
  void operator()(thg_client* c) const { thg_client_free(c); }
};
struct NormalizerDeleter {
  void operator()(thg_normalizer* n) const { thg_normalizer_free(n); }
};
using Dataset = std::unique_ptr<thg_dataset, DatasetDeleter>;
using Client = std::unique_ptr<thg_client, ClientDeleter>;
using Normalizer = std::unique_ptr<thg_normalizer, NormalizerDeleter>;

// Takes ownership of a C string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  thg_string_free(s);
  return out;
}

int parse_level(const std::string& name) {
  if (name == "raw") return THG_LEVEL_RAW;
  if (name == "admitted") return THG_LEVEL_ADMITTED;
  return THG_LEVEL_FINAL;
}

Dataset read_dataset(const std::string& path) {
  thg_dataset* ds = nullptr;
  check(thg_dataset_read(path.c_str(), THG_LEVEL_RAW, &ds));
  return Dataset(ds);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{THG_E_IO, "cannot write " + path};
  out << text;
}

struct ClientArgs {
  std::string config;
  std::vector<std::string> fixtures;
  std::size_t parallelism = 4;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "Pipeline config providing endpoints, fixtures and cache");
    app->add_option("--fixture", fixtures, "Replay fixture file (repeatable)");
    app->add_flag("--offline", "Answer only from fixtures (implied by --fixture without --config)");
    app->add_option("--parallelism", parallelism, "Concurrent requests")->check(CLI::PositiveNumber);
  }

  Client make() const {
    thg_client* c = nullptr;
    if (!config.empty()) {
      check(thg_client_from_config(config.c_str(), &c));
    } else if (!fixtures.empty()) {
      std::vector<const char*> paths;
      for (const auto& f : fixtures) paths.push_back(f.c_str());
      check(thg_client_replay(paths.data(), paths.size(), parallelism, &c));
    } else {
      throw Failure{THG_E_INVALID_ARGUMENT, "provide --config or at least one --fixture"};
    }
    return Client(c);
  }
};

void print_report(const std::string& json) {
  if (!json.empty()) std::cerr << json << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hint dataset toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", thg_version());

  std::string in, out, level = "raw";
  auto add_io = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--in", in, "Input JSONL")->required()->check(CLI::ExistingFile);
    auto* o = sub->add_option("--out", out, needs_out ? "Output file" : "Output file (default stdout)");
    if (needs_out) o->required();
  };
  auto add_level = [&](CLI::App* sub) {
    sub->add_option("--validate", level, "Validation level for the written records")
        ->check(CLI::IsMember({"raw", "admitted", "final"}));
  };

  // sample
  auto* sample = app.add_subcommand("sample", "Type-label and stratify-sample questions");
  double fraction = 1.0 / 3.0;
  std::uint64_t seed = 42;
  std::string classifier = "keyword";
  ClientArgs sample_client;
  add_io(sample, true);
  add_level(sample);
  sample->add_option("--fraction", fraction, "Share of each major class to keep")->check(CLI::Range(0.0, 1.0));
  sample->add_option("--seed", seed, "Sampling seed");
  sample->add_option("--classifier", classifier, "Question-type classifier")->check(CLI::IsMember({"keyword", "llm"}));
  sample_client.add_to(sample);

  // generate-hints
  auto* gen = app.add_subcommand("generate-hints", "Verify answers and collect hints");
  int hints_per_question = 10;
  ClientArgs gen_client;
  add_io(gen, true);
  add_level(gen);
  gen->add_option("--hints", hints_per_question, "Hints requested per question")->check(CLI::PositiveNumber);
  gen_client.add_to(gen);

  // filter-hints
  auto* filt = app.add_subcommand("filter-hints", "Drop leaking and question-like hints, prune questions");
  double threshold = 0.72;
  int min_hints = 5;
  ClientArgs filt_client;
  add_io(filt, true);
  add_level(filt);
  filt->add_option("--threshold", threshold, "Question-similarity cutoff")->check(CLI::Range(0.0, 1.0));
  filt->add_option("--min-hints", min_hints, "Prune questions below this many hints (0 disables)")->check(CLI::NonNegativeNumber);
  filt_client.add_to(filt);

  // score-hicos
  auto* hicos = app.add_subcommand("score-hicos", "Score hint convergence");
  int candidates = 11, generate_max = 20;
  ClientArgs hicos_client;
  add_io(hicos, true);
  add_level(hicos);
  hicos->add_option("--candidates", candidates, "Candidate answers per question")->check(CLI::PositiveNumber);
  hicos->add_option("--generate-max", generate_max, "Candidates requested from the generator")->check(CLI::PositiveNumber);
  hicos_client.add_to(hicos);

  // score-hifas
  auto* hifas = app.add_subcommand("score-hifas", "Score hint familiarity");
  std::string calibration, gazetteer, mode = "avg";
  ClientArgs hifas_client;
  add_io(hifas, true);
  add_level(hifas);
  hifas->add_option("--calibration", calibration, "Normalizer JSON or {title, mean_monthly_views} JSONL corpus")
      ->required()->check(CLI::ExistingFile);
  hifas->add_option("--gazetteer", gazetteer, "Gazetteer JSONL (default: chat-model extraction)")->check(CLI::ExistingFile);
  hifas->add_option("--mode", mode, "Aggregation")->check(CLI::IsMember({"min", "avg", "max"}));
  hifas_client.add_to(hifas);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Fit the pageview normalizer");
  std::string corpus;
  cal->add_option("--corpus", corpus, "{title, mean_monthly_views} JSONL")->required()->check(CLI::ExistingFile);
  cal->add_option("--out", out, "Normalizer JSON")->required();

  // difficulty
  auto* diff = app.add_subcommand("difficulty", "Label answer and question difficulty");
  std::string retriever = "stub", passages, retriever_url;
  std::size_t k = 500;
  add_io(diff, false);
  diff->add_option("--retriever", retriever, "Passage source")->check(CLI::IsMember({"stub", "http"}));
  diff->add_option("--passages", passages, "Stub passages JSONL")->check(CLI::ExistingFile);
  diff->add_option("--retriever-url", retriever_url, "HTTP retriever endpoint");
  diff->add_option("--k", k, "Passages per question")->check(CLI::PositiveNumber);

  // stats
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  add_io(stats, false);

  // correlate
  auto* corr = app.add_subcommand("correlate", "Correlate a metric with human ratings");
  std::string human, metric = "hicos";
  add_io(corr, false);
  corr->add_option("--human", human, "Ratings export JSONL")->required()->check(CLI::ExistingFile);
  corr->add_option("--metric", metric, "Metric")->check(CLI::IsMember({"hicos", "hifas"}));

  // sweep
  auto* sweep = app.add_subcommand("sweep", "HICOS-human correlation across candidate counts");
  std::string range = "1..20";
  ClientArgs sweep_client;
  add_io(sweep, false);
  sweep->add_option("--human", human, "Ratings export JSONL")->required()->check(CLI::ExistingFile);
  sweep->add_option("--n", range, "Candidate-count range, e.g. 1..20");
  sweep->add_option("--generate-max", generate_max, "Candidates requested from the generator")->check(CLI::PositiveNumber);
  sweep_client.add_to(sweep);

  // run-all
  auto* run = app.add_subcommand("run-all", "Run the whole pipeline");
  std::string config, stop_after;
  bool no_resume = false, run_offline = false;
  run->add_option("--config", config, "Pipeline config")->required()->check(CLI::ExistingFile);
  run->add_option("--stop-after", stop_after, "Halt after this stage");
  run->add_flag("--no-resume", no_resume, "Recompute every stage");
  run->add_flag("--offline", run_offline, "Force offline replay regardless of the config");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the annotation API");
  std::string plan, log, host = "127.0.0.1", token_env;
  int port = 8080;
  serve->add_option("--in", in, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  serve->add_option("--plan", plan, "Assignment plan JSON")->check(CLI::ExistingFile);
  serve->add_option("--log", log, "Append-only event log");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--token-env", token_env, "Environment variable holding a bearer token");

  // split
  auto* split = app.add_subcommand("split", "Seeded train/validation/test split");
  std::size_t n_train = 0, n_val = 0, n_test = 0;
  std::string out_dir;
  split->add_option("--in", in, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  split->add_option("--train", n_train, "Training size")->required();
  split->add_option("--validation", n_val, "Validation size")->required();
  split->add_option("--test", n_test, "Test size")->required();
  split->add_option("--seed", seed, "Split seed");
  split->add_option("--out-dir", out_dir, "Directory for train/validation/test.jsonl")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto write_dataset = [&](const Dataset& ds) {
      check(thg_dataset_write(ds.get(), out.c_str(), parse_level(level)));
    };

    if (*sample) {
      auto ds = read_dataset(in);
      Client c;
      if (classifier == "llm") c = sample_client.make();
      thg_dataset* res = nullptr;
      check(thg_sample(ds.get(), fraction, seed, c.get(), &res));
      Dataset result(res);
      write_dataset(result);
      std::cerr << "sampled " << thg_dataset_size(res) << " of " << thg_dataset_size(ds.get()) << '\n';
    } else if (*gen) {
      auto ds = read_dataset(in);
      auto c = gen_client.make();
      thg_dataset* res = nullptr;
      char* report = nullptr;
      check(thg_generate_hints(c.get(), ds.get(), hints_per_question, &res, &report));
      Dataset result(res);
      write_dataset(result);
      print_report(take(report));
    } else if (*filt) {
      auto ds = read_dataset(in);
      auto c = filt_client.make();
      thg_dataset* res = nullptr;
      char* report = nullptr;
      check(thg_filter_hints(c.get(), ds.get(), threshold, min_hints, &res, &report));
      Dataset result(res);
      write_dataset(result);
      print_report(take(report));
    } else if (*hicos) {
      auto ds = read_dataset(in);
      auto c = hicos_client.make();
      thg_dataset* res = nullptr;
      check(thg_score_hicos(c.get(), ds.get(), candidates, std::max(generate_max, candidates), &res));
      Dataset result(res);
      write_dataset(result);
    } else if (*hifas) {
      auto ds = read_dataset(in);
      auto c = hifas_client.make();
      thg_normalizer* n = nullptr;
      check(thg_normalizer_load(calibration.c_str(), &n));
      Normalizer norm(n);
      const int m = mode == "min" ? THG_MODE_MIN : mode == "max" ? THG_MODE_MAX : THG_MODE_AVG;
      thg_dataset* res = nullptr;
      check(thg_score_hifas(c.get(), ds.get(), n, gazetteer.empty() ? nullptr : gazetteer.c_str(), m, &res));
      Dataset result(res);
      write_dataset(result);
    } else if (*cal) {
      thg_normalizer* n = nullptr;
      check(thg_normalizer_fit_corpus(corpus.c_str(), &n));
      Normalizer norm(n);
      check(thg_normalizer_save(n, out.c_str()));
      char* j = nullptr;
      check(thg_normalizer_json(n, &j));
      std::cerr << take(j) << '\n';
    } else if (*diff) {
      auto ds = read_dataset(in);
      if (retriever == "stub" && passages.empty()) throw Failure{THG_E_INVALID_ARGUMENT, "--passages is required with the stub retriever"};
      if (retriever == "http" && retriever_url.empty()) throw Failure{THG_E_INVALID_ARGUMENT, "--retriever-url is required with the http retriever"};
      char* lines = nullptr;
      check(thg_difficulty(ds.get(), retriever == "stub" ? passages.c_str() : nullptr,
                           retriever == "http" ? retriever_url.c_str() : nullptr, k, &lines));
      write_text(out, take(lines));
    } else if (*stats) {
      auto ds = read_dataset(in);
      char* j = nullptr;
      check(thg_stats(ds.get(), &j));
      write_text(out, take(j) + "\n");
    } else if (*corr) {
      auto ds = read_dataset(in);
      char* j = nullptr;
      check(thg_correlate(ds.get(), human.c_str(), metric.c_str(), &j));
      write_text(out, take(j) + "\n");
    } else if (*sweep) {
      const auto dots = range.find("..");
      int from = 0, to = 0;
      try {
        if (dots == std::string::npos) {
          from = to = std::stoi(range);
        } else {
          from = std::stoi(range.substr(0, dots));
          to = std::stoi(range.substr(dots + 2));
        }
      } catch (const std::exception&) {
        throw Failure{THG_E_INVALID_ARGUMENT, "--n expects a range like 1..20"};
      }
      auto ds = read_dataset(in);
      auto c = sweep_client.make();
      char* csv = nullptr;
      check(thg_sweep(c.get(), ds.get(), human.c_str(), from, to, std::max(generate_max, to), &csv));
      write_text(out, take(csv));
    } else if (*run) {
      if (run_offline) setenv("THG_OFFLINE", "true", 1);
      char* manifest = nullptr;
      check(thg_run_pipeline(config.c_str(), stop_after.empty() ? nullptr : stop_after.c_str(),
                             no_resume ? 0 : 1, &manifest));
      std::cout << take(manifest) << '\n';
    } else if (*serve) {
      auto ds = read_dataset(in);
      std::string token;
      if (!token_env.empty()) {
        const char* t = std::getenv(token_env.c_str());
        if (!t) throw Failure{THG_E_INVALID_ARGUMENT, token_env + " is not set"};
        token = t;
      }
      thg_annotation_server* s = nullptr;
      check(thg_annotation_server_create(ds.get(), plan.empty() ? nullptr : plan.c_str(),
                                         log.empty() ? nullptr : log.c_str(),
                                         token.empty() ? nullptr : token.c_str(), &s));
      std::unique_ptr<thg_annotation_server, void (*)(thg_annotation_server*)> guard(
          s, thg_annotation_server_free);
      std::cerr << "serving on " << host << ':' << port << '\n';
      check(thg_annotation_server_run(s, host.c_str(), port));
    } else if (*split) {
      auto ds = read_dataset(in);
      thg_dataset *tr = nullptr, *va = nullptr, *te = nullptr;
      check(thg_dataset_split(ds.get(), n_train, n_val, n_test, seed, &tr, &va, &te));
      Dataset a(tr), b(va), c(te);
      for (auto [name, d] : {std::pair<const char*, thg_dataset*>{"train", tr}, {"validation", va}, {"test", te}}) {
        const std::string path = out_dir + "/" + name + ".jsonl";
        check(thg_dataset_write(d, path.c_str(), parse_level(level)));
      }
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << thg_status_name(f.status) << ": " << f.message << '\n';
    return 1;
  }
  return 0;
}
