#include "triviahg/triviahg.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include <json.hpp>

#include "analytics/analytics.hpp"
#include "clients/http_backends.hpp"
#include "clients/service.hpp"
#include "common/error.hpp"
#include "common/parallel.hpp"
#include "convergence/convergence.hpp"
#include "familiarity/familiarity.hpp"
#include "model/record.hpp"
#include "model/split.hpp"
#include "orchestrator/annotation.hpp"
#include "orchestrator/config.hpp"
#include "orchestrator/pipeline.hpp"
#include "questions/questions.hpp"

struct thg_dataset {
  std::vector<thg::model::QuestionRecord> records;
};

struct thg_client {
  std::shared_ptr<thg::clients::ServiceClient> client;
};

struct thg_normalizer {
  thg::familiarity::FamiliarityNormalizer n;
};

struct thg_annotation_server {
  std::shared_ptr<thg::orchestrator::AnnotationStore> store;
  std::unique_ptr<thg::orchestrator::AnnotationServer> server;
};

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace model = thg::model;

thread_local std::string g_last_error;

thg_status status_of(thg::ErrorCode code) {
  return static_cast<thg_status>(static_cast<int>(code) + 1);
}

template <typename Fn>
thg_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return THG_OK;
  } catch (const thg::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return THG_E_IO;
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return THG_E_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return THG_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return THG_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return THG_E_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) thg::fail(thg::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

model::ValidationLevel level_of(int level) {
  switch (level) {
    case THG_LEVEL_RAW: return model::ValidationLevel::Raw;
    case THG_LEVEL_ADMITTED: return model::ValidationLevel::Admitted;
    case THG_LEVEL_FINAL: return model::ValidationLevel::Final;
    default: thg::fail(thg::ErrorCode::InvalidArgument, "unknown validation level");
  }
}

thg::familiarity::AggregateMode mode_of(int mode) {
  switch (mode) {
    case THG_MODE_MIN: return thg::familiarity::AggregateMode::Min;
    case THG_MODE_AVG: return thg::familiarity::AggregateMode::Avg;
    case THG_MODE_MAX: return thg::familiarity::AggregateMode::Max;
    default: thg::fail(thg::ErrorCode::InvalidArgument, "unknown aggregation mode");
  }
}

int level_code(thg::analytics::Level l) {
  switch (l) {
    case thg::analytics::Level::Easy: return THG_EASY;
    case thg::analytics::Level::Medium: return THG_MEDIUM;
    case thg::analytics::Level::Hard: return THG_HARD;
  }
  return THG_MEDIUM;
}

thg_dataset* wrap(std::vector<model::QuestionRecord> records) {
  return new thg_dataset{std::move(records)};
}

ordered_json report_json(const thg::orchestrator::StageReport& r) { return r.to_json(); }

ordered_json correlation_json(const thg::analytics::CorrelationReport& r) {
  ordered_json j;
  j["pearson_r"] = r.pearson_r;
  j["mse"] = r.mse;
  j["n"] = r.n;
  return j;
}

}  // namespace

extern "C" {

const char* thg_version(void) { return "1.0.0"; }

const char* thg_status_name(thg_status status) {
  if (status == THG_OK) return "ok";
  if (status < THG_OK || status > THG_E_INTERNAL) return "unknown";
  return thg::error_code_name(static_cast<thg::ErrorCode>(static_cast<int>(status) - 1));
}

const char* thg_last_error(void) { return g_last_error.c_str(); }

void thg_string_free(char* s) { std::free(s); }

// ---- datasets ----

thg_status thg_dataset_read(const char* path, int level, thg_dataset** out) {
  return guard([&] {
    require(path && out, "path and out are required");
    *out = wrap(model::read_dataset(path, level_of(level)));
  });
}

thg_status thg_dataset_write(const thg_dataset* ds, const char* path, int level) {
  return guard([&] {
    require(ds && path, "dataset and path are required");
    model::write_dataset(path, ds->records, level_of(level));
  });
}

size_t thg_dataset_size(const thg_dataset* ds) { return ds ? ds->records.size() : 0; }

thg_status thg_dataset_record_json(const thg_dataset* ds, size_t index, char** out) {
  return guard([&] {
    require(ds && out, "dataset and out are required");
    if (index >= ds->records.size()) thg::fail(thg::ErrorCode::NotFound, "record index out of range");
    *out = dup_string(model::serialize_record(ds->records[index], model::ValidationLevel::Raw));
  });
}

void thg_dataset_free(thg_dataset* ds) { delete ds; }

thg_status thg_dataset_split(const thg_dataset* ds, size_t train, size_t validation, size_t test,
                             uint64_t seed, thg_dataset** train_out, thg_dataset** validation_out,
                             thg_dataset** test_out) {
  return guard([&] {
    require(ds && train_out && validation_out && test_out, "dataset and outputs are required");
    auto split = model::split_dataset(ds->records, {train, validation, test}, seed);
    *train_out = wrap(std::move(split.train));
    *validation_out = wrap(std::move(split.validation));
    *test_out = wrap(std::move(split.test));
  });
}

// ---- clients ----

thg_status thg_client_replay(const char* const* fixture_paths, size_t n_fixtures,
                             size_t parallelism, thg_client** out) {
  return guard([&] {
    require(out && (n_fixtures == 0 || fixture_paths), "fixtures and out are required");
    auto store = std::make_shared<thg::clients::ResponseStore>();
    for (size_t i = 0; i < n_fixtures; ++i) store->load(fixture_paths[i]);
    thg::clients::ClientOptions opts;
    opts.offline = true;
    opts.parallelism = parallelism ? parallelism : 1;
    *out = new thg_client{std::make_shared<thg::clients::ServiceClient>(opts, store,
                                                                          thg::clients::Backends{})};
  });
}

thg_status thg_client_from_config(const char* config_path, thg_client** out) {
  return guard([&] {
    require(config_path && out, "config path and out are required");
    const auto config = thg::orchestrator::load_config(config_path);
    *out = new thg_client{thg::orchestrator::make_client(config)};
  });
}

thg_status thg_client_stats_json(const thg_client* client, char** out) {
  return guard([&] {
    require(client && out, "client and out are required");
    const auto s = client->client->stats();
    ordered_json j;
    j["hits"] = s.hits;
    j["misses"] = s.misses;
    j["network_calls"] = s.network_calls;
    j["max_in_flight"] = client->client->limiter().max_in_flight();
    *out = dup_string(j.dump());
  });
}

void thg_client_free(thg_client* client) { delete client; }

// ---- question pipeline ----

thg_status thg_sample(const thg_dataset* in, double fraction, uint64_t seed,
                      thg_client* classifier_client, thg_dataset** out) {
  return guard([&] {
    require(in && out, "dataset and out are required");
    std::unique_ptr<thg::questions::QuestionClassifier> classifier;
    if (classifier_client) {
      classifier = std::make_unique<thg::questions::LlmClassifier>(classifier_client->client);
    } else {
      classifier = std::make_unique<thg::questions::KeywordClassifier>();
    }
    std::vector<thg::model::QuestionRecord> records;
    for (auto r : in->records) {
      if (!r.major_type) {
        const auto label = thg::questions::classify_type(r.question, *classifier);
        r.major_type = label.major;
        r.minor_type = label.minor;
      }
      if (*r.major_type == thg::model::MajorType::Description) continue;
      records.push_back(std::move(r));
    }
    *out = wrap(thg::questions::stratified_sample(records, fraction, seed));
  });
}

// ---- hint pipeline ----

thg_status thg_generate_hints(thg_client* client, const thg_dataset* in, int hints_per_question,
                              thg_dataset** out, char** report) {
  return guard([&] {
    require(client && in && out, "client, dataset and out are required");
    thg::orchestrator::PipelineConfig config;
    config.hints_per_question = hints_per_question;
    config.parallelism = client->client->options().parallelism;
    thg::orchestrator::StageReport r;
    auto records = thg::orchestrator::run_stage("generate", in->records, config, client->client, r);
    if (report) *report = dup_string(report_json(r).dump());
    *out = wrap(std::move(records));
  });
}

thg_status thg_filter_hints(thg_client* client, const thg_dataset* in, double threshold,
                            int min_hints, thg_dataset** out, char** report) {
  return guard([&] {
    require(client && in && out, "client, dataset and out are required");
    require(threshold > 0.0 && threshold <= 1.0, "threshold must lie in (0,1]");
    thg::orchestrator::PipelineConfig config;
    config.similarity_threshold = threshold;
    config.min_hints = min_hints;
    config.parallelism = client->client->options().parallelism;
    thg::orchestrator::StageReport filtered;
    auto records =
        thg::orchestrator::run_stage("filter-hints", in->records, config, client->client, filtered);
    ordered_json j;
    j["filter-hints"] = report_json(filtered);
    if (min_hints > 0) {
      thg::orchestrator::StageReport pruned;
      records = thg::orchestrator::run_stage("prune", records, config, client->client, pruned);
      j["prune"] = report_json(pruned);
    }
    if (report) *report = dup_string(j.dump());
    *out = wrap(std::move(records));
  });
}

// ---- convergence ----

thg_status thg_hicos(const int* cand_valid, size_t n, int ea_valid, double* out) {
  return guard([&] {
    require(out && (n == 0 || cand_valid), "validity array and out are required");
    std::vector<bool> flags;
    for (size_t i = 0; i < n; ++i) flags.push_back(cand_valid[i] != 0);
    *out = thg::convergence::hicos(flags, ea_valid != 0);
  });
}

thg_status thg_score_hicos(thg_client* client, const thg_dataset* in, int n_candidates,
                           int generate_max, thg_dataset** out) {
  return guard([&] {
    require(client && in && out, "client, dataset and out are required");
    require(n_candidates >= 1 && generate_max >= n_candidates,
            "need 1 <= n_candidates <= generate_max");
    thg::convergence::ConvergenceConfig cc;
    cc.n_candidates = n_candidates;
    cc.generate_max = generate_max;
    auto records = in->records;
    thg::parallel_for(records.size(), client->client->options().parallelism, [&](std::size_t i) {
      thg::convergence::score_record(records[i], *client->client, cc);
    });
    *out = wrap(std::move(records));
  });
}

// ---- familiarity ----

thg_status thg_normalizer_fit_corpus(const char* corpus_path, thg_normalizer** out) {
  return guard([&] {
    require(corpus_path && out, "corpus path and out are required");
    std::vector<double> views;
    for (const auto& [title, v] : thg::familiarity::read_calibration_corpus(corpus_path)) {
      views.push_back(v);
    }
    *out = new thg_normalizer{thg::familiarity::fit_normalizer(views)};
  });
}

thg_status thg_normalizer_fit_values(const double* values, size_t n, thg_normalizer** out) {
  return guard([&] {
    require(out && (n == 0 || values), "values and out are required");
    *out = new thg_normalizer{thg::familiarity::fit_normalizer(std::vector<double>(values, values + n))};
  });
}

thg_status thg_normalizer_load(const char* path, thg_normalizer** out) {
  return guard([&] {
    require(path && out, "path and out are required");
    *out = new thg_normalizer{thg::orchestrator::load_or_fit_normalizer(path)};
  });
}

thg_status thg_normalizer_save(const thg_normalizer* n, const char* path) {
  return guard([&] {
    require(n && path, "normalizer and path are required");
    n->n.save(path);
  });
}

thg_status thg_normalizer_json(const thg_normalizer* n, char** out) {
  return guard([&] {
    require(n && out, "normalizer and out are required");
    *out = dup_string(n->n.to_json().dump());
  });
}

double thg_normalizer_normalize(const thg_normalizer* n, double views) {
  return n ? n->n.normalize(views) : 0.5;
}

void thg_normalizer_free(thg_normalizer* n) { delete n; }

thg_status thg_score_hifas(thg_client* client, const thg_dataset* in,
                           const thg_normalizer* normalizer, const char* gazetteer_path, int mode,
                           thg_dataset** out) {
  return guard([&] {
    require(client && in && normalizer && out, "client, dataset, normalizer and out are required");
    std::shared_ptr<thg::familiarity::EntityExtractor> extractor;
    if (gazetteer_path) {
      extractor = thg::familiarity::GazetteerExtractor::load(gazetteer_path);
    } else {
      extractor = std::make_shared<thg::familiarity::LlmEntityExtractor>(client->client);
    }
    thg::familiarity::FamiliarityContext ctx;
    ctx.extractor = extractor.get();
    ctx.client = client->client.get();
    ctx.normalizer = normalizer->n;
    ctx.mode = mode_of(mode);
    auto records = in->records;
    thg::parallel_for(records.size(), client->client->options().parallelism,
                      [&](std::size_t i) { thg::familiarity::score_record(records[i], ctx); });
    *out = wrap(std::move(records));
  });
}

// ---- analytics ----

thg_status thg_answer_difficulty(double popularity, int* level) {
  return guard([&] {
    require(level, "level is required");
    *level = level_code(thg::analytics::answer_difficulty(popularity).level);
  });
}

thg_status thg_question_difficulty(double fraction, int* level) {
  return guard([&] {
    require(level, "level is required");
    *level = level_code(thg::analytics::question_difficulty(fraction).level);
  });
}

thg_status thg_pearson(const double* xs, const double* ys, size_t n, double* out) {
  return guard([&] {
    require(xs && ys && out, "samples and out are required");
    *out = thg::analytics::pearson(std::vector<double>(xs, xs + n), std::vector<double>(ys, ys + n));
  });
}

thg_status thg_mse(const double* xs, const double* ys, size_t n, double* out) {
  return guard([&] {
    require(xs && ys && out, "samples and out are required");
    *out = thg::analytics::mse(std::vector<double>(xs, xs + n), std::vector<double>(ys, ys + n));
  });
}

thg_status thg_difficulty(const thg_dataset* ds, const char* passages_path,
                          const char* retriever_url, size_t k, char** out) {
  return guard([&] {
    require(ds && out, "dataset and out are required");
    require(passages_path || retriever_url, "a stub passage file or a retriever URL is required");
    std::shared_ptr<thg::analytics::Retriever> retriever;
    if (passages_path) {
      retriever = thg::analytics::StubRetriever::load(passages_path);
    } else {
      // "scheme://host[:port]/path" splits into a transport base and a path.
      const std::string url = retriever_url;
      const auto scheme = url.find("://");
      const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
      thg::clients::EndpointConfig cfg{url.substr(0, slash),
                                       slash == std::string::npos ? "/" : url.substr(slash),
                                       "THG_RETRIEVER_TOKEN"};
      retriever = std::make_shared<thg::analytics::HttpRetriever>(
          thg::clients::make_http_transport(cfg.base_url), cfg);
    }
    std::string lines;
    for (const auto& r : ds->records) {
      ordered_json j;
      j["q_id"] = r.q_id;
      if (r.exact_answer_popularity) {
        const auto a = thg::analytics::answer_difficulty(*r.exact_answer_popularity);
        j["answer_popularity"] = a.raw;
        j["answer_difficulty"] = thg::analytics::level_name(a.level);
      } else {
        j["answer_popularity"] = nullptr;
        j["answer_difficulty"] = nullptr;
      }
      const double f = thg::analytics::relevance_fraction(r.question, r.exact_answer, *retriever, k);
      const auto q = thg::analytics::question_difficulty(f);
      j["relevance_fraction"] = f;
      j["question_difficulty"] = thg::analytics::level_name(q.level);
      lines += j.dump() + "\n";
    }
    *out = dup_string(lines);
  });
}

thg_status thg_stats(const thg_dataset* ds, char** out) {
  return guard([&] {
    require(ds && out, "dataset and out are required");
    *out = dup_string(thg::analytics::dataset_stats(ds->records).to_json().dump(2));
  });
}

thg_status thg_correlate(const thg_dataset* ds, const char* ratings_path, const char* metric,
                         char** out) {
  return guard([&] {
    require(ds && ratings_path && metric && out, "dataset, ratings, metric and out are required");
    const auto human = thg::analytics::read_human_scores(ratings_path);
    const std::string m = metric;
    ordered_json j;
    j["metric"] = m;
    if (m == "hicos") {
      std::vector<double> xs, ys;
      for (const auto& r : ds->records) {
        for (std::size_t h = 0; h < r.hints.size(); ++h) {
          auto it = human.find({r.q_id, static_cast<int>(h), "convergence"});
          if (it == human.end() || !r.hints[h].hicos) continue;
          xs.push_back(*r.hints[h].hicos);
          ys.push_back(it->second);
        }
      }
      const ordered_json rep = correlation_json(thg::analytics::correlate(xs, ys));
      for (const auto& [k, v] : rep.items()) j[k] = v;
    } else if (m == "hifas") {
      const auto cmp = thg::analytics::compare_aggregations(ds->records, human);
      ordered_json modes = ordered_json::object();
      for (auto mode : {thg::familiarity::AggregateMode::Min, thg::familiarity::AggregateMode::Avg,
                        thg::familiarity::AggregateMode::Max}) {
        const char* name = thg::familiarity::aggregate_mode_name(mode);
        auto it = cmp.reports.find(mode);
        if (it != cmp.reports.end() && it->second) {
          modes[name] = correlation_json(*it->second);
        } else {
          auto err = cmp.errors.find(mode);
          modes[name] = {{"error", err != cmp.errors.end() ? err->second : "no samples"}};
        }
      }
      j["modes"] = modes;
      j["best"] = cmp.best ? ordered_json(thg::familiarity::aggregate_mode_name(*cmp.best))
                           : ordered_json(nullptr);
    } else {
      thg::fail(thg::ErrorCode::InvalidArgument, "metric must be hicos or hifas");
    }
    *out = dup_string(j.dump(2));
  });
}

thg_status thg_sweep(thg_client* client, const thg_dataset* ds, const char* ratings_path,
                     int n_from, int n_to, int generate_max, char** out) {
  return guard([&] {
    require(client && ds && ratings_path && out, "client, dataset, ratings and out are required");
    thg::convergence::ConvergenceConfig cc;
    cc.generate_max = generate_max;
    const auto human = thg::analytics::read_human_scores(ratings_path);
    const auto curve =
        thg::analytics::hicos_sweep(ds->records, human, n_from, n_to, *client->client, cc);
    *out = dup_string(thg::analytics::sweep_csv(curve));
  });
}

// ---- orchestration ----

thg_status thg_run_pipeline(const char* config_path, const char* stop_after, int resume,
                            char** out) {
  return guard([&] {
    require(config_path, "config path is required");
    const auto config = thg::orchestrator::load_config(config_path);
    thg::orchestrator::RunOptions opts;
    if (stop_after) opts.stop_after = stop_after;
    opts.resume = resume != 0;
    const auto result = thg::orchestrator::run_pipeline(config, opts);
    if (out) {
      if (result.completed) {
        *out = dup_string(result.manifest.dump(2));
      } else {
        ordered_json j;
        j["completed"] = false;
        j["stages"] = ordered_json::array();
        for (const auto& s : result.stages) j["stages"].push_back(s.to_json());
        *out = dup_string(j.dump(2));
      }
    }
  });
}

thg_status thg_annotation_server_create(const thg_dataset* ds, const char* plan_path,
                                        const char* log_path, const char* bearer_token,
                                        thg_annotation_server** out) {
  return guard([&] {
    require(ds && out, "dataset and out are required");
    thg::orchestrator::AssignmentPlan plan;
    if (plan_path) plan = thg::orchestrator::AssignmentPlan::load(plan_path);
    auto store = std::make_shared<thg::orchestrator::AnnotationStore>(ds->records, plan);
    if (log_path) store->attach_log(log_path);
    auto server = std::make_unique<thg::orchestrator::AnnotationServer>(
        store, bearer_token ? bearer_token : "");
    *out = new thg_annotation_server{store, std::move(server)};
  });
}

thg_status thg_annotation_server_start(thg_annotation_server* s, const char* host, int port,
                                       int* bound_port) {
  return guard([&] {
    require(s && host, "server and host are required");
    const int p = s->server->start(host, port);
    if (bound_port) *bound_port = p;
  });
}

thg_status thg_annotation_server_run(thg_annotation_server* s, const char* host, int port) {
  return guard([&] {
    require(s && host, "server and host are required");
    s->server->run(host, port);
  });
}

void thg_annotation_server_stop(thg_annotation_server* s) {
  if (s) s->server->stop();
}

void thg_annotation_server_free(thg_annotation_server* s) { delete s; }

}  // extern "C"
