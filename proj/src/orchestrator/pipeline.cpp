#include "orchestrator/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "analytics/analytics.hpp"
#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/files.hpp"
#include "common/parallel.hpp"
#include "common/text.hpp"
#include "convergence/convergence.hpp"
#include "hints/hints.hpp"
#include "questions/questions.hpp"

namespace thg::orchestrator {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using model::QuestionRecord;

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"filter",       "classify", "sample",
                                                 "generate",     "filter-hints", "prune",
                                                 "score-hicos",  "score-hifas"};
  return names;
}

ordered_json StageReport::to_json() const {
  ordered_json j;
  j["name"] = name;
  j["input"] = input;
  j["output"] = output;
  j["rejected"] = rejected;
  ordered_json ids = ordered_json::object();
  for (const auto& [reason, list] : rejected_ids) ids[reason] = list;
  j["rejected_ids"] = ids;
  j["details"] = details;
  j["cache"] = {{"hits", cache.hits}, {"misses", cache.misses}, {"network_calls", cache.network_calls}};
  return j;
}

StageReport StageReport::from_json(const ordered_json& j) {
  StageReport r;
  r.name = j.at("name").get<std::string>();
  r.input = j.at("input").get<std::size_t>();
  r.output = j.at("output").get<std::size_t>();
  r.rejected = j.at("rejected").get<std::size_t>();
  for (const auto& [reason, list] : j.at("rejected_ids").items()) {
    r.rejected_ids[reason] = list.get<std::vector<std::string>>();
  }
  r.details = j.at("details");
  r.cache.hits = j.at("cache").at("hits").get<std::uint64_t>();
  r.cache.misses = j.at("cache").at("misses").get<std::uint64_t>();
  r.cache.network_calls = j.at("cache").at("network_calls").get<std::uint64_t>();
  return r;
}

familiarity::FamiliarityNormalizer load_or_fit_normalizer(const fs::path& path) {
  if (path.extension() == ".jsonl") {
    std::vector<double> views;
    for (const auto& [title, v] : familiarity::read_calibration_corpus(path)) views.push_back(v);
    return familiarity::fit_normalizer(views);
  }
  return familiarity::FamiliarityNormalizer::load(path);
}

std::shared_ptr<familiarity::EntityExtractor> make_extractor(
    const PipelineConfig& config, std::shared_ptr<clients::ServiceClient> client) {
  if (config.entity_extractor == "llm") {
    return std::make_shared<familiarity::LlmEntityExtractor>(std::move(client));
  }
  return familiarity::GazetteerExtractor::load(config.gazetteer);
}

namespace {

struct Context {
  const PipelineConfig& config;
  std::shared_ptr<clients::ServiceClient> client;
};

void reject(StageReport& r, const std::string& reason, const std::string& id) {
  r.rejected_ids[reason].push_back(id);
  ++r.rejected;
}

// Per-record outcome of a parallel stage: the record when kept, else a reason.
struct Outcome {
  std::optional<QuestionRecord> record;
  std::string reason;
};

std::vector<QuestionRecord> collect(const std::vector<QuestionRecord>& in,
                                    const std::vector<Outcome>& outcomes, StageReport& r) {
  std::vector<QuestionRecord> out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (outcomes[i].record) {
      out.push_back(*outcomes[i].record);
    } else {
      reject(r, outcomes[i].reason, in[i].q_id);
    }
  }
  return out;
}

std::vector<QuestionRecord> stage_filter(const std::vector<QuestionRecord>& in, Context& ctx,
                                         StageReport& r) {
  const auto resolver = questions::client_resolver(ctx.client);
  const auto outcomes = parallel_map<Outcome>(in.size(), ctx.config.parallelism, [&](std::size_t i) {
    const auto v = questions::filter_question(in[i].question, in[i].exact_answer, resolver);
    if (v.accepted) return Outcome{in[i], {}};
    return Outcome{std::nullopt, questions::reject_reason_name(*v.reason)};
  });
  return collect(in, outcomes, r);
}

std::vector<QuestionRecord> stage_classify(const std::vector<QuestionRecord>& in, Context& ctx,
                                           StageReport& r) {
  std::unique_ptr<questions::QuestionClassifier> classifier;
  if (ctx.config.classifier == "llm") {
    classifier = std::make_unique<questions::LlmClassifier>(ctx.client);
  } else {
    classifier = std::make_unique<questions::KeywordClassifier>();
  }
  const auto outcomes = parallel_map<Outcome>(in.size(), ctx.config.parallelism, [&](std::size_t i) {
    QuestionRecord rec = in[i];
    try {
      const auto label = questions::classify_type(rec.question, *classifier);
      if (label.major == model::MajorType::Description) {
        return Outcome{std::nullopt, questions::reject_reason_name(
                                         questions::RejectReason::DescriptionType)};
      }
      rec.major_type = label.major;
      rec.minor_type = label.minor;
      return Outcome{rec, {}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Classification) throw;
      return Outcome{std::nullopt, "ClassificationError"};
    }
  });
  return collect(in, outcomes, r);
}

std::vector<QuestionRecord> stage_sample(const std::vector<QuestionRecord>& in, Context& ctx,
                                         StageReport& r) {
  auto out = questions::stratified_sample(in, ctx.config.sample_fraction, ctx.config.seed);
  std::size_t k = 0;
  for (const auto& rec : in) {
    if (k < out.size() && out[k].q_id == rec.q_id) {
      ++k;
    } else {
      reject(r, "NotSampled", rec.q_id);
    }
  }
  return out;
}

std::vector<QuestionRecord> stage_generate(const std::vector<QuestionRecord>& in, Context& ctx,
                                           StageReport& r) {
  hints::GenerationConfig gen;
  gen.hints_per_question = ctx.config.hints_per_question;
  std::size_t hint_total = 0;
  const auto outcomes = parallel_map<Outcome>(in.size(), ctx.config.parallelism, [&](std::size_t i) {
    QuestionRecord rec = in[i];
    hints::GenerationOutcome g;
    try {
      g = hints::elicit_and_verify(rec.question, rec.exact_answer, *ctx.client, gen);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Generation) throw;
      return Outcome{std::nullopt, "GenerationError"};
    }
    if (g.status != hints::GenerationStatus::Ok) {
      return Outcome{std::nullopt, hints::generation_status_name(g.status)};
    }
    rec.snippet = g.snippet.value_or("");
    rec.snippet_sources = g.snippet_sources;
    rec.hints.clear();
    for (const auto& h : g.hints_raw) {
      model::Hint hint;
      hint.text = h.text;
      hint.source_indices = h.source_indices;
      rec.hints.push_back(std::move(hint));
    }
    return Outcome{rec, {}};
  });
  auto out = collect(in, outcomes, r);
  for (const auto& rec : out) hint_total += rec.hints.size();
  r.details["hints_generated"] = hint_total;
  return out;
}

std::vector<QuestionRecord> stage_filter_hints(const std::vector<QuestionRecord>& in,
                                               Context& ctx, StageReport& r) {
  const auto embed = hints::client_embedder(ctx.client);
  std::vector<hints::FilterResult> results = parallel_map<hints::FilterResult>(
      in.size(), ctx.config.parallelism, [&](std::size_t i) {
        return hints::filter_hints(in[i].hints, in[i].exact_answer, in[i].question, embed,
                                   ctx.config.similarity_threshold);
      });
  std::vector<QuestionRecord> out;
  std::size_t hints_in = 0, leaked = 0, rephrased = 0, kept = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    QuestionRecord rec = in[i];
    hints_in += rec.hints.size();
    leaked += results[i].leaked.size();
    rephrased += results[i].rephrased.size();
    kept += results[i].kept.size();
    rec.hints = std::move(results[i].kept);
    out.push_back(std::move(rec));
  }
  r.details["hints_in"] = hints_in;
  r.details["hints_leaked"] = leaked;
  r.details["hints_rephrased"] = rephrased;
  r.details["hints_kept"] = kept;
  return out;
}

std::vector<QuestionRecord> stage_prune(const std::vector<QuestionRecord>& in, Context& ctx,
                                        StageReport& r) {
  auto pruned = hints::prune_questions(in, static_cast<std::size_t>(ctx.config.min_hints));
  for (const auto& id : pruned.dropped_ids) reject(r, "TooFewHints", id);
  return std::move(pruned.kept);
}

std::vector<QuestionRecord> stage_hicos(const std::vector<QuestionRecord>& in, Context& ctx,
                                        StageReport& r) {
  convergence::ConvergenceConfig cc;
  cc.n_candidates = ctx.config.candidate_count;
  cc.generate_max = ctx.config.candidate_generate_max;
  std::vector<QuestionRecord> out = in;
  parallel_for(out.size(), ctx.config.parallelism,
               [&](std::size_t i) { convergence::score_record(out[i], *ctx.client, cc); });
  std::size_t absent = 0;
  for (const auto& rec : out) {
    for (const auto& h : rec.hints) absent += h.hicos ? 0 : 1;
  }
  r.details["hints_without_hicos"] = absent;
  return out;
}

std::vector<QuestionRecord> stage_hifas(const std::vector<QuestionRecord>& in, Context& ctx,
                                        StageReport& r) {
  familiarity::FamiliarityContext fc;
  auto extractor = make_extractor(ctx.config, ctx.client);
  fc.extractor = extractor.get();
  fc.client = ctx.client.get();
  fc.normalizer = load_or_fit_normalizer(ctx.config.calibration);
  fc.mode = *familiarity::parse_aggregate_mode(ctx.config.hifas_mode);
  std::vector<QuestionRecord> out = in;
  parallel_for(out.size(), ctx.config.parallelism,
               [&](std::size_t i) { familiarity::score_record(out[i], fc); });
  std::size_t absent = 0;
  for (const auto& rec : out) {
    for (const auto& h : rec.hints) absent += h.hifas ? 0 : 1;
  }
  r.details["hints_without_hifas"] = absent;
  r.details["normalizer"] = ordered_json::parse(fc.normalizer.to_json().dump());
  return out;
}

using StageFn = std::vector<QuestionRecord> (*)(const std::vector<QuestionRecord>&, Context&,
                                                StageReport&);

StageFn stage_fn(std::size_t k) {
  static const StageFn fns[] = {stage_filter, stage_classify,     stage_sample, stage_generate,
                                stage_filter_hints, stage_prune, stage_hicos,  stage_hifas};
  return fns[k];
}

std::string serialize_all(const std::vector<QuestionRecord>& records, model::ValidationLevel level) {
  std::string s;
  for (const auto& rec : records) {
    s += model::serialize_record(rec, level);
    s += '\n';
  }
  return s;
}

std::string stage_stem(std::size_t k) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02zu-", k + 1);
  return buf + stage_names()[k];
}

bool final_level_applies(const PipelineConfig& c) {
  return c.min_hints >= static_cast<int>(model::kMinFinalHints) &&
         c.similarity_threshold <= model::kSimilarityThreshold;
}

}  // namespace

std::vector<QuestionRecord> run_stage(const std::string& name, const std::vector<QuestionRecord>& in,
                                      const PipelineConfig& config,
                                      std::shared_ptr<clients::ServiceClient> client,
                                      StageReport& report) {
  const auto it = std::find(stage_names().begin(), stage_names().end(), name);
  if (it == stage_names().end()) fail(ErrorCode::InvalidArgument, "unknown stage '" + name + "'");
  Context ctx{config, std::move(client)};
  report.name = name;
  report.input = in.size();
  const auto before = ctx.client->stats();
  auto out = stage_fn(static_cast<std::size_t>(it - stage_names().begin()))(in, ctx, report);
  const auto after = ctx.client->stats();
  report.output = out.size();
  report.cache.hits = after.hits - before.hits;
  report.cache.misses = after.misses - before.misses;
  report.cache.network_calls = after.network_calls - before.network_calls;
  return out;
}

RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  config.check();
  if (options.stop_after &&
      std::find(stage_names().begin(), stage_names().end(), *options.stop_after) ==
          stage_names().end()) {
    fail(ErrorCode::InvalidArgument, "unknown stage '" + *options.stop_after + "'");
  }
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir / "stages");
  fs::create_directories(out_dir / "checkpoints");

  const std::string config_digest = sha256_hex(config.canonical());
  const std::string input_text = files::read_all(config.input);
  std::string upstream = sha256_hex(input_text);
  const std::string input_digest = upstream;

  std::vector<QuestionRecord> records;
  {
    const auto lines = files::read_lines(config.input);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (text::trim(lines[i]).empty()) continue;
      records.push_back(model::parse_record(lines[i], i + 1, model::ValidationLevel::Raw));
    }
    model::validate_unique_ids(records);
  }

  Context ctx{config, make_client(config)};
  RunResult result;
  bool recomputed = false;
  for (std::size_t k = 0; k < stage_names().size(); ++k) {
    const std::string stem = stage_stem(k);
    const fs::path out_path = out_dir / "stages" / (stem + ".jsonl");
    const fs::path ckpt_path = out_dir / "checkpoints" / (stem + ".json");

    std::optional<StageReport> loaded;
    if (options.resume && !recomputed && fs::exists(ckpt_path) && fs::exists(out_path)) {
      try {
        const ordered_json ck = ordered_json::parse(files::read_all(ckpt_path));
        const std::string content = files::read_all(out_path);
        if (ck.at("config_digest") == config_digest && ck.at("upstream_digest") == upstream &&
            ck.at("output_digest") == sha256_hex(content)) {
          loaded = StageReport::from_json(ck.at("report"));
          std::vector<QuestionRecord> next;
          const auto lines = files::read_lines(out_path);
          for (std::size_t i = 0; i < lines.size(); ++i) {
            if (text::trim(lines[i]).empty()) continue;
            next.push_back(model::parse_record(lines[i], i + 1, model::ValidationLevel::Raw));
          }
          records = std::move(next);
          upstream = sha256_hex(content);
        }
      } catch (const json::exception&) {
        loaded.reset();  // unreadable checkpoint: recompute
      }
    }

    if (!loaded) {
      recomputed = true;
      StageReport report;
      report.name = stage_names()[k];
      report.input = records.size();
      ctx.client->reset_stats();
      records = stage_fn(k)(records, ctx, report);
      report.output = records.size();
      report.cache = ctx.client->stats();
      if (report.input != report.output + report.rejected) {
        fail(ErrorCode::Internal, "stage " + report.name + " accounting does not balance");
      }
      const std::string content = serialize_all(records, model::ValidationLevel::Raw);
      files::write_atomic(out_path, content);
      ordered_json ck;
      ck["config_digest"] = config_digest;
      ck["upstream_digest"] = upstream;
      ck["output_digest"] = sha256_hex(content);
      ck["report"] = report.to_json();
      files::write_atomic(ckpt_path, ck.dump(2) + "\n");
      upstream = sha256_hex(content);
      loaded = report;
    }
    result.stages.push_back(*loaded);
    if (options.stop_after && *options.stop_after == stage_names()[k]) {
      result.final_records = records;
      return result;
    }
  }

  const auto level =
      final_level_applies(config) ? model::ValidationLevel::Final : model::ValidationLevel::Admitted;
  const std::string final_content = serialize_all(records, level);
  result.final_path = out_dir / "final.jsonl";
  files::write_atomic(result.final_path, final_content);

  ordered_json manifest;
  manifest["config_digest"] = config_digest;
  manifest["input_digest"] = input_digest;
  manifest["stages"] = ordered_json::array();
  for (const auto& s : result.stages) manifest["stages"].push_back(s.to_json());
  manifest["final"] = {{"path", "final.jsonl"},
                       {"records", records.size()},
                       {"digest", sha256_hex(final_content)},
                       {"validation_level", level == model::ValidationLevel::Final ? "final" : "admitted"}};
  if (!records.empty()) {
    const auto stats = analytics::dataset_stats(records).to_json();
    manifest["stats"] = stats;
    files::write_atomic(out_dir / "stats.json", stats.dump(2) + "\n");
  } else {
    manifest["stats"] = nullptr;
  }
  result.manifest_path = out_dir / "manifest.json";
  files::write_atomic(result.manifest_path, manifest.dump(2) + "\n");
  result.manifest = manifest;
  result.final_records = std::move(records);
  result.completed = true;
  return result;
}

}  // namespace thg::orchestrator
