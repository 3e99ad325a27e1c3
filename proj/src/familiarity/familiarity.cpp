#include "familiarity/familiarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "common/files.hpp"
#include "common/parallel.hpp"
#include "common/text.hpp"
#include "hints/hints.hpp"

namespace thg::familiarity {

using nlohmann::json;

namespace {

bool word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool at_boundary(const std::string& text, std::size_t pos, std::size_t len) {
  const bool left = pos == 0 || !word_char(text[pos - 1]);
  const bool right = pos + len >= text.size() || !word_char(text[pos + len]);
  return left && right;
}

struct Span {
  std::size_t pos, len;
  model::EntityMention mention;
};

bool overlaps(const std::vector<Span>& taken, std::size_t pos, std::size_t len) {
  return std::any_of(taken.begin(), taken.end(), [&](const Span& s) {
    return pos < s.pos + s.len && s.pos < pos + len;
  });
}

std::vector<model::EntityMention> in_text_order(std::vector<Span> spans) {
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.pos < b.pos; });
  std::vector<model::EntityMention> out;
  for (auto& s : spans) out.push_back(std::move(s.mention));
  return out;
}

}  // namespace

GazetteerExtractor::GazetteerExtractor(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.surface.size() > b.surface.size();
  });
}

std::shared_ptr<GazetteerExtractor> GazetteerExtractor::load(const std::filesystem::path& path) {
  std::vector<Entry> entries;
  std::size_t n = 0;
  for (const auto& line : files::read_lines(path)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      Entry e{j.at("surface").get<std::string>(), std::nullopt};
      if (j.contains("title") && !j.at("title").is_null()) e.title = j.at("title").get<std::string>();
      if (e.surface.empty()) fail(ErrorCode::Parse, "empty surface");
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      fail(ErrorCode::Parse, path.string() + " line " + std::to_string(n) + ": " + ex.what());
    }
  }
  return std::make_shared<GazetteerExtractor>(std::move(entries));
}

std::vector<model::EntityMention> GazetteerExtractor::extract(const std::string& text) {
  std::vector<Span> taken;
  for (const auto& e : entries_) {
    for (std::size_t pos = text.find(e.surface); pos != std::string::npos;
         pos = text.find(e.surface, pos + 1)) {
      if (!at_boundary(text, pos, e.surface.size()) || overlaps(taken, pos, e.surface.size())) {
        continue;
      }
      taken.push_back(Span{pos, e.surface.size(), model::EntityMention{e.surface, e.title, {}}});
    }
  }
  return in_text_order(std::move(taken));
}

LlmEntityExtractor::LlmEntityExtractor(std::shared_ptr<clients::ServiceClient> chat,
                                       std::string prompt)
    : chat_(std::move(chat)), prompt_(std::move(prompt)) {}

std::vector<model::EntityMention> LlmEntityExtractor::extract(const std::string& text) {
  const auto reply = chat_->chat(text::fill_template(prompt_, {{"TEXT", text}})).response;
  const std::string trimmed = text::trim(reply);
  if (trimmed.empty() || text::to_lower_ascii(trimmed).rfind("none", 0) == 0) return {};
  const auto items = hints::parse_hint_list(reply);
  if (items.empty()) fail(ErrorCode::Generation, "entity reply has no list: " + reply);
  std::vector<Span> taken;
  for (const auto& item : items) {
    const std::string& surface = item.text;
    for (std::size_t pos = text.find(surface); pos != std::string::npos;
         pos = text.find(surface, pos + 1)) {
      if (at_boundary(text, pos, surface.size()) && !overlaps(taken, pos, surface.size())) {
        taken.push_back(Span{pos, surface.size(), model::EntityMention{surface, {}, {}}});
        break;
      }
    }
  }
  return in_text_order(std::move(taken));
}

std::vector<model::EntityMention> extract_entities(const std::string& text,
                                                   EntityExtractor& extractor,
                                                   clients::ServiceClient* titles) {
  auto mentions = extractor.extract(text);
  if (titles) {
    for (auto& m : mentions) {
      if (!m.wiki_title) m.wiki_title = titles->resolve_title(m.surface);
    }
  }
  return mentions;
}

std::optional<double> raw_popularity(const std::string& title, clients::ServiceClient& pageviews,
                                     const std::string& start, const std::string& end) {
  const auto lookup = pageviews.monthly_pageviews(title, start, end);
  if (lookup.article_missing || lookup.months.empty()) return std::nullopt;
  double sum = 0;
  for (const auto& m : lookup.months) sum += static_cast<double>(m.views);
  return sum / static_cast<double>(lookup.months.size());
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double FamiliarityNormalizer::normalize(double views) const {
  if (upper <= lower) return 0.5;
  const double v = std::clamp(views, lower, upper);
  return std::clamp((v - lower) / (upper - lower), 0.0, 1.0);
}

json FamiliarityNormalizer::to_json() const {
  json j = json::object();
  j["q1"] = q1;
  j["q3"] = q3;
  j["iqr"] = iqr;
  j["lower"] = lower;
  j["upper"] = upper;
  j["corpus_size"] = corpus_size;
  return j;
}

FamiliarityNormalizer FamiliarityNormalizer::from_json(const json& j) {
  try {
    FamiliarityNormalizer n;
    n.q1 = j.at("q1").get<double>();
    n.q3 = j.at("q3").get<double>();
    n.iqr = j.at("iqr").get<double>();
    n.lower = j.at("lower").get<double>();
    n.upper = j.at("upper").get<double>();
    n.corpus_size = j.at("corpus_size").get<std::size_t>();
    if (!(n.q1 <= n.q3) || !(n.lower <= n.upper)) {
      fail(ErrorCode::Validation, "normalizer bounds are out of order");
    }
    return n;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("normalizer JSON: ") + e.what());
  }
}

void FamiliarityNormalizer::save(const std::filesystem::path& path) const {
  files::write_atomic(path, to_json().dump(2) + "\n");
}

FamiliarityNormalizer FamiliarityNormalizer::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(files::read_all(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return from_json(j);
}

FamiliarityNormalizer fit_normalizer(const std::vector<double>& corpus_views) {
  if (corpus_views.size() < 4) {
    fail(ErrorCode::InvalidArgument, "calibration corpus needs at least 4 values, got " +
                                         std::to_string(corpus_views.size()));
  }
  for (double v : corpus_views) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "calibration corpus has a non-finite value");
  }
  FamiliarityNormalizer n;
  n.q1 = quantile(corpus_views, 0.25);
  n.q3 = quantile(corpus_views, 0.75);
  n.iqr = n.q3 - n.q1;
  n.lower = n.q1 - 1.5 * n.iqr;
  n.upper = n.q3 + 1.5 * n.iqr;
  n.corpus_size = corpus_views.size();
  return n;
}

std::vector<std::pair<std::string, double>> read_calibration_corpus(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, double>> out;
  std::size_t n = 0;
  for (const auto& line : files::read_lines(path)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      out.emplace_back(j.at("title").get<std::string>(), j.at("mean_monthly_views").get<double>());
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

const char* aggregate_mode_name(AggregateMode m) {
  switch (m) {
    case AggregateMode::Min: return "min";
    case AggregateMode::Avg: return "avg";
    case AggregateMode::Max: return "max";
  }
  return "avg";
}

std::optional<AggregateMode> parse_aggregate_mode(std::string_view name) {
  const std::string s = text::to_lower_ascii(name);
  if (s == "min") return AggregateMode::Min;
  if (s == "avg" || s == "mean") return AggregateMode::Avg;
  if (s == "max") return AggregateMode::Max;
  return std::nullopt;
}

std::optional<double> hifas(const std::vector<double>& values, AggregateMode mode) {
  if (values.empty()) return std::nullopt;
  switch (mode) {
    case AggregateMode::Min: return *std::min_element(values.begin(), values.end());
    case AggregateMode::Max: return *std::max_element(values.begin(), values.end());
    case AggregateMode::Avg: break;
  }
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

FamiliarityResult evaluate_text(const std::string& text, const FamiliarityContext& ctx) {
  if (!ctx.extractor || !ctx.client) {
    fail(ErrorCode::InvalidArgument, "familiarity context needs an extractor and a client");
  }
  FamiliarityResult r;
  r.aggregate_mode = ctx.mode;
  auto mentions = extract_entities(text, *ctx.extractor, ctx.client);
  auto raw = parallel_map<std::optional<double>>(
      mentions.size(), ctx.client->options().parallelism, [&](std::size_t i) {
        return mentions[i].wiki_title ? raw_popularity(*mentions[i].wiki_title, *ctx.client)
                                      : std::nullopt;
      });
  std::vector<double> present;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    mentions[i].raw_views = raw[i];
    std::optional<double> norm;
    if (raw[i]) {
      norm = ctx.normalizer.normalize(*raw[i]);
      present.push_back(*norm);
    }
    r.per_entity.push_back({std::move(mentions[i]), norm});
  }
  r.hifas = hifas(present, ctx.mode);
  return r;
}

void score_record(model::QuestionRecord& record, const FamiliarityContext& ctx) {
  double sum = 0;
  std::size_t present = 0;
  for (auto& h : record.hints) {
    h.entities.clear();
    h.h_popularity.clear();
    h.hifas.reset();
    FamiliarityResult r;
    try {
      r = evaluate_text(h.text, ctx);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Generation) throw;
      continue;  // extractor failure leaves this hint unscored
    }
    for (auto& s : r.per_entity) {
      h.entities.push_back(s.entity);
      h.h_popularity.push_back(s.normalized);
    }
    h.hifas = r.hifas;
    if (h.hifas) {
      sum += *h.hifas;
      ++present;
    }
  }
  record.familiarity =
      present ? std::optional<double>(sum / static_cast<double>(present)) : std::nullopt;

  record.q_popularity.clear();
  try {
    for (const auto& s : evaluate_text(record.question, ctx).per_entity) {
      record.q_popularity.push_back(s.normalized);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Generation) throw;
  }

  record.exact_answer_popularity.reset();
  if (auto title = ctx.client->resolve_title(record.exact_answer)) {
    if (auto raw = raw_popularity(*title, *ctx.client)) {
      record.exact_answer_popularity = ctx.normalizer.normalize(*raw);
    }
  }
}

}  // namespace thg::familiarity
