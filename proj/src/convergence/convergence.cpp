#include "convergence/convergence.hpp"

#include <algorithm>
#include <numeric>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "common/text.hpp"
#include "hints/hints.hpp"

namespace thg::convergence {
namespace {

std::string normalized_key(const std::string& s) {
  return text::join(text::normalized_answer_tokens(s), " ");
}

}  // namespace

std::vector<std::string> parse_candidates(const std::string& reply, int n_max) {
  if (n_max < 1) fail(ErrorCode::InvalidArgument, "n_max must be >= 1");
  std::vector<std::string> out;
  std::vector<std::string> seen;
  for (const auto& item : hints::parse_hint_list(reply)) {
    const std::string key = normalized_key(item.text);
    if (key.empty() || std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    out.push_back(item.text);
    if (out.size() == static_cast<std::size_t>(n_max)) break;
  }
  if (out.empty()) fail(ErrorCode::Generation, "no candidate answers could be parsed");
  return out;
}

std::vector<std::string> generate_candidates(const std::string& question,
                                             clients::ServiceClient& chat,
                                             const ConvergenceConfig& config) {
  const std::string prompt = text::fill_template(
      config.candidate_prompt,
      {{"N", std::to_string(config.generate_max)}, {"QUESTION", question}});
  return parse_candidates(chat.chat(prompt).response, config.generate_max);
}

std::vector<std::string> candidate_list(const std::vector<std::string>& generated,
                                        const std::string& exact_answer, std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "candidate list size must be >= 1");
  const std::string answer_key = normalized_key(exact_answer);
  std::vector<std::string> out(generated.begin(),
                               generated.begin() + std::min(n, generated.size()));
  auto hit = std::find_if(out.begin(), out.end(),
                          [&](const std::string& c) { return normalized_key(c) == answer_key; });
  if (hit != out.end()) {
    *hit = exact_answer;
    return out;
  }
  if (out.size() == n) out.pop_back();
  out.push_back(exact_answer);
  return out;
}

std::size_t answer_index(const std::vector<std::string>& candidates,
                         const std::string& exact_answer) {
  const std::string key = normalized_key(exact_answer);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (normalized_key(candidates[i]) == key) return i;
  }
  fail(ErrorCode::InvalidArgument, "exact answer missing from candidate list");
}

std::optional<bool> parse_verdict(const std::string& reply) {
  std::string word;
  for (char c : reply) {
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (alpha) {
      word.push_back(c);
    } else if (!word.empty()) {
      break;
    }
  }
  word = text::to_lower_ascii(word);
  if (word == "yes") return true;
  if (word == "no") return false;
  return std::nullopt;
}

bool judge(const std::string& hint, const std::string& candidate, clients::ServiceClient& chat,
           const ConvergenceConfig& config) {
  const std::string prompt =
      text::fill_template(config.judge_prompt, {{"HINT", hint}, {"CANDIDATE", candidate}});
  if (auto v = parse_verdict(chat.chat(prompt).response)) return *v;
  const auto retry = chat.chat(prompt, {{"attempt", "2"}});
  if (auto v = parse_verdict(retry.response)) return *v;
  fail(ErrorCode::Judgement, "judge gave neither Yes nor No for candidate \"" + candidate +
                                 "\": " + retry.response);
}

Fraction hicos_exact(const std::vector<bool>& cand_valid, bool ea_valid) {
  if (cand_valid.empty()) fail(ErrorCode::InvalidArgument, "empty candidate list");
  const auto n = static_cast<std::int64_t>(cand_valid.size());
  if (!ea_valid) return Fraction{0, n};
  const auto s = static_cast<std::int64_t>(std::count(cand_valid.begin(), cand_valid.end(), true));
  if (s == 0) {
    fail(ErrorCode::InvalidArgument, "ea_valid is true but no candidate is valid");
  }
  return Fraction{n - s + 1, n};
}

double hicos(const std::vector<bool>& cand_valid, bool ea_valid) {
  return hicos_exact(cand_valid, ea_valid).value();
}

ConvergenceJudgement judge_candidates(const std::string& hint,
                                      const std::vector<std::string>& candidates,
                                      const std::string& exact_answer,
                                      clients::ServiceClient& chat,
                                      const ConvergenceConfig& config) {
  ConvergenceJudgement j;
  j.candidates = candidates;
  j.n_candidates = candidates.size();
  const std::size_t ea = answer_index(candidates, exact_answer);
  j.cand_valid = parallel_map<std::optional<bool>>(
      candidates.size(), chat.options().parallelism,
      [&](std::size_t i) -> std::optional<bool> {
        try {
          return judge(hint, candidates[i], chat, config);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Judgement) throw;
          return std::nullopt;
        }
      });
  j.ea_valid = j.cand_valid[ea];
  const bool complete = std::all_of(j.cand_valid.begin(), j.cand_valid.end(),
                                    [](const auto& v) { return v.has_value(); });
  if (complete) {
    std::vector<bool> flags;
    for (const auto& v : j.cand_valid) flags.push_back(*v);
    j.score = hicos(flags, *j.ea_valid);
  }
  return j;
}

ConvergenceJudgement evaluate_hint_convergence(const std::string& question,
                                               const std::string& exact_answer,
                                               const std::string& hint,
                                               clients::ServiceClient& chat,
                                               const ConvergenceConfig& config) {
  const auto generated = generate_candidates(question, chat, config);
  const auto candidates =
      candidate_list(generated, exact_answer, static_cast<std::size_t>(config.n_candidates));
  return judge_candidates(hint, candidates, exact_answer, chat, config);
}

void score_record(model::QuestionRecord& record, clients::ServiceClient& chat,
                  const ConvergenceConfig& config) {
  const auto generated = generate_candidates(record.question, chat, config);
  record.candidate_answers = candidate_list(generated, record.exact_answer,
                                            static_cast<std::size_t>(config.n_candidates));
  double sum = 0;
  std::size_t present = 0;
  for (auto& h : record.hints) {
    const auto j =
        judge_candidates(h.text, record.candidate_answers, record.exact_answer, chat, config);
    h.candidate_verdicts = j.cand_valid;
    h.hicos = j.score;
    if (j.score) {
      sum += *j.score;
      ++present;
    }
  }
  record.convergence = present ? std::optional<double>(sum / static_cast<double>(present))
                               : std::nullopt;
}

}  // namespace thg::convergence
