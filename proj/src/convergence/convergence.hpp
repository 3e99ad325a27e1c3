#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clients/service.hpp"
#include "model/record.hpp"

namespace thg::convergence {

inline constexpr const char* kDefaultCandidatePrompt =
    "Generate up to {N} candidate answers words for the question \"{QUESTION}\" in bullet "
    "points.";
inline constexpr const char* kDefaultJudgePrompt =
    "Does the hint \"{HINT}\" refer to \"{CANDIDATE}\"? Choose ONLY between \"Yes\" or \"No\".";

struct ConvergenceConfig {
  std::string candidate_prompt = kDefaultCandidatePrompt;
  std::string judge_prompt = kDefaultJudgePrompt;
  // How many candidates the generator is asked for; the scored list is the
  // first `n_candidates` of those, with the exact answer injected.
  int generate_max = 20;
  int n_candidates = 11;
};

// Bullet or numbered items, trimmed, deduplicated by normalized form, at most
// n_max. Raises Error(Generation) when nothing parses.
std::vector<std::string> parse_candidates(const std::string& reply, int n_max);

std::vector<std::string> generate_candidates(const std::string& question,
                                             clients::ServiceClient& chat,
                                             const ConvergenceConfig& config = {});

// The scored list of size <= n: the first n generated candidates when the
// answer is among them (its slot then carries the exact answer text),
// otherwise the first n-1 plus the answer at the end.
std::vector<std::string> candidate_list(const std::vector<std::string>& generated,
                                        const std::string& exact_answer, std::size_t n);

// Index of the exact answer inside a list built by candidate_list.
std::size_t answer_index(const std::vector<std::string>& candidates,
                         const std::string& exact_answer);

// Yes -> true, No -> false, decided by the first alphabetic token.
std::optional<bool> parse_verdict(const std::string& reply);

// One retry with sampling param attempt=2; still unparseable raises
// Error(Judgement).
bool judge(const std::string& hint, const std::string& candidate, clients::ServiceClient& chat,
           const ConvergenceConfig& config = {});

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fraction&) const = default;
};

// Convergence score as an exact rational: 0 when ea_valid is false, else
// (n - s + 1)/n where s counts the valid candidates.
Fraction hicos_exact(const std::vector<bool>& cand_valid, bool ea_valid);
double hicos(const std::vector<bool>& cand_valid, bool ea_valid);

struct ConvergenceJudgement {
  std::vector<std::string> candidates;
  std::vector<std::optional<bool>> cand_valid;  // null where judging failed
  std::optional<bool> ea_valid;
  std::size_t n_candidates = 0;
  std::optional<double> score;  // absent after any judging failure
};

// Judges a hint against an already built candidate list.
ConvergenceJudgement judge_candidates(const std::string& hint,
                                      const std::vector<std::string>& candidates,
                                      const std::string& exact_answer,
                                      clients::ServiceClient& chat,
                                      const ConvergenceConfig& config = {});

ConvergenceJudgement evaluate_hint_convergence(const std::string& question,
                                               const std::string& exact_answer,
                                               const std::string& hint,
                                               clients::ServiceClient& chat,
                                               const ConvergenceConfig& config = {});

// Fills candidate_answers, every hint's verdicts and hicos, and the record's
// mean convergence.
void score_record(model::QuestionRecord& record, clients::ServiceClient& chat,
                  const ConvergenceConfig& config = {});

}  // namespace thg::convergence
