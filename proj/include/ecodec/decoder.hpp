#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ecodec/classifier.hpp"
#include "ecodec/control.hpp"
#include "ecodec/corpus.hpp"
#include "ecodec/ngram_lm.hpp"

namespace ecodec {

enum class DecodeMode { static_weight, eco };

std::string to_string(DecodeMode mode);
DecodeMode decode_mode_from_string(const std::string& name);

struct AttributeTarget {
  std::string attribute;
  std::string cls;
};

struct DecodeConfig {
  DecodeMode mode = DecodeMode::eco;
  double lambda = 4.0;  // strength scale factor
  int k = 50;
  double tau_lm = 1.0;
  double tau_c = 1.0;
  StrengthKind strength_fn = StrengthKind::reciprocal;
  int max_len = 128;
  std::vector<AttributeTarget> targets;  // empty = uncontrolled greedy decode
  bool entropy_log_input = false;        // smooth ln(p) instead of p
  bool force_unit_strength = false;      // test hook: alpha == 1 in eco mode
};

struct CandidateTrace {
  TokenId token;
  double lm_prob;
  std::vector<double> attr_probs;  // one per target, same order as config.targets
  double log_score;
};

struct StepTrace {
  int step = 0;  // 1-based generation step
  double e_lm = 0.0;
  double alpha_lm = 1.0;
  std::vector<double> e_c;      // per target
  std::vector<double> alpha_c;  // per target
  std::vector<CandidateTrace> candidates;
  TokenId chosen = -1;
};

enum class Termination { eos, max_len };

struct DecodeTrace {
  std::vector<StepTrace> steps;
  TokenSeq response;  // chosen tokens, terminal EOS excluded
  Termination reason = Termination::max_len;
};

using ClassifierMap = std::map<std::string, PrefixClassifier>;

// score(t) = lm(t) * prod_j attr_j(t)^lambda, returned as natural-log scores.
std::vector<double> score_static(std::span<const double> lm_probs,
                                 const std::vector<std::vector<double>>& attr_probs,
                                 double lambda);

// score(t) = lm(t)^alpha_lm * prod_j attr_j(t)^(lambda * alpha_c_j), log domain.
std::vector<double> score_eco(std::span<const double> lm_probs, double alpha_lm,
                              const std::vector<std::vector<double>>& attr_probs,
                              std::span<const double> alpha_c, double lambda);

// One greedy step: LM distribution -> top-k -> (eco: entropies and strengths)
// -> scoring -> argmax with ascending-token-id tie break. EOS is appended as
// an extra candidate when it falls outside the top-k; entropies are computed
// over the true top-k only.
std::pair<TokenId, StepTrace> decode_step(const NGramLM& lm, const ClassifierMap& classifiers,
                                          const std::vector<TokenSeq>& history,
                                          std::span<const TokenId> prefix,
                                          const DecodeConfig& config);

DecodeTrace decode(const NGramLM& lm, const ClassifierMap& classifiers,
                   const std::vector<TokenSeq>& history, const DecodeConfig& config);

// Differential-testing oracle: evaluates the configured scoring formula over
// the candidate set by direct linear-space arithmetic, sharing only the raw
// probability sources with decode_step.
TokenId brute_force_step_oracle(const NGramLM& lm, const ClassifierMap& classifiers,
                                const std::vector<TokenSeq>& history,
                                std::span<const TokenId> prefix, const DecodeConfig& config);

// TSV export: one row per (step, candidate, target attribute); columns
// step e_lm alpha_lm attr_name e_c alpha_c token lm_prob attr_prob
// combined_log_score chosen.
void write_trace_tsv(const DecodeTrace& trace, const Vocabulary& vocab,
                     const std::vector<AttributeTarget>& targets, std::ostream& out);

}  // namespace ecodec
