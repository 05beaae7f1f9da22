#pragma once

#include <span>
#include <string>
#include <vector>

#include "ecodec/classifier.hpp"
#include "ecodec/corpus.hpp"

namespace ecodec {

// The k highest-probability tokens at one step, descending by probability,
// ties broken by ascending token id.
struct TopKCandidates {
  struct Entry {
    TokenId token;
    double lm_prob;
  };
  std::vector<Entry> entries;
  int step = 0;
};

TopKCandidates top_k_select(std::span<const double> dist, int k);

enum class StrengthKind { reciprocal, exponential, negative };

std::string to_string(StrengthKind kind);
StrengthKind strength_kind_from_string(const std::string& name);

struct StrengthFunction {
  StrengthKind kind = StrengthKind::reciprocal;
  int32_t vocab_size = 0;  // used by `negative` only
};

// reciprocal: 1 + 1/(1+e); exponential: 1 + exp(-e); negative: 1 + (ln V - e).
double strength(double entropy, const StrengthFunction& fn);

struct Smoothed {
  std::vector<double> probs;  // softmax(values / tau)
  double entropy = 0.0;       // Shannon entropy, nats, clamped to [0, ln k]
};

Smoothed smooth_and_entropy(std::span<const double> values, double tau);

// Allocation-free variant returning only the entropy; same value as
// smooth_and_entropy(values, tau).entropy.
double smoothed_entropy(std::span<const double> values, double tau);

struct EntropyReading {
  double value = 0.0;
  double tau = 1.0;
  std::string source;  // "lm" or "attribute:<name>"
};

struct AttributeEntropyResult {
  std::vector<double> probs;  // per-candidate attribute posteriors P'_c
  EntropyReading entropy;
};

// Posterior of `cls` for each candidate extension of (history, prefix), plus
// the entropy of the temperature-smoothed distribution over those posteriors.
// With log_input the smoothing operates on ln(posterior) instead.
AttributeEntropyResult attribute_entropy(const TopKCandidates& candidates,
                                         const PrefixClassifier& clf,
                                         const std::vector<TokenSeq>& history,
                                         std::span<const TokenId> prefix,
                                         const std::string& cls, double tau_c,
                                         bool log_input = false);

}  // namespace ecodec
