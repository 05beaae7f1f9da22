#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ecodec/corpus.hpp"

namespace ecodec {

// Interpolated absolute-discounting n-gram language model with backoff to the
// uniform distribution over the vocabulary. Immutable after training.
class NGramLM {
public:
  struct ContextStats {
    int64_t total = 0;
    std::vector<std::pair<TokenId, int64_t>> continuations;  // sorted by token id
  };
  using Level = std::unordered_map<std::string, ContextStats>;

  NGramLM() = default;
  NGramLM(int order, double discount, int32_t vocab_size, std::vector<Level> levels);

  int order() const { return order_; }
  double discount() const { return discount_; }
  int32_t vocab_size() const { return vocab_size_; }
  const std::vector<Level>& levels() const { return levels_; }

  // Dense next-token distribution given a (possibly long) context; the
  // context is truncated to the last order-1 tokens. Every entry is > 0 and
  // the vector sums to 1 within 1e-9.
  std::vector<double> next_distribution(std::span<const TokenId> context) const;

  double prob(TokenId token, std::span<const TokenId> context) const;

  static std::string context_key(std::span<const TokenId> context);

private:
  int order_ = 0;
  double discount_ = 0.0;
  int32_t vocab_size_ = 0;
  std::vector<Level> levels_;  // levels_[m]: contexts of length m
};

NGramLM train_ngram_lm(const std::vector<TokenSeq>& sequences, int order, double discount,
                       int32_t vocab_size);

// exp of the mean negative natural-log probability.
double perplexity_from_log_probs(std::span<const double> log_probs);
double perplexity(const NGramLM& lm, std::span<const TokenId> sequence);

}  // namespace ecodec
