#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecodec/classifier.hpp"
#include "ecodec/corpus.hpp"

namespace ecodec {

// Unigram-overlap F1 with clipped counts. ref must be non-empty; empty hyp
// scores 0.
double rouge1_f1(std::span<const TokenId> hyp, std::span<const TokenId> ref);

// Longest-common-subsequence F1.
double rouge_l_f1(std::span<const TokenId> hyp, std::span<const TokenId> ref);

// Corpus-level distinct-n: unique n-grams pooled over all responses divided
// by the total n-gram count. Errors when no response yields an n-gram.
double distinct_n(const std::vector<TokenSeq>& responses, int n);

// Mean of per-response distinct-n ratios (responses shorter than n skipped).
double distinct_n_per_response(const std::vector<TokenSeq>& responses, int n);

// Fraction of responses whose evaluator-argmax class equals the target.
// The evaluator must not share a hash seed with any controller classifier.
double attribute_accuracy(const std::vector<TokenSeq>& responses,
                          const std::vector<std::vector<TokenSeq>>& histories,
                          const PrefixClassifier& evaluator,
                          const std::vector<std::string>& targets,
                          std::span<const uint64_t> controller_seeds);
double attribute_accuracy(const std::vector<TokenSeq>& responses,
                          const std::vector<std::vector<TokenSeq>>& histories,
                          const PrefixClassifier& evaluator, const std::string& target_class,
                          std::span<const uint64_t> controller_seeds);

// Evaluator argmax with deterministic tie-breaking (first class in sorted
// class order).
std::string classify_response(const PrefixClassifier& evaluator,
                              const std::vector<TokenSeq>& history,
                              std::span<const TokenId> response);

}  // namespace ecodec
