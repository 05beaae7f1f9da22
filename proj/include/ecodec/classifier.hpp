#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecodec/corpus.hpp"

namespace ecodec {

// Multinomial naive Bayes over hashed bag-of-tokens features of
// (history || separator || prefix), add-one smoothed. Serves as the prefix
// attribute model: posteriors are defined for every partial response.
// Immutable after training.
class PrefixClassifier {
public:
  PrefixClassifier() = default;
  PrefixClassifier(std::vector<std::string> classes, uint64_t hash_seed, int32_t num_buckets,
                   std::vector<int64_t> class_instances,
                   std::vector<std::vector<int64_t>> bucket_counts);

  const std::vector<std::string>& classes() const { return classes_; }
  uint64_t hash_seed() const { return hash_seed_; }
  int32_t num_buckets() const { return num_buckets_; }
  const std::vector<int64_t>& class_instances() const { return class_instances_; }
  const std::vector<std::vector<int64_t>>& bucket_counts() const { return bucket_counts_; }

  size_t class_index(const std::string& cls) const;  // throws on unknown class
  uint32_t bucket_of(TokenId token) const;
  double log_prior(size_t cls) const { return log_prior_[cls]; }
  double log_likelihood(size_t cls, TokenId token) const {
    return log_lik_[cls][bucket_of(token)];
  }

private:
  std::vector<std::string> classes_;  // sorted, unique
  uint64_t hash_seed_ = 0;
  int32_t num_buckets_ = 0;
  std::vector<int64_t> class_instances_;
  std::vector<std::vector<int64_t>> bucket_counts_;  // class x bucket
  std::vector<double> log_prior_;
  std::vector<std::vector<double>> log_lik_;  // class x bucket, add-one smoothed
};

PrefixClassifier train_prefix_classifier(const std::vector<PrefixInstance>& instances,
                                         const std::vector<std::string>& class_set,
                                         uint64_t hash_seed, int32_t num_buckets = 4096);

// Accumulated unnormalized per-class log scores for one (history, prefix).
// Extending by a token is O(#classes); posteriors match the from-scratch
// computation exactly because the summation order is identical.
struct PrefixState {
  const PrefixClassifier* clf = nullptr;
  std::vector<double> log_score;
};

PrefixState begin_prefix(const PrefixClassifier& clf, const std::vector<TokenSeq>& history,
                         std::span<const TokenId> prefix);
PrefixState extend_prefix(PrefixState state, TokenId token);
std::vector<double> state_posterior_all(const PrefixState& state);
double state_posterior(const PrefixState& state, const std::string& cls);

double classifier_prob(const PrefixClassifier& clf, const std::vector<TokenSeq>& history,
                       std::span<const TokenId> prefix, const std::string& cls);

}  // namespace ecodec
