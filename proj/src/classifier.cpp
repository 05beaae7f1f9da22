#include "ecodec/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecodec/util.hpp"

namespace ecodec {

// Posteriors are kept strictly inside (0,1) so downstream log-space scoring
// never sees an exact 0 or 1.
static constexpr double kPosteriorFloor = 1e-15;

PrefixClassifier::PrefixClassifier(std::vector<std::string> classes, uint64_t hash_seed,
                                   int32_t num_buckets, std::vector<int64_t> class_instances,
                                   std::vector<std::vector<int64_t>> bucket_counts)
    : classes_(std::move(classes)),
      hash_seed_(hash_seed),
      num_buckets_(num_buckets),
      class_instances_(std::move(class_instances)),
      bucket_counts_(std::move(bucket_counts)) {
  if (classes_.empty()) throw std::invalid_argument("class set is empty");
  if (num_buckets_ < 2) throw std::invalid_argument("num_buckets must be >= 2");
  if (class_instances_.size() != classes_.size() || bucket_counts_.size() != classes_.size())
    throw std::invalid_argument("per-class tables must match the class set");

  int64_t total_instances = 0;
  for (int64_t n : class_instances_) total_instances += n;
  log_prior_.resize(classes_.size());
  log_lik_.resize(classes_.size());
  for (size_t c = 0; c < classes_.size(); ++c) {
    if (class_instances_[c] <= 0)
      throw std::invalid_argument("class '" + classes_[c] + "' has no training instances");
    log_prior_[c] = std::log(static_cast<double>(class_instances_[c]) /
                             static_cast<double>(total_instances));
    if (bucket_counts_[c].size() != static_cast<size_t>(num_buckets_))
      throw std::invalid_argument("bucket table has wrong width");
    int64_t total_tokens = 0;
    for (int64_t n : bucket_counts_[c]) total_tokens += n;
    log_lik_[c].resize(static_cast<size_t>(num_buckets_));
    const double denom = static_cast<double>(total_tokens + num_buckets_);
    for (size_t b = 0; b < log_lik_[c].size(); ++b)
      log_lik_[c][b] = std::log(static_cast<double>(bucket_counts_[c][b] + 1) / denom);
  }
}

size_t PrefixClassifier::class_index(const std::string& cls) const {
  auto it = std::lower_bound(classes_.begin(), classes_.end(), cls);
  if (it == classes_.end() || *it != cls)
    throw std::invalid_argument("unknown class '" + cls + "'");
  return static_cast<size_t>(it - classes_.begin());
}

uint32_t PrefixClassifier::bucket_of(TokenId token) const {
  uint64_t h = splitmix64(hash_seed_ ^ (static_cast<uint64_t>(static_cast<uint32_t>(token)) *
                                        0x9e3779b97f4a7c15ULL));
  return static_cast<uint32_t>(h % static_cast<uint64_t>(num_buckets_));
}

PrefixClassifier train_prefix_classifier(const std::vector<PrefixInstance>& instances,
                                         const std::vector<std::string>& class_set,
                                         uint64_t hash_seed, int32_t num_buckets) {
  std::vector<std::string> classes = class_set;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.empty()) throw std::invalid_argument("class set is empty");
  if (num_buckets < 2) throw std::invalid_argument("num_buckets must be >= 2");

  // Seed the tables through a probe classifier so bucket_of is shared.
  std::vector<int64_t> ones(classes.size(), 1);
  std::vector<std::vector<int64_t>> zeros(classes.size(),
                                          std::vector<int64_t>(num_buckets, 0));
  PrefixClassifier probe(classes, hash_seed, num_buckets, ones, zeros);

  std::vector<int64_t> class_instances(classes.size(), 0);
  std::vector<std::vector<int64_t>> bucket_counts(classes.size(),
                                                  std::vector<int64_t>(num_buckets, 0));
  for (const auto& inst : instances) {
    auto it = std::lower_bound(classes.begin(), classes.end(), inst.label);
    if (it == classes.end() || *it != inst.label)
      throw std::invalid_argument("instance label '" + inst.label + "' not in class set");
    size_t c = static_cast<size_t>(it - classes.begin());
    ++class_instances[c];
    auto add = [&](TokenId tok) { ++bucket_counts[c][probe.bucket_of(tok)]; };
    bool any_history = false;
    for (const auto& utt : inst.history) {
      any_history = any_history || !utt.empty();
      for (TokenId tok : utt) add(tok);
    }
    if (any_history) add(Vocabulary::kEos);  // history/prefix separator
    for (TokenId tok : inst.prefix) add(tok);
  }
  for (size_t c = 0; c < classes.size(); ++c)
    if (class_instances[c] == 0)
      throw std::invalid_argument("class '" + classes[c] + "' has no training instances");

  return PrefixClassifier(std::move(classes), hash_seed, num_buckets,
                          std::move(class_instances), std::move(bucket_counts));
}

PrefixState begin_prefix(const PrefixClassifier& clf, const std::vector<TokenSeq>& history,
                         std::span<const TokenId> prefix) {
  PrefixState state;
  state.clf = &clf;
  state.log_score.resize(clf.classes().size());
  for (size_t c = 0; c < state.log_score.size(); ++c) state.log_score[c] = clf.log_prior(c);
  auto add = [&](TokenId tok) {
    for (size_t c = 0; c < state.log_score.size(); ++c)
      state.log_score[c] += clf.log_likelihood(c, tok);
  };
  bool any_history = false;
  for (const auto& utt : history) {
    any_history = any_history || !utt.empty();
    for (TokenId tok : utt) add(tok);
  }
  if (any_history) add(Vocabulary::kEos);
  for (TokenId tok : prefix) add(tok);
  return state;
}

PrefixState extend_prefix(PrefixState state, TokenId token) {
  if (!state.clf) throw std::invalid_argument("uninitialized prefix state");
  for (size_t c = 0; c < state.log_score.size(); ++c)
    state.log_score[c] += state.clf->log_likelihood(c, token);
  return state;
}

std::vector<double> state_posterior_all(const PrefixState& state) {
  if (!state.clf) throw std::invalid_argument("uninitialized prefix state");
  const auto& ls = state.log_score;
  double m = ls[0];
  for (double v : ls) m = std::max(m, v);
  double z = 0.0;
  std::vector<double> post(ls.size());
  for (size_t c = 0; c < ls.size(); ++c) {
    post[c] = std::exp(ls[c] - m);
    z += post[c];
  }
  for (double& p : post) {
    p /= z;
    p = std::min(std::max(p, kPosteriorFloor), 1.0 - kPosteriorFloor);
  }
  return post;
}

double state_posterior(const PrefixState& state, const std::string& cls) {
  return state_posterior_all(state)[state.clf->class_index(cls)];
}

double classifier_prob(const PrefixClassifier& clf, const std::vector<TokenSeq>& history,
                       std::span<const TokenId> prefix, const std::string& cls) {
  return state_posterior(begin_prefix(clf, history, prefix), cls);
}

}  // namespace ecodec
