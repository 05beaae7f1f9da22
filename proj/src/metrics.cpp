#include "ecodec/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "ecodec/util.hpp"

namespace ecodec {

double rouge1_f1(std::span<const TokenId> hyp, std::span<const TokenId> ref) {
  if (ref.empty()) throw std::invalid_argument("rouge reference is empty");
  if (hyp.empty()) return 0.0;
  std::map<TokenId, int64_t> hyp_counts, ref_counts;
  for (TokenId t : hyp) ++hyp_counts[t];
  for (TokenId t : ref) ++ref_counts[t];
  int64_t overlap = 0;
  for (const auto& [tok, c] : hyp_counts) {
    auto it = ref_counts.find(tok);
    if (it != ref_counts.end()) overlap += std::min(c, it->second);
  }
  return 2.0 * static_cast<double>(overlap) /
         static_cast<double>(hyp.size() + ref.size());
}

double rouge_l_f1(std::span<const TokenId> hyp, std::span<const TokenId> ref) {
  if (ref.empty()) throw std::invalid_argument("rouge reference is empty");
  if (hyp.empty()) return 0.0;
  const size_t n = hyp.size(), m = ref.size();
  std::vector<int64_t> prev(m + 1, 0), cur(m + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      if (hyp[i - 1] == ref[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return 2.0 * static_cast<double>(prev[m]) / static_cast<double>(n + m);
}

double distinct_n(const std::vector<TokenSeq>& responses, int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (responses.empty()) throw std::invalid_argument("no responses");
  std::unordered_set<std::string> unique;
  int64_t total = 0;
  for (const auto& resp : responses) {
    if (resp.size() < static_cast<size_t>(n)) continue;
    for (size_t i = 0; i + static_cast<size_t>(n) <= resp.size(); ++i) {
      std::string key;
      for (size_t j = 0; j < static_cast<size_t>(n); ++j) {
        key += std::to_string(resp[i + j]);
        key.push_back(' ');
      }
      unique.insert(std::move(key));
      ++total;
    }
  }
  if (total == 0)
    throw std::invalid_argument("all responses are shorter than n=" + std::to_string(n));
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

double distinct_n_per_response(const std::vector<TokenSeq>& responses, int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (responses.empty()) throw std::invalid_argument("no responses");
  double sum = 0.0;
  int64_t counted = 0;
  for (const auto& resp : responses) {
    if (resp.size() < static_cast<size_t>(n)) continue;
    sum += distinct_n({resp}, n);
    ++counted;
  }
  if (counted == 0)
    throw std::invalid_argument("all responses are shorter than n=" + std::to_string(n));
  return sum / static_cast<double>(counted);
}

std::string classify_response(const PrefixClassifier& evaluator,
                              const std::vector<TokenSeq>& history,
                              std::span<const TokenId> response) {
  std::vector<double> post = state_posterior_all(begin_prefix(evaluator, history, response));
  size_t best = 0;
  for (size_t c = 1; c < post.size(); ++c)
    if (post[c] > post[best]) best = c;
  return evaluator.classes()[best];
}

double attribute_accuracy(const std::vector<TokenSeq>& responses,
                          const std::vector<std::vector<TokenSeq>>& histories,
                          const PrefixClassifier& evaluator,
                          const std::vector<std::string>& targets,
                          std::span<const uint64_t> controller_seeds) {
  if (responses.empty()) throw std::invalid_argument("empty response list");
  if (histories.size() != responses.size() || targets.size() != responses.size())
    throw std::invalid_argument("responses, histories and targets must align");
  for (uint64_t seed : controller_seeds)
    if (seed == evaluator.hash_seed())
      throw std::invalid_argument(
          "evaluator shares a hash seed with a controller classifier");
  for (const auto& t : targets) evaluator.class_index(t);

  int64_t hits = 0;
  for (size_t i = 0; i < responses.size(); ++i)
    if (classify_response(evaluator, histories[i], responses[i]) == targets[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(responses.size());
}

double attribute_accuracy(const std::vector<TokenSeq>& responses,
                          const std::vector<std::vector<TokenSeq>>& histories,
                          const PrefixClassifier& evaluator, const std::string& target_class,
                          std::span<const uint64_t> controller_seeds) {
  std::vector<std::string> targets(responses.size(), target_class);
  return attribute_accuracy(responses, histories, evaluator, targets, controller_seeds);
}

}  // namespace ecodec
