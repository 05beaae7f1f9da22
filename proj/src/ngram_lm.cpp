#include "ecodec/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ecodec {

NGramLM::NGramLM(int order, double discount, int32_t vocab_size, std::vector<Level> levels)
    : order_(order), discount_(discount), vocab_size_(vocab_size), levels_(std::move(levels)) {
  if (order_ < 1) throw std::invalid_argument("order must be >= 1");
  if (!(discount_ > 0.0 && discount_ < 1.0))
    throw std::invalid_argument("discount must be in (0,1)");
  if (vocab_size_ < 1) throw std::invalid_argument("vocab_size must be >= 1");
  if (static_cast<int>(levels_.size()) != order_)
    throw std::invalid_argument("levels size must equal order");
}

std::string NGramLM::context_key(std::span<const TokenId> context) {
  std::string key;
  key.reserve(context.size() * 4);
  for (TokenId id : context) {
    auto u = static_cast<uint32_t>(id);
    key.push_back(static_cast<char>(u & 0xff));
    key.push_back(static_cast<char>((u >> 8) & 0xff));
    key.push_back(static_cast<char>((u >> 16) & 0xff));
    key.push_back(static_cast<char>((u >> 24) & 0xff));
  }
  return key;
}

NGramLM train_ngram_lm(const std::vector<TokenSeq>& sequences, int order, double discount,
                       int32_t vocab_size) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (!(discount > 0.0 && discount < 1.0))
    throw std::invalid_argument("discount must be in (0,1)");

  // Counting maps: per level, context -> token -> count. Position 0 of each
  // sequence is the BOS anchor and is never counted as a predicted token.
  std::vector<std::unordered_map<std::string, std::map<TokenId, int64_t>>> counts(
      static_cast<size_t>(order));
  int64_t total_positions = 0;
  for (const auto& seq : sequences) {
    for (size_t i = 1; i < seq.size(); ++i) {
      ++total_positions;
      for (int m = 0; m <= std::min<int>(order - 1, static_cast<int>(i)); ++m) {
        std::span<const TokenId> ctx(seq.data() + i - static_cast<size_t>(m),
                                     static_cast<size_t>(m));
        ++counts[static_cast<size_t>(m)][NGramLM::context_key(ctx)][seq[i]];
      }
    }
  }
  if (total_positions == 0) throw std::invalid_argument("cannot train on an empty corpus");

  std::vector<NGramLM::Level> levels(static_cast<size_t>(order));
  for (size_t m = 0; m < counts.size(); ++m) {
    for (auto& [key, conts] : counts[m]) {
      NGramLM::ContextStats stats;
      stats.continuations.reserve(conts.size());
      for (const auto& [tok, c] : conts) {
        stats.continuations.emplace_back(tok, c);
        stats.total += c;
      }
      levels[m].emplace(key, std::move(stats));
    }
  }
  return NGramLM(order, discount, vocab_size, std::move(levels));
}

std::vector<double> NGramLM::next_distribution(std::span<const TokenId> context) const {
  const auto v = static_cast<size_t>(vocab_size_);
  std::vector<double> dist(v, 1.0 / static_cast<double>(vocab_size_));

  size_t use = std::min(context.size(), static_cast<size_t>(order_ - 1));
  std::span<const TokenId> tail = context.subspan(context.size() - use, use);

  for (size_t m = 0; m <= use; ++m) {
    std::span<const TokenId> ctx = tail.subspan(use - m, m);
    auto it = levels_[m].find(context_key(ctx));
    if (it == levels_[m].end() || it->second.total == 0) continue;  // pure backoff
    const auto& stats = it->second;
    const double total = static_cast<double>(stats.total);
    const double interp =
        discount_ * static_cast<double>(stats.continuations.size()) / total;
    for (double& p : dist) p *= interp;
    for (const auto& [tok, c] : stats.continuations)
      dist[static_cast<size_t>(tok)] +=
          std::max(static_cast<double>(c) - discount_, 0.0) / total;
  }
  return dist;
}

double NGramLM::prob(TokenId token, std::span<const TokenId> context) const {
  if (token < 0 || token >= vocab_size_) throw std::out_of_range("token id out of range");
  return next_distribution(context)[static_cast<size_t>(token)];
}

double perplexity_from_log_probs(std::span<const double> log_probs) {
  if (log_probs.empty()) throw std::invalid_argument("perplexity of an empty sequence");
  double sum = 0.0;
  for (double lp : log_probs) sum += lp;
  return std::exp(-sum / static_cast<double>(log_probs.size()));
}

double perplexity(const NGramLM& lm, std::span<const TokenId> sequence) {
  if (sequence.empty()) throw std::invalid_argument("perplexity of an empty sequence");
  std::vector<double> lps;
  lps.reserve(sequence.size());
  for (size_t i = 0; i < sequence.size(); ++i)
    lps.push_back(std::log(lm.prob(sequence[i], sequence.subspan(0, i))));
  return perplexity_from_log_probs(lps);
}

}  // namespace ecodec
