#include "ecodec/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ecodec {

TopKCandidates top_k_select(std::span<const double> dist, int k) {
  const auto v = static_cast<int>(dist.size());
  if (k < 2 || k > v)
    throw std::invalid_argument("k must be in [2, vocab size], got " + std::to_string(k));
  std::vector<TokenId> idx(dist.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](TokenId a, TokenId b) {
    if (dist[static_cast<size_t>(a)] != dist[static_cast<size_t>(b)])
      return dist[static_cast<size_t>(a)] > dist[static_cast<size_t>(b)];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), better);

  TopKCandidates out;
  out.entries.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    double p = dist[static_cast<size_t>(idx[static_cast<size_t>(i)])];
    if (!(p > 0.0))
      throw std::invalid_argument("top-k candidate has nonpositive probability");
    out.entries.push_back({idx[static_cast<size_t>(i)], p});
  }
  return out;
}

std::string to_string(StrengthKind kind) {
  switch (kind) {
    case StrengthKind::reciprocal: return "reciprocal";
    case StrengthKind::exponential: return "exponential";
    case StrengthKind::negative: return "negative";
  }
  throw std::logic_error("unreachable strength kind");
}

StrengthKind strength_kind_from_string(const std::string& name) {
  if (name == "reciprocal") return StrengthKind::reciprocal;
  if (name == "exponential") return StrengthKind::exponential;
  if (name == "negative") return StrengthKind::negative;
  throw std::invalid_argument("unknown strength function '" + name + "'");
}

double strength(double entropy, const StrengthFunction& fn) {
  if (!(entropy >= 0.0)) throw std::invalid_argument("entropy must be nonnegative");
  switch (fn.kind) {
    case StrengthKind::reciprocal:
      return 1.0 + 1.0 / (1.0 + entropy);
    case StrengthKind::exponential:
      return 1.0 + std::exp(-entropy);
    case StrengthKind::negative: {
      if (fn.vocab_size < 2)
        throw std::invalid_argument("negative strength needs a vocab size >= 2");
      const double log_v = std::log(static_cast<double>(fn.vocab_size));
      if (entropy > log_v + 1e-9)
        throw std::invalid_argument("entropy exceeds ln V for negative strength");
      return std::max(1.0, 1.0 + (log_v - entropy));
    }
  }
  throw std::logic_error("unreachable strength kind");
}

// Entropy of softmax(values / tau) via H = ln Z - S/Z with Z = sum(e_i),
// S = sum(e_i * x_i), x_i = v_i/tau - max. Identical in exact arithmetic to
// -sum(p ln p) but needs no per-element log; exp_out, when given, receives
// the unnormalized exponentials.
static double smoothed_entropy_core(std::span<const double> values, double tau,
                                    std::vector<double>* exp_out) {
  if (values.empty()) throw std::invalid_argument("cannot smooth an empty value list");
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");
  const double inv_tau = 1.0 / tau;
  double vmax = values[0];
  for (double v : values) vmax = std::max(vmax, v);
  const double m = vmax * inv_tau;
  double z = 0.0, s = 0.0;
  if (exp_out) {
    exp_out->resize(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
      double x = values[i] * inv_tau - m;
      double e = std::exp(x);
      z += e;
      s += e * x;
      (*exp_out)[i] = e;
    }
  } else {
    for (double v : values) {
      double x = v * inv_tau - m;
      double e = std::exp(x);
      z += e;
      s += e * x;
    }
  }
  double h = std::log(z) - s / z;
  return std::clamp(h, 0.0, std::log(static_cast<double>(values.size())));
}

double smoothed_entropy(std::span<const double> values, double tau) {
  return smoothed_entropy_core(values, tau, nullptr);
}

Smoothed smooth_and_entropy(std::span<const double> values, double tau) {
  Smoothed out;
  out.entropy = smoothed_entropy_core(values, tau, &out.probs);
  double z = 0.0;
  for (double e : out.probs) z += e;
  for (double& p : out.probs) p /= z;
  return out;
}

AttributeEntropyResult attribute_entropy(const TopKCandidates& candidates,
                                         const PrefixClassifier& clf,
                                         const std::vector<TokenSeq>& history,
                                         std::span<const TokenId> prefix,
                                         const std::string& cls, double tau_c,
                                         bool log_input) {
  if (candidates.entries.empty())
    throw std::invalid_argument("candidate set is empty");
  const size_t cls_idx = clf.class_index(cls);

  PrefixState base = begin_prefix(clf, history, prefix);
  AttributeEntropyResult out;
  out.probs.reserve(candidates.entries.size());
  for (const auto& entry : candidates.entries)
    out.probs.push_back(state_posterior_all(extend_prefix(base, entry.token))[cls_idx]);

  std::vector<double> values = out.probs;
  if (log_input)
    for (double& v : values) v = std::log(v);
  Smoothed sm = smooth_and_entropy(values, tau_c);
  out.entropy = {sm.entropy, tau_c, "attribute:" + cls};
  return out;
}

}  // namespace ecodec
