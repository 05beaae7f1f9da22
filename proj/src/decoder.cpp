#include "ecodec/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ecodec/util.hpp"

namespace ecodec {

std::string to_string(DecodeMode mode) {
  return mode == DecodeMode::eco ? "eco" : "static";
}

DecodeMode decode_mode_from_string(const std::string& name) {
  if (name == "static") return DecodeMode::static_weight;
  if (name == "eco") return DecodeMode::eco;
  throw std::invalid_argument("unknown decode mode '" + name + "'");
}

static void check_probs(std::span<const double> lm_probs,
                        const std::vector<std::vector<double>>& attr_probs) {
  if (lm_probs.empty()) throw std::invalid_argument("empty candidate set");
  for (double p : lm_probs)
    if (!(p > 0.0)) throw std::invalid_argument("nonpositive LM probability");
  for (const auto& probs : attr_probs) {
    if (probs.size() != lm_probs.size())
      throw std::invalid_argument("attribute probability list has wrong length");
    for (double p : probs)
      if (!(p > 0.0)) throw std::invalid_argument("nonpositive attribute probability");
  }
}

std::vector<double> score_static(std::span<const double> lm_probs,
                                 const std::vector<std::vector<double>>& attr_probs,
                                 double lambda) {
  check_probs(lm_probs, attr_probs);
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  std::vector<double> scores(lm_probs.size());
  for (size_t i = 0; i < lm_probs.size(); ++i) {
    double s = std::log(lm_probs[i]);
    for (const auto& probs : attr_probs) s += lambda * std::log(probs[i]);
    scores[i] = s;
  }
  return scores;
}

std::vector<double> score_eco(std::span<const double> lm_probs, double alpha_lm,
                              const std::vector<std::vector<double>>& attr_probs,
                              std::span<const double> alpha_c, double lambda) {
  check_probs(lm_probs, attr_probs);
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (!(alpha_lm >= 1.0)) throw std::invalid_argument("alpha_lm must be >= 1");
  if (alpha_c.size() != attr_probs.size())
    throw std::invalid_argument("one alpha per attribute required");
  for (double a : alpha_c)
    if (!(a >= 1.0)) throw std::invalid_argument("alpha_c must be >= 1");

  std::vector<double> scores(lm_probs.size());
  for (size_t i = 0; i < lm_probs.size(); ++i) {
    double s = alpha_lm * std::log(lm_probs[i]);
    for (size_t a = 0; a < attr_probs.size(); ++a)
      s += (lambda * alpha_c[a]) * std::log(attr_probs[a][i]);
    scores[i] = s;
  }
  return scores;
}

static void validate_config(const DecodeConfig& config, const ClassifierMap& classifiers) {
  if (config.max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (!(config.lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (config.k < 2) throw std::invalid_argument("k must be >= 2");
  if (!(config.tau_lm > 0.0) || !(config.tau_c > 0.0))
    throw std::invalid_argument("temperatures must be positive");
  std::vector<std::string> names;
  for (const auto& target : config.targets) {
    names.push_back(target.attribute);
    auto it = classifiers.find(target.attribute);
    if (it == classifiers.end())
      throw std::invalid_argument("no classifier for attribute '" + target.attribute + "'");
    it->second.class_index(target.cls);  // throws on unknown class
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw std::invalid_argument("target attribute names must be distinct");
}

std::pair<TokenId, StepTrace> decode_step(const NGramLM& lm, const ClassifierMap& classifiers,
                                          const std::vector<TokenSeq>& history,
                                          std::span<const TokenId> prefix,
                                          const DecodeConfig& config) {
  validate_config(config, classifiers);

  TokenSeq context = lm_context(history);
  context.insert(context.end(), prefix.begin(), prefix.end());
  std::vector<double> dist = lm.next_distribution(context);

  TopKCandidates cands = top_k_select(dist, config.k);
  const size_t k = cands.entries.size();
  bool has_eos = false;
  for (const auto& e : cands.entries) has_eos = has_eos || e.token == Vocabulary::kEos;
  if (!has_eos)
    cands.entries.push_back(
        {Vocabulary::kEos, dist[static_cast<size_t>(Vocabulary::kEos)]});

  std::vector<double> lm_probs(cands.entries.size());
  for (size_t i = 0; i < cands.entries.size(); ++i) lm_probs[i] = cands.entries[i].lm_prob;

  StepTrace trace;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  trace.e_lm = nan;
  trace.alpha_lm = 1.0;

  // Per-target posteriors over every scored candidate (appended EOS included).
  // Entropies are only taken over the true top-k and only in eco mode, so
  // static decoding never pays for smoothing.
  std::vector<std::vector<double>> attr_probs;
  const bool eco = config.mode == DecodeMode::eco;
  for (const auto& target : config.targets) {
    const PrefixClassifier& clf = classifiers.at(target.attribute);
    const size_t cls_idx = clf.class_index(target.cls);
    PrefixState base = begin_prefix(clf, history, prefix);
    std::vector<double> probs;
    probs.reserve(cands.entries.size());
    for (const auto& entry : cands.entries)
      probs.push_back(state_posterior_all(extend_prefix(base, entry.token))[cls_idx]);
    if (eco) {
      double e;
      if (config.entropy_log_input) {
        std::vector<double> values(probs.begin(), probs.begin() + k);
        for (double& x : values) x = std::log(x);
        e = smoothed_entropy(values, config.tau_c);
      } else {
        e = smoothed_entropy(std::span<const double>(probs).first(k), config.tau_c);
      }
      double alpha = config.force_unit_strength
                         ? 1.0
                         : strength(e, {config.strength_fn, lm.vocab_size()});
      trace.e_c.push_back(e);
      trace.alpha_c.push_back(alpha);
    } else {
      trace.e_c.push_back(nan);
      trace.alpha_c.push_back(1.0);
    }
    attr_probs.push_back(std::move(probs));
  }

  std::vector<double> scores;
  if (eco) {
    if (config.entropy_log_input) {
      std::vector<double> lm_values(lm_probs.begin(), lm_probs.begin() + k);
      for (double& v : lm_values) v = std::log(v);
      trace.e_lm = smoothed_entropy(lm_values, config.tau_lm);
    } else {
      trace.e_lm = smoothed_entropy(std::span<const double>(lm_probs).first(k),
                                    config.tau_lm);
    }
    trace.alpha_lm = config.force_unit_strength
                         ? 1.0
                         : strength(trace.e_lm, {config.strength_fn, lm.vocab_size()});
    scores = score_eco(lm_probs, trace.alpha_lm, attr_probs, trace.alpha_c, config.lambda);
  } else {
    scores = score_static(lm_probs, attr_probs, config.lambda);
  }

  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && cands.entries[i].token < cands.entries[best].token))
      best = i;
  }

  trace.candidates.resize(cands.entries.size());
  for (size_t i = 0; i < cands.entries.size(); ++i) {
    auto& c = trace.candidates[i];
    c.token = cands.entries[i].token;
    c.lm_prob = cands.entries[i].lm_prob;
    for (const auto& probs : attr_probs) c.attr_probs.push_back(probs[i]);
    c.log_score = scores[i];
  }
  trace.chosen = cands.entries[best].token;
  return {trace.chosen, std::move(trace)};
}

DecodeTrace decode(const NGramLM& lm, const ClassifierMap& classifiers,
                   const std::vector<TokenSeq>& history, const DecodeConfig& config) {
  validate_config(config, classifiers);
  DecodeTrace trace;
  trace.reason = Termination::max_len;
  TokenSeq prefix;
  for (int step = 1; step <= config.max_len; ++step) {
    auto [token, st] = decode_step(lm, classifiers, history, prefix, config);
    st.step = step;
    trace.steps.push_back(std::move(st));
    if (token == Vocabulary::kEos) {
      trace.reason = Termination::eos;
      break;
    }
    prefix.push_back(token);
  }
  trace.response = std::move(prefix);
  return trace;
}

// --- brute-force oracle ------------------------------------------------
// Everything below recomputes the scoring pipeline with plain loops and
// linear-space powers; none of the scoring helpers above are reused.

static double oracle_entropy(const std::vector<double>& values, double tau) {
  double m = values[0] / tau;
  for (double v : values) m = std::max(m, v / tau);
  double z = 0.0;
  std::vector<double> e(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    e[i] = std::exp(values[i] / tau - m);
    z += e[i];
  }
  double h = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    double p = e[i] / z;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

static double oracle_strength(double entropy, StrengthKind kind, int32_t vocab_size) {
  if (kind == StrengthKind::reciprocal) return 1.0 + 1.0 / (1.0 + entropy);
  if (kind == StrengthKind::exponential) return 1.0 + std::exp(-entropy);
  double a = 1.0 + (std::log(static_cast<double>(vocab_size)) - entropy);
  return a < 1.0 ? 1.0 : a;
}

TokenId brute_force_step_oracle(const NGramLM& lm, const ClassifierMap& classifiers,
                                const std::vector<TokenSeq>& history,
                                std::span<const TokenId> prefix, const DecodeConfig& config) {
  validate_config(config, classifiers);
  TokenSeq context = lm_context(history);
  context.insert(context.end(), prefix.begin(), prefix.end());
  std::vector<double> dist = lm.next_distribution(context);
  const auto v = static_cast<TokenId>(dist.size());

  // Candidate set: all tokens sorted by (probability desc, id asc), first k,
  // plus EOS if it did not make the cut.
  std::vector<TokenId> order(dist.size());
  for (TokenId t = 0; t < v; ++t) order[static_cast<size_t>(t)] = t;
  std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
    double pa = dist[static_cast<size_t>(a)], pb = dist[static_cast<size_t>(b)];
    if (pa != pb) return pa > pb;
    return a < b;
  });
  if (config.k > v) throw std::invalid_argument("k exceeds vocab size");
  std::vector<TokenId> cand(order.begin(), order.begin() + config.k);
  if (std::find(cand.begin(), cand.end(), Vocabulary::kEos) == cand.end())
    cand.push_back(Vocabulary::kEos);
  const size_t k = static_cast<size_t>(config.k);

  std::vector<std::vector<double>> attr(config.targets.size());
  for (size_t a = 0; a < config.targets.size(); ++a) {
    const auto& target = config.targets[a];
    const PrefixClassifier& clf = classifiers.at(target.attribute);
    for (TokenId t : cand) {
      TokenSeq extended(prefix.begin(), prefix.end());
      extended.push_back(t);
      attr[a].push_back(classifier_prob(clf, history, extended, target.cls));
    }
  }

  double alpha_lm = 1.0;
  std::vector<double> alpha_c(config.targets.size(), 1.0);
  if (config.mode == DecodeMode::eco && !config.force_unit_strength) {
    std::vector<double> lm_values;
    for (size_t i = 0; i < k; ++i) {
      double p = dist[static_cast<size_t>(cand[i])];
      lm_values.push_back(config.entropy_log_input ? std::log(p) : p);
    }
    alpha_lm = oracle_strength(oracle_entropy(lm_values, config.tau_lm), config.strength_fn,
                               lm.vocab_size());
    for (size_t a = 0; a < config.targets.size(); ++a) {
      std::vector<double> values(attr[a].begin(), attr[a].begin() + k);
      if (config.entropy_log_input)
        for (double& x : values) x = std::log(x);
      alpha_c[a] = oracle_strength(oracle_entropy(values, config.tau_c), config.strength_fn,
                                   lm.vocab_size());
    }
  }

  TokenId best = cand[0];
  double best_score = -1.0;
  for (size_t i = 0; i < cand.size(); ++i) {
    double s = std::pow(dist[static_cast<size_t>(cand[i])], alpha_lm);
    for (size_t a = 0; a < config.targets.size(); ++a)
      s *= std::pow(attr[a][i], config.lambda * alpha_c[a]);
    if (s > best_score || (s == best_score && cand[i] < best)) {
      best = cand[i];
      best_score = s;
    }
  }
  return best;
}

void write_trace_tsv(const DecodeTrace& trace, const Vocabulary& vocab,
                     const std::vector<AttributeTarget>& targets, std::ostream& out) {
  out << "step\te_lm\talpha_lm\tattr_name\te_c\talpha_c\ttoken\tlm_prob\tattr_prob"
      << "\tcombined_log_score\tchosen\n";
  for (const auto& st : trace.steps) {
    for (const auto& c : st.candidates) {
      size_t n_attr = targets.empty() ? 1 : targets.size();
      for (size_t a = 0; a < n_attr; ++a) {
        out << st.step << '\t' << fmt_double(st.e_lm) << '\t' << fmt_double(st.alpha_lm)
            << '\t' << (targets.empty() ? "-" : targets[a].attribute) << '\t'
            << (targets.empty() ? "nan" : fmt_double(st.e_c[a])) << '\t'
            << (targets.empty() ? "1" : fmt_double(st.alpha_c[a])) << '\t'
            << vocab.string_of(c.token) << '\t' << fmt_double(c.lm_prob) << '\t'
            << (targets.empty() ? "nan" : fmt_double(c.attr_probs[a])) << '\t'
            << fmt_double(c.log_score) << '\t' << (c.token == st.chosen ? 1 : 0) << '\n';
      }
    }
  }
}

}  // namespace ecodec
