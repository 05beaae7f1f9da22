#include <cmath>

#include "doctest.h"
#include "ecodec/decoder.hpp"
#include "testutil.hpp"

using namespace ecodec;

TEST_SUITE_BEGIN("decoder");

namespace {

// Hand-built ten-token world (3 specials + a..g) for oracle testing.
struct TinyWorld {
  Vocabulary vocab = testutil::vocab_of({"a", "b", "c", "d", "e", "f", "g"});
  NGramLM lm;
  ClassifierMap classifiers;

  TinyWorld() {
    std::vector<std::string> lines{"a b c",   "a b d", "b c a", "c d e", "e f g",
                                   "a c e g", "f f a", "d b",   "g a b c d"};
    std::vector<TokenSeq> seqs;
    for (const auto& line : lines) {
      TokenSeq seq{Vocabulary::kBos};
      for (TokenId id : tokenize(line, vocab)) seq.push_back(id);
      seq.push_back(Vocabulary::kEos);
      seqs.push_back(std::move(seq));
    }
    lm = train_ngram_lm(seqs, 3, 0.75, vocab.size());

    std::vector<PrefixInstance> instances;
    std::mt19937_64 rng(17);
    for (int i = 0; i < 60; ++i) {
      PrefixInstance inst;
      size_t len = 1 + rng() % 4;
      for (size_t j = 0; j < len; ++j)
        inst.prefix.push_back(static_cast<TokenId>(3 + rng() % 7));
      bool heavy_low = false;
      for (TokenId t : inst.prefix) heavy_low = heavy_low || t <= 5;
      inst.label = (heavy_low && rng() % 4 != 0) ? "x" : "y";
      instances.push_back(std::move(inst));
    }
    classifiers.emplace("tone", train_prefix_classifier(instances, {"x", "y"}, 29, 128));
  }
};

const TinyWorld& tiny() {
  static const TinyWorld world;
  return world;
}

std::vector<TokenSeq> random_history(std::mt19937_64& rng, const Vocabulary& vocab) {
  std::vector<TokenSeq> history;
  size_t utts = rng() % 3;
  for (size_t u = 0; u < utts; ++u) {
    TokenSeq utt;
    size_t len = 1 + rng() % 4;
    for (size_t i = 0; i < len; ++i)
      utt.push_back(static_cast<TokenId>(3 + rng() % (vocab.size() - 3)));
    history.push_back(std::move(utt));
  }
  return history;
}

TokenSeq random_prefix(std::mt19937_64& rng, const Vocabulary& vocab) {
  TokenSeq prefix;
  size_t len = rng() % 5;
  for (size_t i = 0; i < len; ++i)
    prefix.push_back(static_cast<TokenId>(3 + rng() % (vocab.size() - 3)));
  return prefix;
}

}  // namespace

TEST_CASE("score_static with lambda zero reduces to the LM log probabilities") {
  std::vector<double> lm{0.5, 0.3, 0.2};
  std::vector<std::vector<double>> attr{{0.1, 0.8, 0.1}};
  auto scores = score_static(lm, attr, 0.0);
  for (size_t i = 0; i < lm.size(); ++i) CHECK(scores[i] == std::log(lm[i]));
}

TEST_CASE("score_static matches the hand-enumerated three-way products") {
  std::vector<double> lm{0.7, 0.2, 0.1};
  std::vector<std::vector<double>> attr{{0.1, 0.9, 0.5}};
  auto scores = score_static(lm, attr, 1.0);
  const double expect[3] = {0.07, 0.18, 0.05};
  size_t best = 0;
  for (size_t i = 0; i < 3; ++i) {
    CHECK(std::exp(scores[i]) == doctest::Approx(expect[i]).epsilon(1e-12));
    if (scores[i] > scores[best]) best = i;
  }
  CHECK(best == 1);
}

TEST_CASE("a constant attribute factor never changes the LM argmax") {
  std::vector<double> lm{0.5, 0.3, 0.2};
  std::vector<std::vector<double>> attr{{0.4, 0.4, 0.4}};
  for (double lambda : {0.0, 1.0, 5.0, 100.0}) {
    auto scores = score_static(lm, attr, lambda);
    CHECK(scores[0] > scores[1]);
    CHECK(scores[1] > scores[2]);
  }
  CHECK_THROWS_AS(score_static(std::vector<double>{0.5, 0.0},
                               {std::vector<double>{0.5, 0.5}}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("score_eco with unit strengths is exactly score_static") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 2 + rng() % 8;
    size_t attrs = 1 + rng() % 3;
    std::vector<double> lm(n);
    for (double& p : lm) p = 1e-4 + testutil::unit_interval(rng);
    std::vector<std::vector<double>> attr(attrs, std::vector<double>(n));
    for (auto& row : attr)
      for (double& p : row) p = 1e-4 + testutil::unit_interval(rng);
    double lambda = 8.0 * testutil::unit_interval(rng);

    auto s_static = score_static(lm, attr, lambda);
    std::vector<double> ones(attrs, 1.0);
    auto s_eco = score_eco(lm, 1.0, attr, ones, lambda);
    for (size_t i = 0; i < n; ++i)
      CHECK(std::abs(s_eco[i] - s_static[i]) <= 1e-12 * std::abs(s_static[i]));
  }
}

TEST_CASE("score_eco with lambda zero keeps the LM ranking") {
  std::vector<double> lm{0.6, 0.3, 0.1};
  std::vector<std::vector<double>> attr{{0.01, 0.5, 0.99}};
  std::vector<double> alphas{1.8};
  auto scores = score_eco(lm, 1.7, attr, alphas, 0.0);
  CHECK(scores[0] > scores[1]);
  CHECK(scores[1] > scores[2]);
  CHECK_THROWS_AS(score_eco(lm, 0.9, attr, alphas, 1.0), std::invalid_argument);
}

TEST_CASE("score_eco 1.5-power case agrees with direct enumeration") {
  std::vector<double> lm{0.7, 0.2, 0.1};
  std::vector<std::vector<double>> attr{{0.1, 0.9, 0.5}};
  std::vector<double> alphas{1.5};
  auto scores = score_eco(lm, 1.5, attr, alphas, 1.0);
  size_t best = 0;
  size_t oracle_best = 0;
  double oracle_score = -1.0;
  for (size_t i = 0; i < 3; ++i) {
    if (scores[i] > scores[best]) best = i;
    double s = std::pow(lm[i], 1.5) * std::pow(attr[0][i], 1.5);
    CHECK(std::exp(scores[i]) == doctest::Approx(s).epsilon(1e-12));
    if (s > oracle_score) {
      oracle_score = s;
      oracle_best = i;
    }
  }
  CHECK(best == oracle_best);
}

TEST_CASE("degenerate distributions drive both strengths to exactly 2") {
  auto vocab = testutil::vocab_of({"a", "b"});
  std::vector<TokenSeq> seqs;
  for (int i = 0; i < 50; ++i)
    seqs.push_back(TokenSeq{Vocabulary::kBos, vocab.id_of("a"), vocab.id_of("a"),
                            vocab.id_of("a"), Vocabulary::kEos});
  auto lm = train_ngram_lm(seqs, 2, 0.75, vocab.size());

  // Class y owns both "b" and the EOS token so the two candidates at the
  // probed step ("a" and EOS) sit at opposite posterior extremes; with the
  // tiny temperatures below, both smoothed distributions underflow to exact
  // one-hot vectors and the entropies are exactly zero.
  std::vector<PrefixInstance> instances;
  for (int i = 0; i < 50; ++i) {
    PrefixInstance xa;
    xa.prefix = {vocab.id_of("a")};
    xa.label = "x";
    instances.push_back(xa);
    PrefixInstance yb;
    yb.prefix = {vocab.id_of("b"), Vocabulary::kEos};
    yb.label = "y";
    instances.push_back(yb);
  }
  ClassifierMap clfs;
  clfs.emplace("tone", train_prefix_classifier(instances, {"x", "y"}, 31, 64));

  DecodeConfig config;
  config.mode = DecodeMode::eco;
  config.k = 2;
  config.tau_lm = 1e-4;
  config.tau_c = 1e-4;
  config.lambda = 1.0;
  config.targets = {{"tone", "x"}};
  auto [token, trace] = decode_step(lm, clfs, {}, TokenSeq{vocab.id_of("a")}, config);
  CHECK(trace.e_lm == 0.0);
  CHECK(trace.alpha_lm == 2.0);
  REQUIRE(trace.e_c.size() == 1);
  CHECK(trace.e_c[0] == 0.0);
  CHECK(trace.alpha_c[0] == 2.0);
  CHECK(token == brute_force_step_oracle(lm, clfs, {}, TokenSeq{vocab.id_of("a")}, config));
}

TEST_CASE("static mode equals eco mode with strengths forced to one") {
  const auto& world = tiny();
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    auto history = random_history(rng, world.vocab);
    auto prefix = random_prefix(rng, world.vocab);

    DecodeConfig st;
    st.mode = DecodeMode::static_weight;
    st.k = 6;
    st.lambda = 0.5 + 4.0 * testutil::unit_interval(rng);
    st.targets = {{"tone", rng() % 2 ? "x" : "y"}};
    DecodeConfig eco = st;
    eco.mode = DecodeMode::eco;
    eco.force_unit_strength = true;

    auto [tok_static, trace_static] = decode_step(world.lm, world.classifiers, history,
                                                  prefix, st);
    auto [tok_eco, trace_eco] = decode_step(world.lm, world.classifiers, history, prefix,
                                            eco);
    CHECK(tok_static == tok_eco);
    REQUIRE(trace_static.candidates.size() == trace_eco.candidates.size());
    for (size_t i = 0; i < trace_static.candidates.size(); ++i) {
      double a = trace_static.candidates[i].log_score;
      double b = trace_eco.candidates[i].log_score;
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("brute-force oracle agrees with decode_step at k = V") {
  const auto& world = tiny();
  std::mt19937_64 rng(61);
  const StrengthKind kinds[] = {StrengthKind::reciprocal, StrengthKind::exponential,
                                StrengthKind::negative};
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto history = random_history(rng, world.vocab);
    auto prefix = random_prefix(rng, world.vocab);
    DecodeConfig config;
    config.mode = rng() % 2 ? DecodeMode::eco : DecodeMode::static_weight;
    config.k = world.vocab.size();
    config.lambda = 4.0 * testutil::unit_interval(rng);
    config.tau_lm = 0.1 + 2.0 * testutil::unit_interval(rng);
    config.tau_c = 0.1 + 2.0 * testutil::unit_interval(rng);
    config.strength_fn = kinds[rng() % 3];
    config.entropy_log_input = rng() % 4 == 0;
    config.targets = {{"tone", rng() % 2 ? "x" : "y"}};

    auto [token, trace] = decode_step(world.lm, world.classifiers, history, prefix, config);
    TokenId oracle = brute_force_step_oracle(world.lm, world.classifiers, history, prefix,
                                             config);
    CHECK(token == oracle);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("brute-force oracle agrees when restricted to a smaller top-k") {
  const auto& world = tiny();
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    auto history = random_history(rng, world.vocab);
    auto prefix = random_prefix(rng, world.vocab);
    DecodeConfig config;
    config.mode = DecodeMode::eco;
    config.k = 4;
    config.lambda = 3.0 * testutil::unit_interval(rng);
    config.tau_lm = 0.1;
    config.tau_c = 0.1;
    config.targets = {{"tone", "x"}};
    auto [token, trace] = decode_step(world.lm, world.classifiers, history, prefix, config);
    CHECK(token ==
          brute_force_step_oracle(world.lm, world.classifiers, history, prefix, config));
  }
}

TEST_CASE("lambda zero reproduces the uncontrolled greedy decode") {
  const auto& exp = testutil::toy_experiment();
  DecodeConfig base;
  base.k = 50;
  base.max_len = 32;

  for (size_t i = 0; i < 30; ++i) {
    const auto& ex = exp.test[i];
    DecodeConfig uncontrolled = base;
    auto plain = decode(exp.lm, exp.controllers, ex.history, uncontrolled);

    for (DecodeMode mode : {DecodeMode::static_weight, DecodeMode::eco}) {
      for (StrengthKind fn : {StrengthKind::reciprocal, StrengthKind::exponential,
                              StrengthKind::negative}) {
        DecodeConfig controlled = base;
        controlled.mode = mode;
        controlled.strength_fn = fn;
        controlled.lambda = 0.0;
        controlled.targets = {{"emotion", ex.attributes.at("emotion")}};
        auto out = decode(exp.lm, exp.controllers, ex.history, controlled);
        CHECK(out.response == plain.response);
        CHECK(out.reason == plain.reason);
      }
    }
  }
}

TEST_CASE("max_len one stops after a single step") {
  const auto& exp = testutil::toy_experiment();
  DecodeConfig config;
  config.max_len = 1;
  auto trace = decode(exp.lm, exp.controllers, exp.test[0].history, config);
  CHECK(trace.steps.size() == 1);
  CHECK(trace.reason == Termination::max_len);
  CHECK(trace.response.size() == 1);
}

TEST_CASE("a huge lambda always picks the candidate with maximal attribute probability") {
  const auto& exp = testutil::toy_experiment();
  DecodeConfig config;
  config.mode = DecodeMode::static_weight;
  config.lambda = 1e6;
  config.max_len = 24;
  config.targets = {{"emotion", "disgust"}};
  for (size_t i = 0; i < 10; ++i) {
    auto trace = decode(exp.lm, exp.controllers, exp.test[i].history, config);
    for (const auto& st : trace.steps) {
      double chosen_attr = 0.0, max_attr = 0.0;
      for (const auto& c : st.candidates) {
        max_attr = std::max(max_attr, c.attr_probs[0]);
        if (c.token == st.chosen) chosen_attr = c.attr_probs[0];
      }
      CHECK(chosen_attr == max_attr);
    }
  }
}

TEST_CASE("raising one attribute probability never lowers that candidate's rank") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 300; ++trial) {
    size_t n = 3 + rng() % 8;
    std::vector<double> lm(n);
    for (double& p : lm) p = 1e-3 + testutil::unit_interval(rng);
    std::vector<std::vector<double>> attr(1, std::vector<double>(n));
    for (double& p : attr[0]) p = 1e-3 + 0.5 * testutil::unit_interval(rng);
    double lambda = 4.0 * testutil::unit_interval(rng);
    size_t bumped = rng() % n;

    auto rank_of = [&](const std::vector<double>& scores, size_t idx) {
      size_t rank = 0;
      for (size_t j = 0; j < scores.size(); ++j)
        if (scores[j] > scores[idx] || (scores[j] == scores[idx] && j < idx)) ++rank;
      return rank;
    };
    auto before = score_static(lm, attr, lambda);
    size_t rank_before = rank_of(before, bumped);
    attr[0][bumped] = std::min(1.0, attr[0][bumped] * (1.1 + testutil::unit_interval(rng)));
    auto after = score_static(lm, attr, lambda);
    CHECK(rank_of(after, bumped) <= rank_before);
  }
}

TEST_CASE("eco traces are complete and internally consistent") {
  const auto& exp = testutil::toy_experiment();
  DecodeConfig config;
  config.mode = DecodeMode::eco;
  config.lambda = 2.0;
  config.tau_lm = 0.1;
  config.tau_c = 0.1;
  config.max_len = 24;
  config.targets = {{"emotion", "sadness"}, {"dialog-act", "question"}};

  StrengthFunction fn{config.strength_fn, exp.vocab.size()};
  for (size_t i = 0; i < 10; ++i) {
    auto trace = decode(exp.lm, exp.controllers, exp.test[i].history, config);
    CHECK(static_cast<int>(trace.steps.size()) <= config.max_len);
    CHECK((trace.reason == Termination::eos) ==
          (trace.steps.back().chosen == Vocabulary::kEos));
    for (const auto& st : trace.steps) {
      CHECK(std::abs(st.alpha_lm - strength(st.e_lm, fn)) <= 1e-12);
      for (size_t a = 0; a < st.e_c.size(); ++a)
        CHECK(std::abs(st.alpha_c[a] - strength(st.e_c[a], fn)) <= 1e-12);
      REQUIRE(st.candidates.size() >= static_cast<size_t>(config.k));
      // The chosen token maximizes the combined score under the tie rule.
      const CandidateTrace* chosen = nullptr;
      for (const auto& c : st.candidates)
        if (c.token == st.chosen) chosen = &c;
      REQUIRE(chosen != nullptr);
      for (const auto& c : st.candidates) {
        CHECK(c.log_score <= chosen->log_score);
        if (c.log_score == chosen->log_score) CHECK(chosen->token <= c.token);
      }
    }
  }
}

TEST_CASE("EOS outside the top-k is appended and excluded from the entropy") {
  // After "a" the only observed continuation is "b", so EOS ranks below both
  // "b" and the unigram-backoff winner "a" and cannot be in the top two.
  auto vocab = testutil::vocab_of({"a", "b"});
  std::vector<TokenSeq> seqs(20, TokenSeq{Vocabulary::kBos, 3, 4, 3, 4, 3, 4, 3, 4,
                                          Vocabulary::kEos});
  auto lm = train_ngram_lm(seqs, 2, 0.75, vocab.size());
  std::vector<PrefixInstance> instances;
  for (int i = 0; i < 20; ++i) {
    PrefixInstance xa;
    xa.prefix = {3};
    xa.label = "x";
    instances.push_back(xa);
    PrefixInstance yb;
    yb.prefix = {4, Vocabulary::kEos};
    yb.label = "y";
    instances.push_back(yb);
  }
  ClassifierMap clfs;
  clfs.emplace("tone", train_prefix_classifier(instances, {"x", "y"}, 37, 64));

  DecodeConfig config;
  config.mode = DecodeMode::eco;
  config.k = 2;
  config.tau_lm = 0.5;
  config.tau_c = 0.5;
  config.lambda = 1.0;
  config.targets = {{"tone", "x"}};
  auto [token, st] = decode_step(lm, clfs, {}, TokenSeq{3}, config);
  REQUIRE(st.candidates.size() == 3);
  CHECK(st.candidates.back().token == Vocabulary::kEos);
  CHECK(st.candidates[0].token != Vocabulary::kEos);
  CHECK(st.candidates[1].token != Vocabulary::kEos);
  std::vector<double> values{st.candidates[0].lm_prob, st.candidates[1].lm_prob};
  CHECK(st.e_lm == smooth_and_entropy(values, config.tau_lm).entropy);
  // The appended EOS still gets a score and could in principle be chosen.
  CHECK(st.candidates.back().log_score < st.candidates.front().log_score);
}

TEST_CASE("identical inputs produce identical traces") {
  const auto& exp = testutil::toy_experiment();
  DecodeConfig config;
  config.mode = DecodeMode::eco;
  config.lambda = 3.0;
  config.tau_lm = 0.1;
  config.tau_c = 0.1;
  config.targets = {{"emotion", "fear"}};
  auto a = decode(exp.lm, exp.controllers, exp.test[2].history, config);
  auto b = decode(exp.lm, exp.controllers, exp.test[2].history, config);
  REQUIRE(a.steps.size() == b.steps.size());
  CHECK(a.response == b.response);
  for (size_t s = 0; s < a.steps.size(); ++s) {
    CHECK(a.steps[s].chosen == b.steps[s].chosen);
    CHECK(a.steps[s].e_lm == b.steps[s].e_lm);
    for (size_t i = 0; i < a.steps[s].candidates.size(); ++i)
      CHECK(a.steps[s].candidates[i].log_score == b.steps[s].candidates[i].log_score);
  }
}

TEST_CASE("decode is the fixpoint of repeated decode_step calls") {
  const auto& exp = testutil::toy_experiment();
  DecodeConfig config;
  config.mode = DecodeMode::eco;
  config.lambda = 2.0;
  config.tau_lm = 0.1;
  config.tau_c = 0.1;
  config.max_len = 24;
  config.targets = {{"emotion", "happiness"}};

  const auto& history = exp.test[5].history;
  auto trace = decode(exp.lm, exp.controllers, history, config);
  TokenSeq prefix;
  for (const auto& st : trace.steps) {
    auto [token, step] = decode_step(exp.lm, exp.controllers, history, prefix, config);
    CHECK(token == st.chosen);
    if (token == Vocabulary::kEos) break;
    prefix.push_back(token);
  }
  CHECK(prefix == trace.response);
}

TEST_CASE("decode rejects invalid configurations") {
  const auto& exp = testutil::toy_experiment();
  DecodeConfig config;
  config.targets = {{"emotion", "joy"}};  // not a class
  CHECK_THROWS_AS(decode(exp.lm, exp.controllers, exp.test[0].history, config),
                  std::invalid_argument);
  config.targets = {{"unknown-attr", "x"}};
  CHECK_THROWS_AS(decode(exp.lm, exp.controllers, exp.test[0].history, config),
                  std::invalid_argument);
  config.targets = {{"emotion", "fear"}, {"emotion", "anger"}};
  CHECK_THROWS_AS(decode(exp.lm, exp.controllers, exp.test[0].history, config),
                  std::invalid_argument);
  config.targets.clear();
  config.max_len = 0;
  CHECK_THROWS_AS(decode(exp.lm, exp.controllers, exp.test[0].history, config),
                  std::invalid_argument);
}

TEST_SUITE_END();
