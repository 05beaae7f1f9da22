#include "ecodec/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "ecodec/util.hpp"

namespace ecodec {

std::vector<uint64_t> Experiment::controller_seed_list() const {
  std::vector<uint64_t> seeds;
  for (const auto& [name, seed] : controller_seeds) seeds.push_back(seed);
  return seeds;
}

Experiment prepare_experiment(const std::vector<RawExample>& raw, const AttributeSchema& schema,
                              const ExperimentOptions& options) {
  for (const auto& attr : options.attributes)
    if (!schema.count(attr))
      throw std::invalid_argument("attribute '" + attr + "' not in schema");

  auto split_raw = split_dataset(raw, options.ratios, options.split_seed);
  Experiment exp;
  exp.vocab = build_vocabulary(split_raw[0], options.min_count);
  exp.train = encode_examples(split_raw[0], exp.vocab);
  exp.valid = encode_examples(split_raw[1], exp.vocab);
  exp.test = encode_examples(split_raw[2], exp.vocab);

  auto sequences_of = [](const std::vector<DialogueExample>& exs) {
    std::vector<TokenSeq> seqs;
    seqs.reserve(exs.size());
    for (const auto& ex : exs) seqs.push_back(lm_training_sequence(ex));
    return seqs;
  };
  exp.lm = train_ngram_lm(sequences_of(exp.train), options.order, options.discount,
                          exp.vocab.size());
  const auto& ref_split = exp.valid.empty() ? exp.train : exp.valid;
  exp.ref_lm = train_ngram_lm(sequences_of(ref_split), options.order, options.discount,
                              exp.vocab.size());

  size_t attr_index = 0;
  for (const auto& attr : options.attributes) {
    uint64_t seed = options.controller_seed_base + attr_index++;
    if (seed == options.evaluator_seed)
      throw UserError("controller seed for '" + attr + "' collides with the evaluator seed");
    std::vector<PrefixInstance> instances;
    for (const auto& ex : exp.train) {
      if (!ex.attributes.count(attr)) continue;
      auto prefixes = enumerate_prefixes(ex, attr);
      std::move(prefixes.begin(), prefixes.end(), std::back_inserter(instances));
    }
    const auto& classes = schema.at(attr);
    exp.controllers.emplace(
        attr, train_prefix_classifier(instances, classes, seed, options.controller_buckets));
    exp.evaluators.emplace(attr, train_prefix_classifier(instances, classes,
                                                         options.evaluator_seed,
                                                         options.evaluator_buckets));
    exp.controller_seeds[attr] = seed;
  }
  return exp;
}

BatchDecodeResult decode_split(const Experiment& exp,
                               const std::vector<std::string>& attributes,
                               const DecodeConfig& base) {
  BatchDecodeResult out;
  for (size_t i = 0; i < exp.test.size(); ++i) {
    const auto& ex = exp.test[i];
    bool covered = true;
    for (const auto& attr : attributes) covered = covered && ex.attributes.count(attr) > 0;
    if (!covered) continue;
    DecodeConfig config = base;
    config.targets.clear();
    for (const auto& attr : attributes)
      config.targets.push_back({attr, ex.attributes.at(attr)});
    out.example_indices.push_back(i);
    out.traces.push_back(decode(exp.lm, exp.controllers, ex.history, config));
  }
  return out;
}

EvalReport evaluate_decodes(const Experiment& exp, const std::vector<std::string>& attributes,
                            const BatchDecodeResult& batch, bool dist_per_response) {
  if (batch.traces.empty()) throw std::invalid_argument("no decoded examples to evaluate");
  EvalReport report;
  report.n = static_cast<int64_t>(batch.traces.size());

  std::vector<TokenSeq> responses;
  std::vector<std::vector<TokenSeq>> histories;
  for (size_t j = 0; j < batch.traces.size(); ++j) {
    responses.push_back(batch.traces[j].response);
    histories.push_back(exp.test[batch.example_indices[j]].history);
  }

  auto seeds = exp.controller_seed_list();
  for (const auto& attr : attributes) {
    std::vector<std::string> targets;
    for (size_t idx : batch.example_indices)
      targets.push_back(exp.test[idx].attributes.at(attr));
    report.accuracy[attr] =
        attribute_accuracy(responses, histories, exp.evaluators.at(attr), targets, seeds);
  }

  if (dist_per_response) {
    report.dist1 = distinct_n_per_response(responses, 1);
    report.dist2 = distinct_n_per_response(responses, 2);
  } else {
    report.dist1 = distinct_n(responses, 1);
    report.dist2 = distinct_n(responses, 2);
  }

  double ppl_sum = 0.0, rouge1_sum = 0.0, rouge_l_sum = 0.0;
  int64_t ppl_n = 0;
  for (size_t j = 0; j < responses.size(); ++j) {
    const auto& resp = responses[j];
    const auto& ref = exp.test[batch.example_indices[j]].response;
    TokenSeq ref_surface(ref.begin(), ref.end() - 1);  // drop terminal EOS
    rouge1_sum += rouge1_f1(resp, ref_surface);
    rouge_l_sum += rouge_l_f1(resp, ref_surface);
    if (!resp.empty()) {
      ppl_sum += perplexity(exp.ref_lm, resp);
      ++ppl_n;
    }
  }
  if (ppl_n == 0) throw std::invalid_argument("every decoded response is empty");
  report.perplexity = ppl_sum / static_cast<double>(ppl_n);
  report.rouge1 = rouge1_sum / static_cast<double>(responses.size());
  report.rouge_l = rouge_l_sum / static_cast<double>(responses.size());
  return report;
}

EvalReport evaluate_config(const Experiment& exp, const std::vector<std::string>& attributes,
                           const DecodeConfig& config, bool dist_per_response) {
  return evaluate_decodes(exp, attributes, decode_split(exp, attributes, config),
                          dist_per_response);
}

EvalReport baseline_report(const Experiment& exp, const std::vector<std::string>& attributes,
                           const DecodeConfig& config, bool dist_per_response) {
  DecodeConfig uncontrolled = config;
  uncontrolled.targets.clear();
  BatchDecodeResult batch;
  for (size_t i = 0; i < exp.test.size(); ++i) {
    const auto& ex = exp.test[i];
    bool covered = true;
    for (const auto& attr : attributes) covered = covered && ex.attributes.count(attr) > 0;
    if (!covered) continue;
    batch.example_indices.push_back(i);
    batch.traces.push_back(decode(exp.lm, exp.controllers, ex.history, uncontrolled));
  }
  return evaluate_decodes(exp, attributes, batch, dist_per_response);
}

std::vector<SweepPoint> lambda_sweep(const Experiment& exp, const SweepConfig& config) {
  if (config.grid.empty()) throw std::invalid_argument("lambda grid is empty");
  std::vector<SweepPoint> points;
  for (DecodeMode mode : config.modes) {
    for (double lambda : config.grid) {
      DecodeConfig dc = config.base;
      dc.mode = mode;
      dc.lambda = lambda;
      EvalReport report = evaluate_config(exp, config.attributes, dc);
      SweepPoint point;
      point.lambda = lambda;
      point.mode = mode;
      point.accuracy = report.accuracy;
      point.perplexity = report.perplexity;
      point.dist1 = report.dist1;
      point.dist2 = report.dist2;
      points.push_back(std::move(point));
    }
  }
  return points;
}

void write_sweep_tsv(const std::vector<SweepPoint>& points, std::ostream& out) {
  out << "lambda\tmode\tattr\taccuracy\tperplexity\tdist1\tdist2\n";
  for (const auto& p : points)
    for (const auto& [attr, acc] : p.accuracy)
      out << fmt_double(p.lambda) << '\t' << to_string(p.mode) << '\t' << attr << '\t'
          << fmt_double(acc) << '\t' << fmt_double(p.perplexity) << '\t'
          << fmt_double(p.dist1) << '\t' << fmt_double(p.dist2) << '\n';
}

void write_curve_files(const std::vector<SweepPoint>& points,
                       const std::filesystem::path& out_dir) {
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> curves;
  for (const auto& p : points)
    for (const auto& [attr, acc] : p.accuracy)
      curves[{to_string(p.mode), attr}].emplace_back(acc, p.perplexity);
  for (const auto& [key, rows] : curves) {
    std::filesystem::path path = out_dir / ("curve_" + key.first + "_" + key.second + ".tsv");
    std::ofstream out(path);
    if (!out) throw UserError("cannot write " + path.string());
    out << "accuracy\tperplexity\n";
    for (const auto& [acc, ppl] : rows)
      out << fmt_double(acc) << '\t' << fmt_double(ppl) << '\n';
  }
}

std::vector<TauRow> tau_sweep(const Experiment& exp, const std::vector<double>& grid,
                              const std::vector<std::string>& attributes,
                              const DecodeConfig& base) {
  if (grid.empty()) throw std::invalid_argument("tau grid is empty");
  for (double tau : grid)
    if (!(tau > 0.0)) throw std::invalid_argument("tau grid must be positive");
  std::vector<TauRow> rows;
  for (double tau : grid) {
    DecodeConfig dc = base;
    dc.mode = DecodeMode::eco;
    dc.tau_lm = tau;
    dc.tau_c = tau;
    EvalReport report = evaluate_config(exp, attributes, dc);
    rows.push_back({tau, report.accuracy, report.perplexity});
  }
  return rows;
}

void write_tau_tsv(const std::vector<TauRow>& rows, std::ostream& out) {
  out << "tau\tattr\taccuracy\tperplexity\n";
  for (const auto& r : rows)
    for (const auto& [attr, acc] : r.accuracy)
      out << fmt_double(r.tau) << '\t' << attr << '\t' << fmt_double(acc) << '\t'
          << fmt_double(r.perplexity) << '\n';
}

static double timed_decode_ms_per_token(const Experiment& exp,
                                        const std::vector<std::pair<size_t, DecodeConfig>>& jobs) {
  auto t0 = std::chrono::steady_clock::now();
  int64_t tokens = 0;
  for (const auto& [idx, config] : jobs) {
    DecodeTrace trace = decode(exp.lm, exp.controllers, exp.test[idx].history, config);
    tokens += static_cast<int64_t>(trace.steps.size());
  }
  auto t1 = std::chrono::steady_clock::now();
  double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return ms / static_cast<double>(std::max<int64_t>(tokens, 1));
}

LatencyReport latency_benchmark(const Experiment& exp,
                                const std::vector<std::string>& attributes,
                                const DecodeConfig& config, int repetitions,
                                size_t sample_size) {
  if (repetitions < 3) throw std::invalid_argument("need at least 3 repetitions");
  std::vector<std::pair<size_t, DecodeConfig>> jobs;
  for (size_t i = 0; i < exp.test.size() && jobs.size() < sample_size; ++i) {
    const auto& ex = exp.test[i];
    bool covered = true;
    for (const auto& attr : attributes) covered = covered && ex.attributes.count(attr) > 0;
    if (!covered) continue;
    DecodeConfig dc = config;
    dc.targets.clear();
    for (const auto& attr : attributes) dc.targets.push_back({attr, ex.attributes.at(attr)});
    jobs.emplace_back(i, dc);
  }
  if (jobs.empty()) throw std::invalid_argument("no benchmark examples available");

  auto with_mode = [&](DecodeMode mode) {
    auto copy = jobs;
    for (auto& [idx, dc] : copy) dc.mode = mode;
    return copy;
  };
  auto static_jobs = with_mode(DecodeMode::static_weight);
  auto eco_jobs = with_mode(DecodeMode::eco);

  timed_decode_ms_per_token(exp, static_jobs);  // warmup, untimed
  timed_decode_ms_per_token(exp, eco_jobs);

  // Alternate which mode runs first so slow drift in machine load cancels
  // out of the medians.
  std::vector<double> static_ms, eco_ms;
  for (int r = 0; r < repetitions; ++r) {
    if (r % 2 == 0) {
      static_ms.push_back(timed_decode_ms_per_token(exp, static_jobs));
      eco_ms.push_back(timed_decode_ms_per_token(exp, eco_jobs));
    } else {
      eco_ms.push_back(timed_decode_ms_per_token(exp, eco_jobs));
      static_ms.push_back(timed_decode_ms_per_token(exp, static_jobs));
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  LatencyReport report;
  report.static_ms_per_token = median(static_ms);
  report.eco_ms_per_token = median(eco_ms);
  report.overhead = report.eco_ms_per_token / report.static_ms_per_token;
  return report;
}

void write_latency_tsv(const LatencyReport& report, std::ostream& out) {
  out << "mode\tms_per_token\n";
  out << "static\t" << fmt_double(report.static_ms_per_token) << '\n';
  out << "eco\t" << fmt_double(report.eco_ms_per_token) << '\n';
  out << "overhead\t" << fmt_double(report.overhead) << '\n';
}

void export_entropy_summary(const std::vector<DecodeTrace>& traces, const Vocabulary& vocab,
                            std::ostream& out) {
  if (traces.empty()) throw std::invalid_argument("no traces to export");
  out << "token\te_lm\tlm_prob\n";
  for (const auto& trace : traces) {
    for (const auto& st : trace.steps) {
      double lm_prob = 0.0;
      for (const auto& c : st.candidates)
        if (c.token == st.chosen) {
          lm_prob = c.lm_prob;
          break;
        }
      out << vocab.string_of(st.chosen) << '\t' << fmt_double(st.e_lm) << '\t'
          << fmt_double(lm_prob) << '\n';
    }
  }
}

std::vector<AblationPoint> strength_ablation(const Experiment& exp, const SweepConfig& config) {
  std::vector<AblationPoint> out;
  for (StrengthKind kind :
       {StrengthKind::reciprocal, StrengthKind::exponential, StrengthKind::negative}) {
    SweepConfig sc = config;
    sc.base.strength_fn = kind;
    for (auto& point : lambda_sweep(exp, sc)) out.push_back({kind, std::move(point)});
  }
  return out;
}

void write_ablation_tsv(const std::vector<AblationPoint>& points, std::ostream& out) {
  out << "strength_fn\tlambda\tmode\tattr\taccuracy\tperplexity\tdist1\tdist2\n";
  for (const auto& ap : points)
    for (const auto& [attr, acc] : ap.point.accuracy)
      out << to_string(ap.strength_fn) << '\t' << fmt_double(ap.point.lambda) << '\t'
          << to_string(ap.point.mode) << '\t' << attr << '\t' << fmt_double(acc) << '\t'
          << fmt_double(ap.point.perplexity) << '\t' << fmt_double(ap.point.dist1) << '\t'
          << fmt_double(ap.point.dist2) << '\n';
}

void write_eval_tsv(const EvalReport& report, std::ostream& out) {
  out << "metric\tvalue\n";
  for (const auto& [attr, acc] : report.accuracy)
    out << "accuracy:" << attr << '\t' << fmt_double(acc) << '\n';
  out << "dist1\t" << fmt_double(report.dist1) << '\n';
  out << "dist2\t" << fmt_double(report.dist2) << '\n';
  out << "rouge1\t" << fmt_double(report.rouge1) << '\n';
  out << "rougeL\t" << fmt_double(report.rouge_l) << '\n';
  out << "perplexity\t" << fmt_double(report.perplexity) << '\n';
  out << "n\t" << report.n << '\n';
}

}  // namespace ecodec
