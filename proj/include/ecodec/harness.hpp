#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ecodec/decoder.hpp"
#include "ecodec/metrics.hpp"

namespace ecodec {

// Everything a batch experiment needs: splits, vocabulary, the decode LM, a
// reference LM for the fluency proxy (trained on the held-out valid split),
// controller classifiers and independent evaluators per attribute.
struct Experiment {
  Vocabulary vocab;
  std::vector<DialogueExample> train, valid, test;
  NGramLM lm;      // trained on the train split
  NGramLM ref_lm;  // trained on the valid split; fluency scoring only
  ClassifierMap controllers;
  std::map<std::string, PrefixClassifier> evaluators;
  std::map<std::string, uint64_t> controller_seeds;

  std::vector<uint64_t> controller_seed_list() const;
};

struct ExperimentOptions {
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  uint64_t split_seed = 17;
  int min_count = 2;
  int order = 3;
  double discount = 0.75;
  uint64_t controller_seed_base = 1001;  // per-attribute: base + index
  uint64_t evaluator_seed = 9001;
  int32_t controller_buckets = 4096;
  int32_t evaluator_buckets = 8192;
  std::vector<std::string> attributes;  // attributes to train classifiers for
};

Experiment prepare_experiment(const std::vector<RawExample>& raw, const AttributeSchema& schema,
                              const ExperimentOptions& options);

// Decode every test example whose labels cover `attributes`, targeting the
// example's own gold labels. Returns one trace per decoded example plus the
// indices of the examples used.
struct BatchDecodeResult {
  std::vector<size_t> example_indices;
  std::vector<DecodeTrace> traces;
};
BatchDecodeResult decode_split(const Experiment& exp,
                               const std::vector<std::string>& attributes,
                               const DecodeConfig& base);

struct EvalReport {
  std::map<std::string, double> accuracy;  // per controlled attribute
  double dist1 = 0.0, dist2 = 0.0;
  double rouge1 = 0.0, rouge_l = 0.0;
  double perplexity = 0.0;  // mean fluency proxy under ref_lm
  int64_t n = 0;
};

EvalReport evaluate_decodes(const Experiment& exp, const std::vector<std::string>& attributes,
                            const BatchDecodeResult& batch,
                            bool dist_per_response = false);
EvalReport evaluate_config(const Experiment& exp, const std::vector<std::string>& attributes,
                           const DecodeConfig& config, bool dist_per_response = false);
// Uncontrolled greedy baseline over the same example subset.
EvalReport baseline_report(const Experiment& exp, const std::vector<std::string>& attributes,
                           const DecodeConfig& config, bool dist_per_response = false);

struct SweepPoint {
  double lambda = 0.0;
  DecodeMode mode = DecodeMode::static_weight;
  std::map<std::string, double> accuracy;
  double perplexity = 0.0;
  double dist1 = 0.0, dist2 = 0.0;
};

struct SweepConfig {
  std::vector<double> grid;
  std::vector<DecodeMode> modes{DecodeMode::static_weight, DecodeMode::eco};
  std::vector<std::string> attributes;
  DecodeConfig base;
};

std::vector<SweepPoint> lambda_sweep(const Experiment& exp, const SweepConfig& config);
void write_sweep_tsv(const std::vector<SweepPoint>& points, std::ostream& out);
void write_curve_files(const std::vector<SweepPoint>& points,
                       const std::filesystem::path& out_dir);

struct TauRow {
  double tau = 0.0;
  std::map<std::string, double> accuracy;
  double perplexity = 0.0;
};

std::vector<TauRow> tau_sweep(const Experiment& exp, const std::vector<double>& grid,
                              const std::vector<std::string>& attributes,
                              const DecodeConfig& base);
void write_tau_tsv(const std::vector<TauRow>& rows, std::ostream& out);

struct LatencyReport {
  double static_ms_per_token = 0.0;
  double eco_ms_per_token = 0.0;
  double overhead = 0.0;  // eco / static
};

LatencyReport latency_benchmark(const Experiment& exp,
                                const std::vector<std::string>& attributes,
                                const DecodeConfig& config, int repetitions,
                                size_t sample_size);
void write_latency_tsv(const LatencyReport& report, std::ostream& out);

// Per-token LM entropy table: token, e_lm, lm_prob of the chosen token.
void export_entropy_summary(const std::vector<DecodeTrace>& traces, const Vocabulary& vocab,
                            std::ostream& out);

struct AblationPoint {
  StrengthKind strength_fn;
  SweepPoint point;
};

// Runs the lambda sweep once per strength function.
std::vector<AblationPoint> strength_ablation(const Experiment& exp, const SweepConfig& config);
void write_ablation_tsv(const std::vector<AblationPoint>& points, std::ostream& out);

void write_eval_tsv(const EvalReport& report, std::ostream& out);

}  // namespace ecodec
