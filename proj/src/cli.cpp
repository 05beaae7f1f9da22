#include "ecodec/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ecodec/harness.hpp"
#include "ecodec/serialize.hpp"
#include "ecodec/svg.hpp"
#include "ecodec/toy_corpus.hpp"
#include "ecodec/util.hpp"

namespace ecodec {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flat key = value config file; '#' starts a comment line.
std::map<std::string, std::string> load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open config file: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UserError("config line " + std::to_string(line_no) + ": expected key = value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

struct KV {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
  double num(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw UserError("config key '" + key + "': not a number: " + it->second);
    }
  }
  std::vector<std::string> list(const std::string& key,
                                const std::vector<std::string>& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : split_csv(it->second);
  }
};

std::vector<double> parse_double_list(const std::vector<std::string>& items,
                                      const std::string& what) {
  std::vector<double> out;
  for (const auto& s : items) {
    try {
      out.push_back(std::stod(s));
    } catch (const std::exception&) {
      throw UserError(what + ": not a number: " + s);
    }
  }
  return out;
}

struct RunConfig {
  std::string dataset = "data/toy_corpus.jsonl";
  std::string out_dir = "out";
  int order = 3;
  double discount = 0.75;
  int min_count = 2;
  std::vector<double> ratios{0.8, 0.1, 0.1};
  uint64_t split_seed = 17;
  uint64_t controller_seed_base = 1001;
  uint64_t evaluator_seed = 9001;
  int controller_buckets = 4096;
  int evaluator_buckets = 8192;
  std::string mode = "eco";
  double lambda = 4.0;
  int k = 50;
  double tau_lm = 1.0;
  double tau_c = 1.0;
  std::string strength_fn = "reciprocal";
  int max_len = 128;
  std::string entropy_input = "probs";
  std::vector<std::string> attributes{"emotion", "dialog-act"};
  AttributeSchema schema = default_schema();

  ExperimentOptions experiment_options() const {
    if (ratios.size() != 3) throw UserError("--ratios needs exactly three values");
    if (evaluator_seed == controller_seed_base ||
        (attributes.size() > 1 &&
         evaluator_seed >= controller_seed_base &&
         evaluator_seed < controller_seed_base + attributes.size()))
      throw UserError("evaluator seed collides with a controller seed");
    ExperimentOptions opt;
    opt.ratios = {ratios[0], ratios[1], ratios[2]};
    opt.split_seed = split_seed;
    opt.min_count = min_count;
    opt.order = order;
    opt.discount = discount;
    opt.controller_seed_base = controller_seed_base;
    opt.evaluator_seed = evaluator_seed;
    opt.controller_buckets = controller_buckets;
    opt.evaluator_buckets = evaluator_buckets;
    opt.attributes = attributes;
    return opt;
  }

  DecodeConfig decode_config() const {
    DecodeConfig dc;
    dc.mode = decode_mode_from_string(mode);
    dc.lambda = lambda;
    dc.k = k;
    dc.tau_lm = tau_lm;
    dc.tau_c = tau_c;
    dc.strength_fn = strength_kind_from_string(strength_fn);
    dc.max_len = max_len;
    if (entropy_input == "probs")
      dc.entropy_log_input = false;
    else if (entropy_input == "logits")
      dc.entropy_log_input = true;
    else
      throw UserError("--entropy-input must be 'probs' or 'logits'");
    return dc;
  }
};

std::vector<RawExample> load_raw_or_die(const RunConfig& rc) {
  if (rc.dataset.empty()) throw UserError("--dataset must not be empty");
  if (rc.out_dir.empty()) throw UserError("--out must not be empty");
  if (!fs::exists(rc.dataset)) throw UserError("dataset not found: " + rc.dataset);
  return load_raw_dataset(rc.dataset, rc.schema);
}

fs::path out_path(const RunConfig& rc, const std::string& name) {
  fs::create_directories(rc.out_dir);
  return fs::path(rc.out_dir) / name;
}

std::ofstream open_out(const RunConfig& rc, const std::string& name) {
  fs::path p = out_path(rc, name);
  std::ofstream out(p);
  if (!out) throw UserError("cannot write " + p.string());
  return out;
}

// Splits are recomputed from (dataset, ratios, seed); the vocabulary and all
// models come from the files written by train-lm / train-clf.
Experiment load_experiment(const RunConfig& rc, const std::vector<std::string>& attrs,
                           bool need_evaluators) {
  fs::path vocab_path = fs::path(rc.out_dir) / "vocab.txt";
  if (!fs::exists(vocab_path))
    throw UserError("missing " + vocab_path.string() + " (run train-lm first)");
  Experiment exp;
  exp.vocab = Vocabulary::load(vocab_path);

  auto raw = load_raw_or_die(rc);
  if (rc.ratios.size() != 3) throw UserError("--ratios needs exactly three values");
  auto splits = split_dataset(raw, {rc.ratios[0], rc.ratios[1], rc.ratios[2]}, rc.split_seed);
  exp.train = encode_examples(splits[0], exp.vocab);
  exp.valid = encode_examples(splits[1], exp.vocab);
  exp.test = encode_examples(splits[2], exp.vocab);

  exp.lm = load_lm(fs::path(rc.out_dir) / "lm.json", exp.vocab);
  exp.ref_lm = load_lm(fs::path(rc.out_dir) / "ref_lm.json", exp.vocab);
  for (const auto& attr : attrs) {
    fs::path clf_path = fs::path(rc.out_dir) / ("clf_" + attr + ".json");
    if (!fs::exists(clf_path))
      throw UserError("missing " + clf_path.string() + " (run train-clf --attribute " +
                      attr + " first)");
    PrefixClassifier clf = load_classifier(clf_path, exp.vocab);
    exp.controller_seeds[attr] = clf.hash_seed();
    exp.controllers.emplace(attr, std::move(clf));
    if (need_evaluators) {
      fs::path eval_path = fs::path(rc.out_dir) / ("eval_" + attr + ".json");
      if (!fs::exists(eval_path))
        throw UserError("missing " + eval_path.string() +
                        " (run train-clf --evaluator --attribute " + attr + " first)");
      exp.evaluators.emplace(attr, load_classifier(eval_path, exp.vocab));
    }
  }
  return exp;
}

DecodeConfig decode_config_for(const RunConfig& rc, const Experiment& exp) {
  DecodeConfig dc = rc.decode_config();
  if (dc.k > exp.vocab.size())
    throw UserError("--k (" + std::to_string(dc.k) + ") exceeds the vocabulary size (" +
                    std::to_string(exp.vocab.size()) + ")");
  return dc;
}

std::vector<AttributeTarget> parse_targets(const std::string& spec,
                                           const ClassifierMap& classifiers) {
  std::vector<AttributeTarget> targets;
  for (const auto& item : split_csv(spec)) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw UserError("target '" + item + "' must look like attribute=class");
    AttributeTarget t{trim(item.substr(0, eq)), trim(item.substr(eq + 1))};
    auto it = classifiers.find(t.attribute);
    if (it == classifiers.end())
      throw UserError("no classifier loaded for attribute '" + t.attribute + "'");
    try {
      it->second.class_index(t.cls);
    } catch (const std::invalid_argument&) {
      throw UserError("unknown class '" + t.cls + "' for attribute '" + t.attribute + "'");
    }
    targets.push_back(std::move(t));
  }
  return targets;
}

double mean_sequence_perplexity(const NGramLM& lm, const std::vector<DialogueExample>& exs) {
  if (exs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : exs) {
    TokenSeq seq = lm_training_sequence(ex);
    TokenSeq body(seq.begin() + 1, seq.end());  // skip the BOS anchor
    std::vector<double> lps;
    lps.reserve(body.size());
    for (size_t i = 0; i < body.size(); ++i)
      lps.push_back(std::log(lm.prob(body[i], std::span<const TokenId>(seq).subspan(0, i + 1))));
    sum += perplexity_from_log_probs(lps);
  }
  return sum / static_cast<double>(exs.size());
}

void register_shared(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--config", "flat key = value config file (parsed before flags)");
  cmd->add_option("--dataset", rc.dataset, "JSON-lines dataset path");
  cmd->add_option("--out", rc.out_dir, "output directory for models and reports");
  cmd->add_option("--order", rc.order, "n-gram order");
  cmd->add_option("--discount", rc.discount, "absolute discount in (0,1)");
  cmd->add_option("--min-count", rc.min_count, "vocabulary frequency threshold");
  cmd->add_option("--ratios", rc.ratios, "train,valid,test ratios")->delimiter(',');
  cmd->add_option("--split-seed", rc.split_seed, "dataset split seed");
  cmd->add_option("--controller-seed-base", rc.controller_seed_base,
                  "hash seed base for controller classifiers");
  cmd->add_option("--evaluator-seed", rc.evaluator_seed, "hash seed for evaluators");
  cmd->add_option("--controller-buckets", rc.controller_buckets,
                  "feature buckets for controllers");
  cmd->add_option("--evaluator-buckets", rc.evaluator_buckets,
                  "feature buckets for evaluators");
  cmd->add_option("--mode", rc.mode, "decode mode: static or eco");
  cmd->add_option("--lambda", rc.lambda, "control strength scale factor");
  cmd->add_option("--k", rc.k, "top-k candidate count");
  cmd->add_option("--tau-lm", rc.tau_lm, "LM entropy smoothing temperature");
  cmd->add_option("--tau-c", rc.tau_c, "attribute entropy smoothing temperature");
  cmd->add_option("--strength-fn", rc.strength_fn,
                  "strength function: reciprocal, exponential or negative");
  cmd->add_option("--max-len", rc.max_len, "maximum response length");
  cmd->add_option("--entropy-input", rc.entropy_input,
                  "smooth 'probs' (literal) or 'logits' (log probabilities)");
  cmd->add_option("--attributes", rc.attributes, "attributes to train/control")
      ->delimiter(',');
}

int run_cli_impl(const std::vector<std::string>& args) {
  // The config file provides defaults; explicit flags override them.
  KV kv;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      kv.values = load_config_file(args[i + 1]);
    else if (args[i].rfind("--config=", 0) == 0)
      kv.values = load_config_file(args[i].substr(9));
  }

  RunConfig rc;
  rc.dataset = kv.str("dataset", rc.dataset);
  rc.out_dir = kv.str("out", rc.out_dir);
  rc.order = static_cast<int>(kv.num("order", rc.order));
  rc.discount = kv.num("discount", rc.discount);
  rc.min_count = static_cast<int>(kv.num("min-count", rc.min_count));
  rc.ratios = parse_double_list(kv.list("ratios", {"0.8", "0.1", "0.1"}), "ratios");
  rc.split_seed = static_cast<uint64_t>(kv.num("split-seed", static_cast<double>(rc.split_seed)));
  rc.controller_seed_base = static_cast<uint64_t>(
      kv.num("controller-seed-base", static_cast<double>(rc.controller_seed_base)));
  rc.evaluator_seed =
      static_cast<uint64_t>(kv.num("evaluator-seed", static_cast<double>(rc.evaluator_seed)));
  rc.controller_buckets = static_cast<int>(kv.num("controller-buckets", rc.controller_buckets));
  rc.evaluator_buckets = static_cast<int>(kv.num("evaluator-buckets", rc.evaluator_buckets));
  rc.mode = kv.str("mode", rc.mode);
  rc.lambda = kv.num("lambda", rc.lambda);
  rc.k = static_cast<int>(kv.num("k", rc.k));
  rc.tau_lm = kv.num("tau-lm", rc.tau_lm);
  rc.tau_c = kv.num("tau-c", rc.tau_c);
  rc.strength_fn = kv.str("strength-fn", rc.strength_fn);
  rc.max_len = static_cast<int>(kv.num("max-len", rc.max_len));
  rc.entropy_input = kv.str("entropy-input", rc.entropy_input);
  rc.attributes = kv.list("attributes", rc.attributes);
  for (const auto& [key, value] : kv.values) {
    if (key.rfind("attribute.", 0) == 0) rc.schema[key.substr(10)] = split_csv(value);
  }

  CLI::App app{"entropy-adaptive weighted decoding toolkit"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate the templated toy corpus");
  std::string gen_out = kv.str("gen-out", "data/toy_corpus.jsonl");
  int gen_n = static_cast<int>(kv.num("gen-n", 2000));
  uint64_t gen_seed = static_cast<uint64_t>(kv.num("gen-seed", 13));
  gen->add_option("--out", gen_out, "output JSONL path");
  gen->add_option("--n", gen_n, "number of examples");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->callback([&]() {
    auto examples = generate_toy_corpus({gen_n, gen_seed});
    fs::path p(gen_out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_jsonl(examples, p);
    std::cout << "wrote " << examples.size() << " examples to " << gen_out << "\n";
  });

  // train-lm
  auto* train_lm = app.add_subcommand("train-lm", "train the decode and reference LMs");
  register_shared(train_lm, rc);
  train_lm->callback([&]() {
    auto raw = load_raw_or_die(rc);
    Experiment exp = prepare_experiment(raw, rc.schema, [&] {
      auto opt = rc.experiment_options();
      opt.attributes.clear();  // classifiers are trained by train-clf
      return opt;
    }());
    exp.vocab.save(out_path(rc, "vocab.txt"));
    save_lm(exp.lm, exp.vocab, out_path(rc, "lm.json"));
    save_lm(exp.ref_lm, exp.vocab, out_path(rc, "ref_lm.json"));
    std::cout << "vocab size: " << exp.vocab.size() << "\n";
    std::cout << "train perplexity: " << fmt_double(mean_sequence_perplexity(exp.lm, exp.train))
              << "\n";
    std::cout << "valid perplexity: " << fmt_double(mean_sequence_perplexity(exp.lm, exp.valid))
              << "\n";
  });

  // train-clf
  auto* train_clf = app.add_subcommand("train-clf", "train a prefix attribute classifier");
  register_shared(train_clf, rc);
  std::string clf_attribute;
  bool train_evaluator = false;
  train_clf->add_option("--attribute", clf_attribute, "attribute to train")->required();
  train_clf->add_flag("--evaluator", train_evaluator,
                      "also train the independent evaluator classifier");
  train_clf->callback([&]() {
    if (!rc.schema.count(clf_attribute))
      throw UserError("attribute '" + clf_attribute + "' not in schema");
    fs::path vocab_path = fs::path(rc.out_dir) / "vocab.txt";
    if (!fs::exists(vocab_path))
      throw UserError("missing " + vocab_path.string() + " (run train-lm first)");
    Vocabulary vocab = Vocabulary::load(vocab_path);

    auto raw = load_raw_or_die(rc);
    auto splits =
        split_dataset(raw, {rc.ratios[0], rc.ratios[1], rc.ratios[2]}, rc.split_seed);
    auto train = encode_examples(splits[0], vocab);
    auto valid = encode_examples(splits[1], vocab);

    size_t attr_index = 0;
    for (const auto& a : rc.attributes) {
      if (a == clf_attribute) break;
      ++attr_index;
    }
    uint64_t seed = rc.controller_seed_base + attr_index;
    if (train_evaluator && rc.evaluator_seed == seed)
      throw UserError("evaluator seed equals the controller seed for '" + clf_attribute +
                      "'; pick a different --evaluator-seed");

    std::vector<PrefixInstance> instances;
    for (const auto& ex : train) {
      if (!ex.attributes.count(clf_attribute)) continue;
      auto prefixes = enumerate_prefixes(ex, clf_attribute);
      std::move(prefixes.begin(), prefixes.end(), std::back_inserter(instances));
    }
    const auto& classes = rc.schema.at(clf_attribute);
    PrefixClassifier clf =
        train_prefix_classifier(instances, classes, seed, rc.controller_buckets);
    save_classifier(clf, vocab, out_path(rc, "clf_" + clf_attribute + ".json"));

    auto held_out_accuracy = [&](const PrefixClassifier& model) {
      int64_t hits = 0, n = 0;
      for (const auto& ex : valid) {
        auto it = ex.attributes.find(clf_attribute);
        if (it == ex.attributes.end()) continue;
        ++n;
        if (classify_response(model, ex.history, ex.response) == it->second) ++hits;
      }
      return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
    };
    std::cout << "controller held-out accuracy (" << clf_attribute
              << "): " << fmt_double(held_out_accuracy(clf)) << "\n";

    if (train_evaluator) {
      PrefixClassifier evaluator =
          train_prefix_classifier(instances, classes, rc.evaluator_seed, rc.evaluator_buckets);
      save_classifier(evaluator, vocab, out_path(rc, "eval_" + clf_attribute + ".json"));
      std::cout << "evaluator held-out accuracy (" << clf_attribute
                << "): " << fmt_double(held_out_accuracy(evaluator)) << "\n";
    }
  });

  // decode
  auto* dec = app.add_subcommand("decode", "decode one history with attribute control");
  register_shared(dec, rc);
  std::vector<std::string> dec_history;
  std::string dec_targets = kv.str("targets", "");
  std::string dec_trace;
  dec->add_option("--history", dec_history, "history utterance (repeatable, in order)");
  dec->add_option("--targets", dec_targets, "comma list of attribute=class targets");
  dec->add_option("--trace", dec_trace, "write the per-step candidate trace TSV here");
  dec->callback([&]() {
    std::vector<std::string> needed;
    for (const auto& item : split_csv(dec_targets)) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw UserError("target '" + item + "' must look like attribute=class");
      needed.push_back(trim(item.substr(0, eq)));
    }
    Experiment exp = load_experiment(rc, needed, /*need_evaluators=*/false);
    DecodeConfig dc = decode_config_for(rc, exp);
    dc.targets = parse_targets(dec_targets, exp.controllers);

    std::vector<TokenSeq> history;
    for (const auto& utt : dec_history) history.push_back(tokenize(utt, exp.vocab));
    DecodeTrace trace = decode(exp.lm, exp.controllers, history, dc);
    std::cout << detokenize(trace.response, exp.vocab) << "\n";
    if (!dec_trace.empty()) {
      std::ofstream out(dec_trace);
      if (!out) throw UserError("cannot write " + dec_trace);
      write_trace_tsv(trace, exp.vocab, dc.targets, out);
    }
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "lambda sweep over static and eco modes");
  register_shared(sweep, rc);
  std::vector<std::string> sweep_grid = kv.list("grid", {"0", "0.5", "1", "2", "4", "8"});
  std::vector<std::string> sweep_modes = kv.list("modes", {"static", "eco"});
  sweep->add_option("--grid", sweep_grid, "lambda grid")->delimiter(',');
  sweep->add_option("--modes", sweep_modes, "modes to sweep")->delimiter(',');
  sweep->callback([&]() {
    Experiment exp = load_experiment(rc, rc.attributes, /*need_evaluators=*/true);
    SweepConfig sc;
    sc.grid = parse_double_list(sweep_grid, "--grid");
    sc.modes.clear();
    for (const auto& m : sweep_modes) sc.modes.push_back(decode_mode_from_string(m));
    sc.attributes = rc.attributes;
    sc.base = decode_config_for(rc, exp);
    auto points = lambda_sweep(exp, sc);

    auto out = open_out(rc, "sweep.tsv");
    write_sweep_tsv(points, out);
    write_curve_files(points, rc.out_dir);
    auto svg = open_out(rc, "sweep.svg");
    write_sweep_svg(points, svg);
    auto baseline = baseline_report(exp, rc.attributes, sc.base);
    auto base_out = open_out(rc, "baseline.tsv");
    write_eval_tsv(baseline, base_out);
    std::cout << "wrote sweep.tsv, curve files, sweep.svg, baseline.tsv to " << rc.out_dir
              << "\n";
  });

  // tau-sweep
  auto* tau_cmd = app.add_subcommand("tau-sweep", "smoothing temperature sweep (eco mode)");
  register_shared(tau_cmd, rc);
  std::vector<std::string> tau_grid = kv.list("tau-grid", {"0.1", "0.5", "1", "5", "10"});
  tau_cmd->add_option("--tau-grid", tau_grid, "temperature grid")->delimiter(',');
  tau_cmd->callback([&]() {
    Experiment exp = load_experiment(rc, rc.attributes, /*need_evaluators=*/true);
    auto rows = tau_sweep(exp, parse_double_list(tau_grid, "--tau-grid"), rc.attributes,
                          decode_config_for(rc, exp));
    auto out = open_out(rc, "tau_sweep.tsv");
    write_tau_tsv(rows, out);
    std::cout << "wrote tau_sweep.tsv to " << rc.out_dir << "\n";
  });

  // bench
  auto* bench = app.add_subcommand("bench", "per-token latency: static vs eco");
  register_shared(bench, rc);
  int bench_reps = static_cast<int>(kv.num("reps", 5));
  int bench_sample = static_cast<int>(kv.num("sample", 32));
  bench->add_option("--reps", bench_reps, "timed repetitions (median reported)");
  bench->add_option("--sample", bench_sample, "number of test examples to decode");
  bench->callback([&]() {
    Experiment exp = load_experiment(rc, rc.attributes, /*need_evaluators=*/false);
    auto report = latency_benchmark(exp, rc.attributes, decode_config_for(rc, exp),
                                    bench_reps, static_cast<size_t>(bench_sample));
    auto out = open_out(rc, "bench.tsv");
    write_latency_tsv(report, out);
    std::cout << "static ms/token: " << fmt_double(report.static_ms_per_token) << "\n";
    std::cout << "eco ms/token: " << fmt_double(report.eco_ms_per_token) << "\n";
    std::cout << "overhead: " << fmt_double(report.overhead) << "\n";
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "decode the test split and report metrics");
  register_shared(eval_cmd, rc);
  bool eval_uncontrolled = false;
  bool eval_dist_per_response = false;
  eval_cmd->add_flag("--uncontrolled", eval_uncontrolled,
                     "decode without attribute control (baseline row)");
  eval_cmd->add_flag("--dist-per-response", eval_dist_per_response,
                     "average per-response distinct-n instead of pooling");
  eval_cmd->callback([&]() {
    Experiment exp = load_experiment(rc, rc.attributes, /*need_evaluators=*/true);
    DecodeConfig dc = decode_config_for(rc, exp);
    EvalReport report =
        eval_uncontrolled
            ? baseline_report(exp, rc.attributes, dc, eval_dist_per_response)
            : evaluate_config(exp, rc.attributes, dc, eval_dist_per_response);
    auto out = open_out(rc, "eval.tsv");
    write_eval_tsv(report, out);
    write_eval_tsv(report, std::cout);
  });

  // entropy-dump
  auto* ent = app.add_subcommand("entropy-dump",
                                 "per-token LM entropy table from eco decodes");
  register_shared(ent, rc);
  int ent_sample = static_cast<int>(kv.num("sample", 20));
  ent->add_option("--sample", ent_sample, "number of test examples to decode");
  ent->callback([&]() {
    Experiment exp = load_experiment(rc, rc.attributes, /*need_evaluators=*/false);
    DecodeConfig dc = decode_config_for(rc, exp);
    dc.mode = DecodeMode::eco;  // entropies are only computed on the eco path
    std::vector<DecodeTrace> traces;
    for (size_t i = 0; i < exp.test.size() && traces.size() < static_cast<size_t>(ent_sample);
         ++i) {
      const auto& ex = exp.test[i];
      bool covered = true;
      for (const auto& attr : rc.attributes) covered = covered && ex.attributes.count(attr);
      if (!covered) continue;
      DecodeConfig one = dc;
      one.targets.clear();
      for (const auto& attr : rc.attributes) one.targets.push_back({attr, ex.attributes.at(attr)});
      traces.push_back(decode(exp.lm, exp.controllers, ex.history, one));
    }
    auto out = open_out(rc, "entropy.tsv");
    export_entropy_summary(traces, exp.vocab, out);
    std::cout << "wrote entropy.tsv to " << rc.out_dir << "\n";
  });

  std::vector<const char*> argv;
  argv.push_back("ecodec");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return run_cli_impl(args);
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace ecodec
