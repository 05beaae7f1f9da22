#include "ecodec/serialize.hpp"

#include <fstream>

#include "ecodec/util.hpp"
#include "json.hpp"

namespace ecodec {

static constexpr int kFormatVersion = 1;

static nlohmann::json read_json_file(const std::filesystem::path& path,
                                     const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UserError("corrupt model file " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("kind", "") != kind)
    throw UserError(path.string() + " is not a " + kind + " file");
  if (j.value("format_version", -1) != kFormatVersion)
    throw UserError(path.string() + ": unsupported format version");
  return j;
}

static void check_vocab_hash(const nlohmann::json& j, const Vocabulary& vocab,
                             const std::filesystem::path& path) {
  if (j.value("vocab_hash", uint64_t{0}) != vocab.content_hash())
    throw UserError(path.string() + " was trained with a different vocabulary");
}

static std::vector<TokenId> decode_context_key(const std::string& key) {
  std::vector<TokenId> ids;
  for (size_t i = 0; i + 4 <= key.size(); i += 4) {
    uint32_t u = static_cast<uint8_t>(key[i]) |
                 (static_cast<uint32_t>(static_cast<uint8_t>(key[i + 1])) << 8) |
                 (static_cast<uint32_t>(static_cast<uint8_t>(key[i + 2])) << 16) |
                 (static_cast<uint32_t>(static_cast<uint8_t>(key[i + 3])) << 24);
    ids.push_back(static_cast<TokenId>(u));
  }
  return ids;
}

void save_lm(const NGramLM& lm, const Vocabulary& vocab, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "ngram_lm";
  j["order"] = lm.order();
  j["discount"] = lm.discount();
  j["vocab_size"] = lm.vocab_size();
  j["vocab_hash"] = vocab.content_hash();

  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : lm.levels()) {
    // Sort contexts for byte-stable output.
    std::vector<const NGramLM::Level::value_type*> entries;
    entries.reserve(level.size());
    for (const auto& kv : level) entries.push_back(&kv);
    std::sort(entries.begin(), entries.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });
    nlohmann::json jl = nlohmann::json::array();
    for (const auto* kv : entries) {
      nlohmann::json e;
      e["ctx"] = decode_context_key(kv->first);
      nlohmann::json cont = nlohmann::json::array();
      for (const auto& [tok, c] : kv->second.continuations)
        cont.push_back(nlohmann::json::array({tok, c}));
      e["cont"] = std::move(cont);
      jl.push_back(std::move(e));
    }
    levels.push_back(std::move(jl));
  }
  j["levels"] = std::move(levels);

  std::ofstream out(path);
  if (!out) throw UserError("cannot write model file: " + path.string());
  out << j.dump() << '\n';
}

NGramLM load_lm(const std::filesystem::path& path, const Vocabulary& vocab) {
  nlohmann::json j = read_json_file(path, "ngram_lm");
  check_vocab_hash(j, vocab, path);
  int order = j.at("order").get<int>();
  double discount = j.at("discount").get<double>();
  auto vocab_size = j.at("vocab_size").get<int32_t>();
  if (vocab_size != vocab.size())
    throw UserError(path.string() + ": vocab size mismatch");

  std::vector<NGramLM::Level> levels;
  for (const auto& jl : j.at("levels")) {
    NGramLM::Level level;
    for (const auto& e : jl) {
      TokenSeq ctx = e.at("ctx").get<TokenSeq>();
      NGramLM::ContextStats stats;
      for (const auto& pair : e.at("cont")) {
        stats.continuations.emplace_back(pair.at(0).get<TokenId>(),
                                         pair.at(1).get<int64_t>());
        stats.total += pair.at(1).get<int64_t>();
      }
      level.emplace(NGramLM::context_key(ctx), std::move(stats));
    }
    levels.push_back(std::move(level));
  }
  return NGramLM(order, discount, vocab_size, std::move(levels));
}

void save_classifier(const PrefixClassifier& clf, const Vocabulary& vocab,
                     const std::filesystem::path& path) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "prefix_classifier";
  j["classes"] = clf.classes();
  j["hash_seed"] = clf.hash_seed();
  j["num_buckets"] = clf.num_buckets();
  j["vocab_hash"] = vocab.content_hash();
  j["class_instances"] = clf.class_instances();

  nlohmann::json counts = nlohmann::json::array();
  for (const auto& row : clf.bucket_counts()) {
    nlohmann::json sparse = nlohmann::json::array();
    for (size_t b = 0; b < row.size(); ++b)
      if (row[b] != 0) sparse.push_back(nlohmann::json::array({b, row[b]}));
    counts.push_back(std::move(sparse));
  }
  j["bucket_counts"] = std::move(counts);

  std::ofstream out(path);
  if (!out) throw UserError("cannot write model file: " + path.string());
  out << j.dump() << '\n';
}

PrefixClassifier load_classifier(const std::filesystem::path& path, const Vocabulary& vocab) {
  nlohmann::json j = read_json_file(path, "prefix_classifier");
  check_vocab_hash(j, vocab, path);
  auto classes = j.at("classes").get<std::vector<std::string>>();
  auto hash_seed = j.at("hash_seed").get<uint64_t>();
  auto num_buckets = j.at("num_buckets").get<int32_t>();
  auto class_instances = j.at("class_instances").get<std::vector<int64_t>>();

  std::vector<std::vector<int64_t>> bucket_counts;
  for (const auto& sparse : j.at("bucket_counts")) {
    std::vector<int64_t> row(static_cast<size_t>(num_buckets), 0);
    for (const auto& pair : sparse)
      row.at(pair.at(0).get<size_t>()) = pair.at(1).get<int64_t>();
    bucket_counts.push_back(std::move(row));
  }
  return PrefixClassifier(std::move(classes), hash_seed, num_buckets,
                          std::move(class_instances), std::move(bucket_counts));
}

}  // namespace ecodec
