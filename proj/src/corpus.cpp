#include "ecodec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ecodec/util.hpp"
#include "json.hpp"

namespace ecodec {

Vocabulary::Vocabulary()
    : Vocabulary(std::vector<std::string>{std::string(kBosStr), std::string(kEosStr),
                                          std::string(kUnkStr)}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : strings_(std::move(tokens)) {
  if (strings_.size() < 3 || strings_[0] != kBosStr || strings_[1] != kEosStr ||
      strings_[2] != kUnkStr)
    throw std::invalid_argument("vocabulary must start with <bos>, <eos>, <unk>");
  for (size_t i = 0; i < strings_.size(); ++i) {
    auto [it, inserted] = ids_.emplace(strings_[i], static_cast<TokenId>(i));
    if (!inserted) throw std::invalid_argument("duplicate vocabulary token: " + strings_[i]);
  }
}

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::string_of(TokenId id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id out of range");
  return strings_[static_cast<size_t>(id)];
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

uint64_t Vocabulary::content_hash() const {
  uint64_t h = fnv1a64("");
  for (const auto& s : strings_) {
    h = fnv1a64(s, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write vocabulary file: " + path.string());
  for (const auto& s : strings_) out << s << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open vocabulary file: " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  while (!tokens.empty() && tokens.back().empty()) tokens.pop_back();
  if (tokens.size() < 3) throw UserError("vocabulary file too short: " + path.string());
  return Vocabulary(std::move(tokens));
}

static bool is_space_byte(unsigned char c) { return std::isspace(c) != 0; }
static bool is_punct_byte(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    while (i < n && is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
    size_t start = i;
    while (i < n && !is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    std::string chunk(text.substr(start, i - start));
    for (char& c : chunk) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (chunk == Vocabulary::kBosStr || chunk == Vocabulary::kEosStr ||
        chunk == Vocabulary::kUnkStr) {
      out.push_back(chunk);
      continue;
    }
    std::string word;
    for (char c : chunk) {
      if (is_punct_byte(static_cast<unsigned char>(c))) {
        if (!word.empty()) {
          out.push_back(word);
          word.clear();
        }
        out.push_back(std::string(1, c));
      } else {
        word.push_back(c);
      }
    }
    if (!word.empty()) out.push_back(word);
  }
  return out;
}

TokenSeq tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenSeq ids;
  for (const auto& tok : split_tokens(text)) ids.push_back(vocab.id_of(tok));
  return ids;
}

std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += vocab.string_of(ids[i]);
  }
  return out;
}

std::vector<RawExample> load_raw_dataset(const std::filesystem::path& path,
                                         const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open dataset: " + path.string());
  std::vector<RawExample> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool blank = true;
    for (char c : line)
      if (!is_space_byte(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    if (blank) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw UserError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    auto fail = [&](const std::string& msg) {
      throw UserError("line " + std::to_string(line_no) + ": " + msg);
    };
    if (!j.is_object()) fail("expected a JSON object");
    for (const auto& item : j.items())
      if (item.key() != "history" && item.key() != "response" && item.key() != "attributes")
        fail("unexpected key '" + item.key() + "'");
    if (!j.contains("history") || !j["history"].is_array()) fail("missing 'history' array");
    if (!j.contains("response") || !j["response"].is_string()) fail("missing 'response' string");
    if (!j.contains("attributes") || !j["attributes"].is_object())
      fail("missing 'attributes' object");

    RawExample ex;
    for (const auto& h : j["history"]) {
      if (!h.is_string()) fail("'history' entries must be strings");
      ex.history.push_back(h.get<std::string>());
    }
    ex.response = j["response"].get<std::string>();
    if (split_tokens(ex.response).empty()) fail("empty response");
    for (const auto& item : j["attributes"].items()) {
      if (!item.value().is_string()) fail("attribute values must be strings");
      auto it = schema.find(item.key());
      if (it == schema.end()) fail("unknown attribute '" + item.key() + "'");
      const std::string label = item.value().get<std::string>();
      if (std::find(it->second.begin(), it->second.end(), label) == it->second.end())
        fail("unknown label '" + label + "' for attribute '" + item.key() + "'");
      ex.attributes[item.key()] = label;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<DialogueExample> encode_examples(const std::vector<RawExample>& raw,
                                             const Vocabulary& vocab) {
  std::vector<DialogueExample> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    DialogueExample ex;
    for (const auto& utt : r.history) ex.history.push_back(tokenize(utt, vocab));
    ex.response = tokenize(r.response, vocab);
    ex.response.push_back(Vocabulary::kEos);
    ex.attributes = r.attributes;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<DialogueExample> load_dataset(const std::filesystem::path& path,
                                          const AttributeSchema& schema,
                                          const Vocabulary& vocab) {
  return encode_examples(load_raw_dataset(path, schema), vocab);
}

Vocabulary build_vocabulary(const std::vector<RawExample>& raw, int min_count) {
  if (min_count < 0) throw std::invalid_argument("min_count must be >= 0");
  std::unordered_map<std::string, int64_t> freq;
  for (const auto& ex : raw) {
    for (const auto& utt : ex.history)
      for (const auto& tok : split_tokens(utt)) ++freq[tok];
    for (const auto& tok : split_tokens(ex.response)) ++freq[tok];
  }
  freq.erase(std::string(Vocabulary::kBosStr));
  freq.erase(std::string(Vocabulary::kEosStr));
  freq.erase(std::string(Vocabulary::kUnkStr));

  std::vector<std::pair<std::string, int64_t>> kept;
  for (const auto& [tok, count] : freq)
    if (count >= min_count) kept.emplace_back(tok, count);
  if (kept.empty()) throw UserError("cannot build vocabulary from an empty corpus");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> tokens{std::string(Vocabulary::kBosStr),
                                  std::string(Vocabulary::kEosStr),
                                  std::string(Vocabulary::kUnkStr)};
  for (auto& [tok, count] : kept) tokens.push_back(std::move(tok));
  return Vocabulary(std::move(tokens));
}

std::vector<PrefixInstance> enumerate_prefixes(const DialogueExample& example,
                                               const std::string& attribute) {
  auto it = example.attributes.find(attribute);
  if (it == example.attributes.end())
    throw std::invalid_argument("example has no attribute '" + attribute + "'");
  std::vector<PrefixInstance> out;
  out.reserve(example.response.size());
  for (size_t len = 1; len <= example.response.size(); ++len) {
    PrefixInstance inst;
    inst.history = example.history;
    inst.prefix.assign(example.response.begin(), example.response.begin() + len);
    inst.label = it->second;
    out.push_back(std::move(inst));
  }
  return out;
}

SplitIndices split_indices(size_t n, std::array<double, 3> ratios, uint64_t seed) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must sum to 1, got " + fmt_double(sum));
  for (double r : ratios)
    if (r < 0.0) throw std::invalid_argument("split ratios must be nonnegative");

  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = n; i > 1; --i) {
    size_t j = static_cast<size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }

  auto n_valid = static_cast<size_t>(std::llround(static_cast<double>(n) * ratios[1]));
  auto n_test = static_cast<size_t>(std::llround(static_cast<double>(n) * ratios[2]));
  if (n_valid + n_test > n) n_test = n - std::min(n, n_valid);
  size_t n_train = n - n_valid - n_test;

  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + n_train);
  out.valid.assign(perm.begin() + n_train, perm.begin() + n_train + n_valid);
  out.test.assign(perm.begin() + n_train + n_valid, perm.end());
  return out;
}

TokenSeq lm_context(const std::vector<TokenSeq>& history) {
  TokenSeq out{Vocabulary::kBos};
  for (const auto& utt : history) {
    out.insert(out.end(), utt.begin(), utt.end());
    out.push_back(Vocabulary::kEos);
  }
  return out;
}

TokenSeq lm_training_sequence(const DialogueExample& example) {
  TokenSeq out = lm_context(example.history);
  out.insert(out.end(), example.response.begin(), example.response.end());
  return out;
}

AttributeSchema default_schema() {
  return AttributeSchema{
      {"emotion", {"anger", "disgust", "fear", "happiness", "sadness", "surprise"}},
      {"dialog-act", {"inform", "question", "directive", "commissive"}},
  };
}

}  // namespace ecodec
