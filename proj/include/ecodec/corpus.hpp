#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ecodec {

using TokenId = int32_t;
using TokenSeq = std::vector<TokenId>;

// Attribute name -> ordered set of admissible class labels.
using AttributeSchema = std::map<std::string, std::vector<std::string>>;

// Closed vocabulary. Ids 0..2 are reserved for BOS, EOS, UNK in that order;
// regular tokens follow, ordered by descending corpus frequency then
// lexicographically.
class Vocabulary {
public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr std::string_view kBosStr = "<bos>";
  static constexpr std::string_view kEosStr = "<eos>";
  static constexpr std::string_view kUnkStr = "<unk>";

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);  // full list incl. specials

  int32_t size() const { return static_cast<int32_t>(strings_.size()); }
  TokenId id_of(std::string_view token) const;  // UNK for unknown tokens
  const std::string& string_of(TokenId id) const;
  bool contains(std::string_view token) const;

  uint64_t content_hash() const;
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

private:
  std::vector<std::string> strings_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Surface tokenization: lowercase, whitespace split, punctuation characters
// detached as single-character tokens. The special surfaces <bos>/<eos>/<unk>
// are kept atomic so tokenize/detokenize round-trips on id sequences.
std::vector<std::string> split_tokens(std::string_view text);
TokenSeq tokenize(std::string_view text, const Vocabulary& vocab);
std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab);

struct RawExample {
  std::vector<std::string> history;
  std::string response;
  std::map<std::string, std::string> attributes;
};

struct DialogueExample {
  std::vector<TokenSeq> history;
  TokenSeq response;  // non-empty, last token is EOS
  std::map<std::string, std::string> attributes;
};

struct PrefixInstance {
  std::vector<TokenSeq> history;
  TokenSeq prefix;  // first j tokens of some response, j >= 1
  std::string label;
};

// JSON-lines loader. Each line: {"history":[...],"response":"...","attributes":{...}}.
// Malformed lines and labels outside the schema raise UserError naming the line.
std::vector<RawExample> load_raw_dataset(const std::filesystem::path& path,
                                         const AttributeSchema& schema);
std::vector<DialogueExample> encode_examples(const std::vector<RawExample>& raw,
                                             const Vocabulary& vocab);
std::vector<DialogueExample> load_dataset(const std::filesystem::path& path,
                                          const AttributeSchema& schema,
                                          const Vocabulary& vocab);

// Tokens with corpus frequency < min_count fall back to UNK.
Vocabulary build_vocabulary(const std::vector<RawExample>& raw, int min_count);

// One instance per response prefix r_{<=1} .. r_{<=N}, all carrying the
// example's label for `attribute`.
std::vector<PrefixInstance> enumerate_prefixes(const DialogueExample& example,
                                               const std::string& attribute);

struct SplitIndices {
  std::vector<size_t> train, valid, test;
};

// Deterministic shuffled partition; valid/test sizes round to nearest,
// remainder goes to train.
SplitIndices split_indices(size_t n, std::array<double, 3> ratios, uint64_t seed);

template <typename T>
std::array<std::vector<T>, 3> split_dataset(const std::vector<T>& items,
                                            std::array<double, 3> ratios,
                                            uint64_t seed) {
  SplitIndices idx = split_indices(items.size(), ratios, seed);
  std::array<std::vector<T>, 3> out;
  for (size_t i : idx.train) out[0].push_back(items[i]);
  for (size_t i : idx.valid) out[1].push_back(items[i]);
  for (size_t i : idx.test) out[2].push_back(items[i]);
  return out;
}

// Context/sequence assembly shared by LM training and decoding:
// [BOS, h_1..., EOS, h_2..., EOS, ..., h_m..., EOS] (+ response for training).
TokenSeq lm_context(const std::vector<TokenSeq>& history);
TokenSeq lm_training_sequence(const DialogueExample& example);

AttributeSchema default_schema();  // 6 emotion classes, 4 dialog-act classes

}  // namespace ecodec
