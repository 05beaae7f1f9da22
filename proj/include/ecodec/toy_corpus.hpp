#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ecodec/corpus.hpp"

namespace ecodec {

// Templated two-attribute dialogue generator used for the bundled corpus.
// Each response realizes one dialog-act template with one emotion-bearing
// word slot, so both attributes are recoverable from the surface form while
// the language model stays genuinely uncertain at the slot positions.
struct ToyCorpusOptions {
  int n = 2000;
  uint64_t seed = 13;
  // Fraction of responses whose slot word is a neutral state word, and
  // fraction of emotion labels resampled at random. Zeroing both yields a
  // cleanly separable corpus.
  double covert_rate = 0.4;
  double label_noise = 0.15;
};

std::vector<RawExample> generate_toy_corpus(const ToyCorpusOptions& options);
void write_jsonl(const std::vector<RawExample>& examples, const std::filesystem::path& path);

}  // namespace ecodec
