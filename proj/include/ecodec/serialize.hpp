#pragma once

#include <filesystem>

#include "ecodec/classifier.hpp"
#include "ecodec/corpus.hpp"
#include "ecodec/ngram_lm.hpp"

namespace ecodec {

// Model files are a single JSON document: a self-describing header
// (format_version, kind, hyperparameters, vocab_hash) plus the integer count
// tables. Counts round-trip exactly, so a saved and reloaded model reproduces
// identical probabilities.

void save_lm(const NGramLM& lm, const Vocabulary& vocab, const std::filesystem::path& path);
NGramLM load_lm(const std::filesystem::path& path, const Vocabulary& vocab);

void save_classifier(const PrefixClassifier& clf, const Vocabulary& vocab,
                     const std::filesystem::path& path);
PrefixClassifier load_classifier(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace ecodec
