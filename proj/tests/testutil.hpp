#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ecodec/corpus.hpp"
#include "ecodec/harness.hpp"
#include "ecodec/toy_corpus.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("ecodec_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& content) {
  std::ofstream out(path);
  out << content;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Vocabulary over the given words (specials prepended automatically).
inline ecodec::Vocabulary vocab_of(std::vector<std::string> words) {
  std::vector<std::string> tokens{std::string(ecodec::Vocabulary::kBosStr),
                                  std::string(ecodec::Vocabulary::kEosStr),
                                  std::string(ecodec::Vocabulary::kUnkStr)};
  for (auto& w : words) tokens.push_back(std::move(w));
  return ecodec::Vocabulary(std::move(tokens));
}

inline ecodec::RawExample raw_example(std::vector<std::string> history, std::string response,
                                      std::map<std::string, std::string> attributes) {
  ecodec::RawExample ex;
  ex.history = std::move(history);
  ex.response = std::move(response);
  ex.attributes = std::move(attributes);
  return ex;
}

// One shared toy-corpus experiment for the heavier decoder/eval tests; built
// once, reused read-only (models are immutable).
inline const ecodec::Experiment& toy_experiment() {
  static const ecodec::Experiment exp = [] {
    auto raw = ecodec::generate_toy_corpus({2000, 13});
    ecodec::ExperimentOptions opt;
    opt.attributes = {"emotion", "dialog-act"};
    return ecodec::prepare_experiment(raw, ecodec::default_schema(), opt);
  }();
  return exp;
}

inline double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace testutil
