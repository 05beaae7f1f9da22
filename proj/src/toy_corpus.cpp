#include "ecodec/toy_corpus.hpp"

#include <fstream>
#include <random>
#include <string>

#include "ecodec/util.hpp"
#include "json.hpp"

namespace ecodec {

namespace {

struct Weighted {
  const char* value;
  double weight;
};

const Weighted kEmotions[] = {
    {"happiness", 1.0 / 6}, {"sadness", 1.0 / 6}, {"anger", 1.0 / 6},
    {"fear", 1.0 / 6},      {"surprise", 1.0 / 6}, {"disgust", 1.0 / 6},
};

const char* const kEmotionWords[6][5] = {
    {"happy", "glad", "delighted", "cheerful", "joyful"},
    {"sad", "unhappy", "gloomy", "miserable", "heartbroken"},
    {"angry", "furious", "mad", "annoyed", "outraged"},
    {"afraid", "scared", "terrified", "anxious", "nervous"},
    {"surprised", "amazed", "astonished", "stunned", "shocked"},
    {"disgusted", "gross", "nasty", "revolted", "queasy"},
};
const double kWordWeights[5] = {0.2, 0.2, 0.2, 0.2, 0.2};

// Covert responses use a neutral state word instead of an emotion-bearing
// one; together with label noise this keeps the attribute signal partial, so
// control strength has something to trade off against: the LM prefers the
// heavy neutral words at the slot and control must spend strength to
// displace them.
const Weighted kNeutralWords[] = {
    {"tired", 0.3}, {"busy", 0.3}, {"quiet", 0.2}, {"fine", 0.1}, {"okay", 0.1}};

const Weighted kActs[] = {
    {"inform", 0.40}, {"question", 0.25}, {"directive", 0.20}, {"commissive", 0.15},
};

// <E> is the emotion-word slot, <F> a neutral filler slot.
const char* const kTemplates[4][3] = {
    {"i feel so <E> <F> .", "that news made me <E> <F> .", "my day left me <E> <F> ."},
    {"do you feel <E> <F> ?", "why do you seem <E> <F> ?", "are you <E> about it ?"},
    {"please stop being <E> <F> .", "try not to act <E> <F> .",
     "do not get <E> about this ."},
    {"i will stay <E> <F> .", "i promise to remain <E> <F> .",
     "i will not feel <E> again ."},
};
const double kTemplateWeights[3] = {0.5, 0.3, 0.2};

const Weighted kFillers[] = {
    {"today", 0.30}, {"now", 0.25}, {"lately", 0.20}, {"somehow", 0.15}, {"honestly", 0.10},
};

const char* const kHistories[] = {
    "how are you doing",          "tell me about your day",
    "what happened at work",      "i want to hear everything",
    "lets talk for a minute",     "what is on your mind",
    "you seem different tonight", "give me the short version",
    "we have not talked in days", "how did the meeting go",
    "tell me the truth",          "what did the doctor say",
    "did you read my message",    "say something already",
    "i heard the news too",       "how was the trip",
};

double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T, size_t N>
size_t draw_weighted(std::mt19937_64& rng, const T (&items)[N],
                     const double* weights = nullptr) {
  double u = next_unit(rng);
  double acc = 0.0;
  for (size_t i = 0; i < N; ++i) {
    double w;
    if constexpr (std::is_same_v<T, Weighted>)
      w = items[i].weight;
    else
      w = weights[i];
    acc += w;
    if (u < acc) return i;
  }
  return N - 1;
}

std::string substitute(std::string text, const std::string& marker, const std::string& value) {
  auto pos = text.find(marker);
  if (pos != std::string::npos) text.replace(pos, marker.size(), value);
  return text;
}

}  // namespace

std::vector<RawExample> generate_toy_corpus(const ToyCorpusOptions& options) {
  if (options.n < 1) throw std::invalid_argument("corpus size must be >= 1");
  std::mt19937_64 rng(options.seed);
  std::vector<RawExample> out;
  out.reserve(static_cast<size_t>(options.n));

  for (int i = 0; i < options.n; ++i) {
    size_t emo = draw_weighted(rng, kEmotions);
    size_t act = draw_weighted(rng, kActs);
    size_t tpl = draw_weighted(rng, kTemplates[act], kTemplateWeights);
    size_t word = draw_weighted(rng, kEmotionWords[emo], kWordWeights);
    size_t filler = draw_weighted(rng, kFillers);
    bool covert = next_unit(rng) < options.covert_rate;
    size_t neutral = draw_weighted(rng, kNeutralWords);

    std::string response = kTemplates[act][tpl];
    response = substitute(response, "<E>",
                          covert ? kNeutralWords[neutral].value : kEmotionWords[emo][word]);
    response = substitute(response, "<F>", kFillers[filler].value);

    size_t label = emo;
    if (next_unit(rng) < options.label_noise) label = rng() % std::size(kEmotions);

    RawExample ex;
    size_t h1 = rng() % std::size(kHistories);
    ex.history.push_back(kHistories[h1]);
    if (next_unit(rng) < 0.3) {
      size_t h2 = rng() % std::size(kHistories);
      if (h2 == h1) h2 = (h2 + 1) % std::size(kHistories);
      ex.history.push_back(kHistories[h2]);
    }
    ex.response = std::move(response);
    ex.attributes["emotion"] = kEmotions[label].value;
    ex.attributes["dialog-act"] = kActs[act].value;
    out.push_back(std::move(ex));
  }
  return out;
}

void write_jsonl(const std::vector<RawExample>& examples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write corpus file: " + path.string());
  for (const auto& ex : examples) {
    nlohmann::json j;
    j["history"] = ex.history;
    j["response"] = ex.response;
    j["attributes"] = ex.attributes;
    out << j.dump() << '\n';
  }
}

}  // namespace ecodec
