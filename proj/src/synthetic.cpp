#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "lexembed/corpus.hpp"
#include "lexembed/errors.hpp"
#include "lexembed/rng.hpp"

namespace lexembed {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::size_t kSuccessors = 6;
constexpr std::size_t kConfusables = 3;
constexpr double kFollowBigram = 0.85;
constexpr double kPeriodRate = 0.08;
constexpr double kMisspellShare = 0.6;
constexpr double kNoiseFraction = 0.05;

class Sampler {
 public:
  explicit Sampler(const std::vector<double>& weights) {
    cumulative_.reserve(weights.size());
    double total = 0.0;
    for (double w : weights) cumulative_.push_back(total += w);
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

std::string make_word(Rng& rng) {
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kConsonants[rng.below(kConsonants.size())];
    w += kVowels[rng.below(kVowels.size())];
  }
  if (rng.bernoulli(0.3)) w += kConsonants[rng.below(kConsonants.size())];
  return w;
}

// A plausible learner misspelling that is not itself a vocabulary word.
std::string misspell(const std::string& word, Rng& rng, const std::set<std::string>& taken) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::string w = word;
    const std::size_t i = rng.below(w.size() - 1);
    switch (rng.below(3)) {
      case 0: std::swap(w[i], w[i + 1]); break;
      case 1: w.insert(w.begin() + static_cast<std::ptrdiff_t>(i), w[i]); break;
      default: w[i] = kVowels.find(w[i]) != std::string_view::npos
                          ? kVowels[(kVowels.find(w[i]) + 1) % kVowels.size()]
                          : w[i];
    }
    if (w != word && !taken.contains(w)) return w;
  }
  std::string w = word + "h";
  while (taken.contains(w)) w += "h";
  return w;
}

struct Language {
  std::vector<std::string> words;
  std::vector<std::string> misspellings;
  std::vector<std::vector<std::size_t>> confusables;
  std::vector<std::vector<std::size_t>> successors;
  std::vector<double> unigram_weights;
};

Language make_language(std::size_t vocab_size, Rng& rng) {
  Language lang;
  std::set<std::string> taken;
  while (lang.words.size() < vocab_size) {
    auto w = make_word(rng);
    if (w == kAnswerEnd || !taken.insert(w).second) continue;
    lang.words.push_back(std::move(w));
  }
  for (const auto& w : lang.words) {
    auto m = misspell(w, rng, taken);
    taken.insert(m);
    lang.misspellings.push_back(std::move(m));
  }
  for (std::size_t r = 0; r < vocab_size; ++r) {
    lang.unigram_weights.push_back(1.0 / static_cast<double>(r + 1));
  }
  const Sampler unigram(lang.unigram_weights);
  lang.successors.resize(vocab_size);
  lang.confusables.resize(vocab_size);
  for (std::size_t w = 0; w < vocab_size; ++w) {
    for (std::size_t k = 0; k < kSuccessors; ++k) lang.successors[w].push_back(unigram.draw(rng));
    while (lang.confusables[w].size() < kConfusables) {
      const std::size_t c = rng.below(vocab_size);
      if (c != w) lang.confusables[w].push_back(c);
    }
  }
  return lang;
}

std::string error_tag(std::string_view type, std::string_view wrong, std::string_view right) {
  std::string out = "<e type=\"";
  out += type;
  out += "\"><i>";
  out += wrong;
  out += "</i><c>";
  out += right;
  out += "</c></e>";
  return out;
}

}  // namespace

std::vector<Script> generate_synthetic_corpus(const SyntheticParams& p) {
  if (p.vocab_size < 50) throw ParameterError("synthetic vocabulary needs at least 50 words");
  if (p.mean_len < 20) throw ParameterError("synthetic mean script length must be at least 20");
  if (p.script_count == 0) throw ParameterError("synthetic corpus needs at least one script");
  if (!(p.error_rate_lo >= 0.0 && p.error_rate_lo <= p.error_rate_hi && p.error_rate_hi <= 0.5)) {
    throw ParameterError("error rate range must satisfy 0 <= lo <= hi <= 0.5");
  }
  if (!(p.score_range.min < p.score_range.max)) throw ParameterError("score range is empty");

  Rng rng(p.seed);
  const Language lang = make_language(p.vocab_size, rng);
  const Sampler unigram(lang.unigram_weights);
  std::vector<double> successor_weights;
  for (std::size_t k = 0; k < kSuccessors; ++k) successor_weights.push_back(1.0 / static_cast<double>(k + 1));
  const Sampler successor(successor_weights);
  const double span = p.score_range.max - p.score_range.min;

  std::vector<Script> corpus;
  corpus.reserve(p.script_count);
  for (std::size_t s = 0; s < p.script_count; ++s) {
    const double error_rate = p.error_rate_lo == p.error_rate_hi
                                  ? p.error_rate_lo
                                  : rng.uniform(p.error_rate_lo, p.error_rate_hi);
    const auto length = static_cast<std::size_t>(
        std::lround(static_cast<double>(p.mean_len) * rng.uniform(0.75, 1.25)));
    const std::size_t first_len = length / 2;

    std::vector<std::string> answers;
    std::size_t words = 0;
    std::size_t flagged = 0;
    for (const std::size_t answer_len : {first_len, length - first_len}) {
      std::string text;
      std::size_t prev = unigram.draw(rng);
      for (std::size_t i = 0; i < answer_len; ++i) {
        const std::size_t w = (i == 0 || !rng.bernoulli(kFollowBigram))
                                  ? unigram.draw(rng)
                                  : lang.successors[prev][successor.draw(rng)];
        prev = w;
        if (!text.empty()) text += ' ';
        ++words;
        if (rng.bernoulli(error_rate)) {
          ++flagged;
          if (rng.bernoulli(kMisspellShare)) {
            text += error_tag("S", lang.misspellings[w], lang.words[w]);
          } else {
            const std::size_t c = lang.confusables[w][rng.below(kConfusables)];
            text += error_tag("R", lang.words[c], lang.words[w]);
          }
        } else {
          text += lang.words[w];
        }
        if (i + 1 < answer_len && rng.bernoulli(kPeriodRate)) {
          text += " .";
          ++words;
        }
      }
      text += " .";
      ++words;
      answers.push_back(std::move(text));
    }

    const double ratio = static_cast<double>(flagged) / static_cast<double>(words);
    const double noisy = p.score_range.max - span * ratio + kNoiseFraction * span * rng.normal();
    const double score = std::clamp(noisy, p.score_range.min, p.score_range.max);

    char id[32];
    std::snprintf(id, sizeof id, "syn-%05zu", s);
    corpus.push_back(parse_annotated_script(join_answers(answers), id, score, p.score_range));
  }
  return corpus;
}

}  // namespace lexembed
