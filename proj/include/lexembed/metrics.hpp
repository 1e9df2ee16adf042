#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexembed/corpus.hpp"
#include "lexembed/embeddings.hpp"
#include "lexembed/pretrain.hpp"

namespace lexembed {

struct EvalReport {
  double pearson = 0.0;
  double spearman = 0.0;
  double rmse = 0.0;  // on the original score scale
  std::size_t n = 0;
};

struct ApReport {
  double ap = 0.0;
  std::size_t positives = 0;
  std::size_t total = 0;
};

// Product-moment correlation. Throws UndefinedMetricError for fewer than two
// points or a constant input, DimensionError for unequal lengths.
double pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

double spearman(std::span<const double> x, std::span<const double> y);

double rmse(std::span<const double> pred, std::span<const double> gold);

// All three scoring metrics; correlations must be defined.
EvalReport evaluate(std::span<const double> pred, std::span<const double> gold);

// Non-interpolated AP of the positive class (label 1), ranking by score
// descending with ties broken by original index.
ApReport average_precision(std::span<const int> labels, std::span<const double> scores);

// Mean AP of uniformly random scores over `draws` seeded draws.
double random_baseline_ap(std::span<const int> labels, std::size_t draws, std::uint64_t seed);

// 1 - eswe_forward, so that larger means more likely erroneous.
double eswe_errorness(const EsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids);

// alpha * rank + (1 - alpha) * script score, min-max scaled over the given
// ngrams and flipped so that larger means more likely erroneous.
std::vector<double> sswe_errorness(const SsweModel& model, const EmbeddingMatrix& emb,
                                   std::span<const std::vector<std::size_t>> ngrams, double alpha = 0.1);

// One label per extracted ngram: 1 when any token in the window is flagged.
std::vector<int> binary_ngram_labels(const Script& script, std::size_t n);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const ApReport& report);

}  // namespace lexembed
