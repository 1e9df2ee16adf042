#include "lexembed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lexembed/errors.hpp"
#include "lexembed/rng.hpp"

namespace lexembed {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("metric inputs differ in length");
  if (x.size() < 2) throw UndefinedMetricError("correlation needs at least two points");
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedMetricError("correlation of a constant input is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double rmse(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) throw DimensionError("rmse inputs differ in length");
  if (pred.empty()) throw UndefinedMetricError("rmse of an empty set");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += (pred[i] - gold[i]) * (pred[i] - gold[i]);
  return std::sqrt(total / static_cast<double>(pred.size()));
}

EvalReport evaluate(std::span<const double> pred, std::span<const double> gold) {
  return {pearson(pred, gold), spearman(pred, gold), rmse(pred, gold), pred.size()};
}

ApReport average_precision(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw DimensionError("AP inputs differ in length");
  ApReport report;
  report.total = labels.size();
  report.positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (report.positives == 0) throw UndefinedMetricError("AP needs at least one positive");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] != 1) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  report.ap = sum / static_cast<double>(report.positives);
  return report;
}

double random_baseline_ap(std::span<const int> labels, std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw ParameterError("random baseline needs at least one draw");
  Rng rng(seed);
  std::vector<double> scores(labels.size());
  double total = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    for (double& s : scores) s = rng.uniform();
    total += average_precision(labels, scores).ap;
  }
  return total / static_cast<double>(draws);
}

double eswe_errorness(const EsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids) {
  return 1.0 - eswe_forward(model, emb, ids);
}

std::vector<double> sswe_errorness(const SsweModel& model, const EmbeddingMatrix& emb,
                                   std::span<const std::vector<std::size_t>> ngrams, double alpha) {
  if (ngrams.size() < 2) throw UndefinedMetricError("min-max scaling needs at least two ngrams");
  std::vector<double> combined;
  combined.reserve(ngrams.size());
  for (const auto& ids : ngrams) {
    const auto s = sswe_forward(model, emb, ids);
    combined.push_back(alpha * s.rank + (1.0 - alpha) * s.script);
  }
  const auto [lo, hi] = std::minmax_element(combined.begin(), combined.end());
  const double low = *lo;
  const double spread = *hi - *lo;
  if (!(spread > 0.0)) throw UndefinedMetricError("all SSWE combined scores are identical");
  for (double& c : combined) c = 1.0 - (c - low) / spread;
  return combined;
}

std::vector<int> binary_ngram_labels(const Script& script, std::size_t n) {
  std::vector<int> labels;
  for (const auto& ng : extract_ngrams(script, n)) labels.push_back(ng.gold_error_score < 1.0 ? 1 : 0);
  return labels;
}

nlohmann::json to_json(const EvalReport& report) {
  return {{"pearson", report.pearson}, {"spearman", report.spearman}, {"rmse", report.rmse}, {"n", report.n}};
}

nlohmann::json to_json(const ApReport& report) {
  return {{"ap", report.ap}, {"positives", report.positives}, {"total", report.total}};
}

}  // namespace lexembed
