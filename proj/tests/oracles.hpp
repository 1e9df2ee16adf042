#pragma once

// Independent textbook implementations used as test oracles.

#include <cmath>
#include <span>
#include <vector>

namespace oracles {

// Covariance over the product of standard deviations, each from its own pass.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx) * (y[i] - my);
  for (std::size_t i = 0; i < x.size(); ++i) vx += (x[i] - mx) * (x[i] - mx);
  for (std::size_t i = 0; i < x.size(); ++i) vy += (y[i] - my) * (y[i] - my);
  return cov / (std::sqrt(vx) * std::sqrt(vy));
}

inline double pearson(std::initializer_list<double> x, std::initializer_list<double> y) {
  return pearson(std::span<const double>(x.begin(), x.size()), std::span<const double>(y.begin(), y.size()));
}

// Precision@k at every positive, where the rank of item i counts the items
// with a strictly higher score plus equal-scored items that come earlier.
inline double average_precision(std::span<const int> labels, std::span<const double> scores) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) ++r;
    }
    rank[i] = r;
  }
  // Summed from the top rank down so rounding matches a sequential sweep.
  std::vector<double> precision_at(n + 1, -1.0);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 1) continue;
    ++positives;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[j] == 1 && rank[j] <= rank[i]) ++hits;
    }
    precision_at[rank[i]] = static_cast<double>(hits) / static_cast<double>(rank[i]);
  }
  double sum = 0;
  for (double p : precision_at) {
    if (p >= 0.0) sum += p;
  }
  return sum / static_cast<double>(positives);
}

}  // namespace oracles
