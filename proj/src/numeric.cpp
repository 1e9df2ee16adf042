#include "lexembed/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "lexembed/errors.hpp"
#include "lexembed/rng.hpp"

namespace lexembed {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw DimensionError("matrix " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                         " given " + std::to_string(values_.size()) + " values");
  }
}

bool DenseMatrix::all_finite() const { return lexembed::all_finite(values_); }

double dot(std::span<const double> a, std::span<const double> b) {
  // Four independent partial sums; the summation order is fixed, so results
  // stay bitwise reproducible.
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double squared_norm(std::span<const double> v) { return dot(v, v); }

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DenseMatrix uniform_init(std::size_t rows, std::size_t cols, double scale, std::uint64_t seed) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("uniform_init needs positive dimensions");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("uniform_init scale must be positive");
  }
  Rng rng(seed);
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

void sgd_step(std::span<double> param, std::span<const double> grad, double lr) {
  if (param.size() != grad.size()) {
    throw DimensionError("sgd_step shape mismatch");
  }
  for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
  if (!all_finite(param)) throw NumericError("sgd update produced a non-finite parameter");
}

DenseMatrix sgd_update(const DenseMatrix& param, const DenseMatrix& grad, double lr) {
  if (!param.same_shape(grad)) {
    throw DimensionError("sgd_update shape mismatch");
  }
  if (!(lr > 0.0)) throw ParameterError("learning rate must be positive");
  DenseMatrix out = param;
  sgd_step(out.values(), grad.values(), lr);
  return out;
}

std::vector<GradCheckReport> finite_diff_check(const BundleLoss& loss_fn,
                                               const ParamBundle& params,
                                               const ParamBundle& analytic_grads,
                                               double epsilon, double tol) {
  if (epsilon < 1e-6 || epsilon > 1e-3) {
    throw ParameterError("finite-difference epsilon must lie in [1e-6, 1e-3]");
  }
  std::vector<GradCheckReport> reports;
  ParamBundle probe = params;
  for (const auto& [name, value] : params) {
    const auto grad_it = analytic_grads.find(name);
    if (grad_it == analytic_grads.end() || !grad_it->second.same_shape(value)) {
      throw DimensionError("no analytic gradient of matching shape for '" + name + "'");
    }
    const DenseMatrix& analytic = grad_it->second;
    auto entries = probe.at(name).values();
    double worst = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const double saved = entries[i];
      entries[i] = saved + epsilon;
      const double up = loss_fn(probe);
      entries[i] = saved - epsilon;
      const double down = loss_fn(probe);
      entries[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("loss is not finite while probing '" + name + "'");
      }
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic.values()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    reports.push_back({name, worst, epsilon, worst <= tol});
  }
  return reports;
}

bool all_pass(const std::vector<GradCheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
}

}  // namespace lexembed
