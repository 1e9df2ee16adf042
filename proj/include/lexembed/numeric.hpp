#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace lexembed {

using DenseVector = std::vector<double>;

// Row-major matrix of doubles with a shape fixed at construction.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

double squared_norm(std::span<const double> v);

bool all_finite(std::span<const double> v);

double sigmoid(double x);

// Entries i.i.d. uniform in [-scale, +scale].
DenseMatrix uniform_init(std::size_t rows, std::size_t cols, double scale, std::uint64_t seed);

// Returns param - lr * grad. Throws NumericError if the result is not finite.
DenseMatrix sgd_update(const DenseMatrix& param, const DenseMatrix& grad, double lr);

// In-place form used by the training loops.
void sgd_step(std::span<double> param, std::span<const double> grad, double lr);

struct GradCheckReport {
  std::string param_name;
  double max_rel_err = 0.0;
  double epsilon = 0.0;
  bool pass = false;
};

using ParamBundle = std::map<std::string, DenseMatrix>;
using BundleLoss = std::function<double(const ParamBundle&)>;

// Central-difference check of every entry of every parameter against the
// supplied analytic gradients. Relative error is |a - n| / max(|a|, |n|, 1e-8).
std::vector<GradCheckReport> finite_diff_check(const BundleLoss& loss_fn,
                                               const ParamBundle& params,
                                               const ParamBundle& analytic_grads,
                                               double epsilon, double tol);

bool all_pass(const std::vector<GradCheckReport>& reports);

}  // namespace lexembed
