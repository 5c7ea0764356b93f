#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cfisac::ad {

/// Extent of a dense tensor with up to three axes: batch x rows x cols.
struct Shape {
  int batch = 1;
  int rows = 1;
  int cols = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(batch) * rows * cols;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Row-major dense real tensor. Element (b, r, c) lives at (b * rows + r) * cols + c.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1, 1, 1}, v); }
  /// Standard normal entries scaled by `scale`.
  static Tensor randn(Shape shape, std::mt19937_64& rng, double scale = 1.0);
  /// Uniform in [-limit, limit].
  static Tensor uniform(Shape shape, std::mt19937_64& rng, double limit);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  int batch() const { return shape_.batch; }
  int rows() const { return shape_.rows; }
  int cols() const { return shape_.cols; }

  double& operator()(int b, int r, int c) {
    return data_[(static_cast<std::size_t>(b) * shape_.rows + r) * shape_.cols + c];
  }
  double operator()(int b, int r, int c) const {
    return data_[(static_cast<std::size_t>(b) * shape_.rows + r) * shape_.cols + c];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);
  double item() const;  // requires size() == 1

  /// Sample `b` as a standalone (1, rows, cols) tensor.
  Tensor sample(int b) const;

 private:
  Shape shape_{1, 1, 1};
  std::vector<double> data_ = std::vector<double>(1, 0.0);
};

double max_abs_diff(const Tensor& a, const Tensor& b);
double squared_norm(const Tensor& t);

}  // namespace cfisac::ad
