#include "cfisac/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfisac::ad {

std::string Shape::str() const {
  return "(" + std::to_string(batch) + "," + std::to_string(rows) + "," +
         std::to_string(cols) + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.batch < 1 || shape.rows < 1 || shape.cols < 1) {
    throw std::invalid_argument("tensor extents must be positive, got " + shape.str());
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape.size()) {
    throw std::invalid_argument("tensor data size does not match shape " + shape.str());
  }
}

Tensor Tensor::randn(Shape shape, std::mt19937_64& rng, double scale) {
  Tensor t(shape);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : t.data_) v = scale * dist(rng);
  return t;
}

Tensor Tensor::uniform(Shape shape, std::mt19937_64& rng, double limit) {
  Tensor t(shape);
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& v : t.data_) v = dist(rng);
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Tensor::item() const {
  if (data_.size() != 1) throw std::logic_error("item() on tensor of shape " + shape_.str());
  return data_[0];
}

Tensor Tensor::sample(int b) const {
  if (b < 0 || b >= shape_.batch) throw std::out_of_range("batch index out of range");
  const std::size_t n = static_cast<std::size_t>(shape_.rows) * shape_.cols;
  std::vector<double> out(data_.begin() + b * n, data_.begin() + (b + 1) * n);
  return Tensor({1, shape_.rows, shape_.cols}, std::move(out));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) throw std::invalid_argument("shape mismatch in max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double squared_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v * v;
  return s;
}

}  // namespace cfisac::ad
