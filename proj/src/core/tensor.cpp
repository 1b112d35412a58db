#include "amwp/core/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace amwp::core {

Shape::Shape(std::initializer_list<std::size_t> dims) {
  if (dims.size() > kMaxRank) throw ShapeError("shape rank " + std::to_string(dims.size()) + " exceeds 2");
  std::copy(dims.begin(), dims.end(), dims_.begin());
  rank_ = dims.size();
}

Shape::Shape(const std::vector<std::size_t>& dims) {
  if (dims.size() > kMaxRank) throw ShapeError("shape rank " + std::to_string(dims.size()) + " exceeds 2");
  std::copy(dims.begin(), dims.end(), dims_.begin());
  rank_ = dims.size();
}

std::size_t Shape::numel() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
  return n;
}

std::vector<std::size_t> Shape::dims() const { return {dims_.begin(), dims_.begin() + rank_}; }

std::string Shape::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) s += ",";
    s += std::to_string(dims_[i]);
  }
  return s + "]";
}

bool operator==(const Shape& a, const Shape& b) {
  if (a.rank_ != b.rank_) return false;
  for (std::size_t i = 0; i < a.rank_; ++i)
    if (a.dims_[i] != b.dims_[i]) return false;
  return true;
}

Tensor::Tensor(Shape s, std::vector<double> v) : shape(s), values(std::move(v)) {
  if (shape.numel() != values.size())
    throw ShapeError("tensor of shape " + shape.str() + " given " + std::to_string(values.size()) + " values");
}

Tensor Tensor::zeros(Shape s) { return Tensor(s, std::vector<double>(s.numel(), 0.0)); }

Tensor Tensor::scalar(double v) { return Tensor(Shape{}, {v}); }

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(Shape{n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor(Shape{rows, cols}, std::move(v));
}

double Tensor::item() const {
  if (values.size() != 1) throw ShapeError("item() on tensor of shape " + shape.str());
  return values[0];
}

bool Tensor::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

void Tensor::fill(double v) { std::fill(values.begin(), values.end(), v); }

}  // namespace amwp::core
