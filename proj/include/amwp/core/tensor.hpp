#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace amwp::core {

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension list of a tensor. Rank is at most 2; rank 0 is a scalar.
class Shape {
 public:
  static constexpr std::size_t kMaxRank = 2;

  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(const std::vector<std::size_t>& dims);

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t i) const { return dims_[i]; }
  std::size_t numel() const;
  std::vector<std::size_t> dims() const;
  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b);

 private:
  std::array<std::size_t, kMaxRank> dims_{};
  std::size_t rank_ = 0;
};

/// Dense row-major tensor of doubles.
struct Tensor {
  Shape shape;
  std::vector<double> values;

  Tensor() : values(1, 0.0) {}
  Tensor(Shape s, std::vector<double> v);

  static Tensor zeros(Shape s);
  static Tensor scalar(double v);
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  std::size_t rank() const { return shape.rank(); }
  std::size_t rows() const { return shape.rank() == 2 ? shape[0] : 1; }
  std::size_t cols() const { return shape.rank() == 0 ? 1 : shape[shape.rank() - 1]; }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  double item() const;

  bool all_finite() const;
  void fill(double v);
};

}  // namespace amwp::core
