#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mter {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double squared_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense three-way array, last index fastest.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t d1, std::size_t d2, std::size_t d3, double fill = 0.0)
      : d1_(d1), d2_(d2), d3_(d3), data_(d1 * d2 * d3, fill) {}

  std::size_t dim1() const { return d1_; }
  std::size_t dim2() const { return d2_; }
  std::size_t dim3() const { return d3_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * d2_ + j) * d3_ + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * d2_ + j) * d3_ + k];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double squared_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
  }

 private:
  std::size_t d1_ = 0, d2_ = 0, d3_ = 0;
  std::vector<double> data_;
};

// Coordinate-format sparse three-way tensor. Values are non-negative and
// coordinates are unique; both are enforced at insertion.
class SparseTensor3 {
 public:
  struct Entry {
    std::size_t i1, i2, i3;
    double value;
  };

  SparseTensor3() = default;
  SparseTensor3(std::size_t d1, std::size_t d2, std::size_t d3) : d1_(d1), d2_(d2), d3_(d3) {}

  std::size_t dim1() const { return d1_; }
  std::size_t dim2() const { return d2_; }
  std::size_t dim3() const { return d3_; }

  void add(std::size_t i1, std::size_t i2, std::size_t i3, double value) {
    if (i1 >= d1_ || i2 >= d2_ || i3 >= d3_)
      throw std::out_of_range("SparseTensor3: index out of range");
    if (value < 0.0) throw std::invalid_argument("SparseTensor3: negative value");
    entries_.push_back({i1, i2, i3, value});
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t nnz() const { return entries_.size(); }

 private:
  std::size_t d1_ = 0, d2_ = 0, d3_ = 0;
  std::vector<Entry> entries_;
};

// n-mode product: contract `core` along `mode` (1, 2 or 3) with M.
// M has shape (out_dim x core_dim_along_mode).
Tensor3 mode_product(const Tensor3& core, const Matrix& m, int mode);

}  // namespace mter
