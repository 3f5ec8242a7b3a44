#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vqfont/common.hpp"

namespace vqfont::nn {

// Dense row-major double tensor with shared storage. Copies are shallow;
// use clone() for an independent buffer.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);  // zero-filled

  // Uninitialized storage for buffers every element of which is written
  // before being read.
  static Tensor uninit(std::vector<int64_t> shape);
  static Tensor zeros(std::vector<int64_t> shape);
  static Tensor full(std::vector<int64_t> shape, double value);
  static Tensor from(std::vector<double> values, std::vector<int64_t> shape);
  static Tensor randn(Rng& rng, std::vector<int64_t> shape, double stddev = 1.0);
  static Tensor uniform(Rng& rng, std::vector<int64_t> shape, double lo, double hi);

  bool defined() const { return store_ != nullptr; }
  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t ndim() const { return static_cast<int64_t>(shape_.size()); }
  int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  int64_t numel() const { return numel_; }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  double* data() { return store_.get(); }
  const double* data() const { return store_.get(); }
  double& operator[](int64_t i) { return store_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return store_[static_cast<size_t>(i)]; }

  // 2D accessors for tests and glue code (row-major).
  double& at(int64_t i, int64_t j) { return store_[static_cast<size_t>(i * dim(1) + j)]; }
  double at(int64_t i, int64_t j) const { return store_[static_cast<size_t>(i * dim(1) + j)]; }

  Tensor clone() const;
  // Shares storage; element count must match.
  Tensor reshaped(std::vector<int64_t> shape) const;

  void fill(double value);
  void zero() { fill(0.0); }
  void add_(const Tensor& other);          // this += other
  void add_scaled_(const Tensor& other, double s);  // this += s * other
  double abs_max() const;
  bool all_finite() const;
  uint64_t bytes_hash(uint64_t seed = 0xcbf29ce484222325ull) const;

  std::string shape_str() const;

 private:
  std::vector<int64_t> shape_;
  int64_t numel_ = 0;
  std::shared_ptr<double[]> store_;
};

}  // namespace vqfont::nn
