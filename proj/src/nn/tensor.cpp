#include "vqfont/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace vqfont::nn {

namespace {
int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    VQF_REQUIRE(d >= 0, "negative tensor dimension " << d);
    n *= d;
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int64_t> shape) {
  shape_ = std::move(shape);
  numel_ = shape_numel(shape_);
  store_ = std::shared_ptr<double[]>(new double[static_cast<size_t>(numel_)]());
}

Tensor Tensor::uninit(std::vector<int64_t> shape) {
  Tensor t;
  t.shape_ = std::move(shape);
  t.numel_ = shape_numel(t.shape_);
  t.store_ = std::shared_ptr<double[]>(new double[static_cast<size_t>(t.numel_)]);
  return t;
}

Tensor Tensor::zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<int64_t> shape, double value) {
  Tensor t = uninit(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::from(std::vector<double> values, std::vector<int64_t> shape) {
  VQF_REQUIRE(static_cast<int64_t>(values.size()) == shape_numel(shape),
              "value count " << values.size() << " does not match shape");
  Tensor t = uninit(std::move(shape));
  std::copy(values.begin(), values.end(), t.data());
  return t;
}

Tensor Tensor::randn(Rng& rng, std::vector<int64_t> shape, double stddev) {
  Tensor t = uninit(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  double* p = t.data();
  for (int64_t i = 0; i < t.numel(); ++i) p[i] = dist(rng);
  return t;
}

Tensor Tensor::uniform(Rng& rng, std::vector<int64_t> shape, double lo, double hi) {
  Tensor t = uninit(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  double* p = t.data();
  for (int64_t i = 0; i < t.numel(); ++i) p[i] = dist(rng);
  return t;
}

Tensor Tensor::clone() const {
  Tensor t = uninit(shape_);
  std::memcpy(t.data(), data(), static_cast<size_t>(numel_) * sizeof(double));
  return t;
}

Tensor Tensor::reshaped(std::vector<int64_t> shape) const {
  VQF_REQUIRE(shape_numel(shape) == numel_,
              "reshape " << shape_str() << " to incompatible element count");
  Tensor t;
  t.shape_ = std::move(shape);
  t.numel_ = numel_;
  t.store_ = store_;
  return t;
}

void Tensor::fill(double value) { std::fill(data(), data() + numel_, value); }

void Tensor::add_(const Tensor& other) {
  VQF_REQUIRE(numel_ == other.numel_,
              "add_: size mismatch " << shape_str() << " vs " << other.shape_str());
  const double* src = other.data();
  double* dst = data();
  for (int64_t i = 0; i < numel_; ++i) dst[i] += src[i];
}

void Tensor::add_scaled_(const Tensor& other, double s) {
  VQF_REQUIRE(numel_ == other.numel_, "add_scaled_: size mismatch");
  const double* src = other.data();
  double* dst = data();
  for (int64_t i = 0; i < numel_; ++i) dst[i] += s * src[i];
}

double Tensor::abs_max() const {
  double m = 0.0;
  const double* p = data();
  for (int64_t i = 0; i < numel_; ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

bool Tensor::all_finite() const {
  const double* p = data();
  for (int64_t i = 0; i < numel_; ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

uint64_t Tensor::bytes_hash(uint64_t seed) const {
  return fnv1a64(data(), static_cast<size_t>(numel_) * sizeof(double), seed);
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

}  // namespace vqfont::nn
