#include "vqfont/gen/gsa.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

namespace vqfont::gen {

using nn::Tensor;
using nn::Var;

ChannelWeights content_similarity_weights(const Tensor& content_map,
                                          const std::vector<Tensor>& ref_content_maps,
                                          double temperature) {
  VQF_REQUIRE(content_map.ndim() == 3, "content map must be (d,h,w), got "
              << content_map.shape_str());
  VQF_REQUIRE(!ref_content_maps.empty(), "no reference content maps");
  const int64_t d = content_map.dim(0);
  const int64_t plane = content_map.dim(1) * content_map.dim(2);
  const int64_t K = static_cast<int64_t>(ref_content_maps.size());

  static std::atomic<int> zero_norm_warnings{0};

  ChannelWeights w;
  w.temperature = temperature;
  w.raw = Tensor::zeros({K, d});
  w.normalized = Tensor::zeros({K, d});

  std::vector<double> content_norms(static_cast<size_t>(d));
  for (int64_t j = 0; j < d; ++j) {
    const double* c = content_map.data() + j * plane;
    double n = 0;
    for (int64_t p = 0; p < plane; ++p) n += c[p] * c[p];
    content_norms[static_cast<size_t>(j)] = std::sqrt(n);
  }

  for (int64_t k = 0; k < K; ++k) {
    const Tensor& ref = ref_content_maps[static_cast<size_t>(k)];
    VQF_REQUIRE(ref.same_shape(content_map), "reference content map " << k << " shape "
                << ref.shape_str() << " != " << content_map.shape_str());
    for (int64_t j = 0; j < d; ++j) {
      const double* a = ref.data() + j * plane;
      const double* c = content_map.data() + j * plane;
      double dot = 0, na = 0;
      for (int64_t p = 0; p < plane; ++p) {
        dot += a[p] * c[p];
        na += a[p] * a[p];
      }
      const double denom = std::sqrt(na) * content_norms[static_cast<size_t>(j)];
      double cosine = 0.0;
      if (denom > 0.0) {
        cosine = dot / denom;
      } else if (zero_norm_warnings.fetch_add(1) < 8) {
        std::cerr << "warning: zero-norm channel " << j << " in similarity weights\n";
      }
      w.raw.at(k, j) = std::clamp(cosine, -1.0, 1.0);
    }
  }

  // softmax over the K references, per channel.
  for (int64_t j = 0; j < d; ++j) {
    double mx = -2.0;
    for (int64_t k = 0; k < K; ++k) mx = std::max(mx, temperature * w.raw.at(k, j));
    double sum = 0;
    for (int64_t k = 0; k < K; ++k) {
      const double e = std::exp(temperature * w.raw.at(k, j) - mx);
      w.normalized.at(k, j) = e;
      sum += e;
    }
    for (int64_t k = 0; k < K; ++k) w.normalized.at(k, j) /= sum;
  }
  return w;
}

Var aggregate_global_style(const ChannelWeights& weights, Var style_maps) {
  VQF_REQUIRE(style_maps->value.ndim() == 4 &&
                  style_maps->value.dim(0) == weights.normalized.dim(0) &&
                  style_maps->value.dim(1) == weights.normalized.dim(1),
              "aggregate_global_style: maps " << style_maps->value.shape_str()
                                              << " vs weights " << weights.normalized.shape_str());
  return nn::weighted_channel_sum(std::move(style_maps), weights.normalized);
}

}  // namespace vqfont::gen
