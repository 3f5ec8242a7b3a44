#pragma once

#include "vqfont/nn/ops.hpp"

namespace vqfont::gen {

// Per-reference, per-channel aggregation weights for the global style path.
// raw holds cosine similarities in [-1,1]; normalized is a temperature
// softmax over the K references, so each channel's column sums to 1.
struct ChannelWeights {
  nn::Tensor raw;         // (K, d)
  nn::Tensor normalized;  // (K, d)
  double temperature = 1.0;
};

// Cosine similarity between channel planes of the frozen content features:
// raw[k][j] = <ref_k channel j, content channel j> / (norms), computed over
// the flattened h*w plane. Zero-norm planes contribute cosine 0 (logged).
// No gradient flows here: all inputs come from the frozen content encoder.
ChannelWeights content_similarity_weights(const nn::Tensor& content_map,
                                          const std::vector<nn::Tensor>& ref_content_maps,
                                          double temperature);

// Channelwise convex combination of the style maps under the normalized
// weights: out[j] = sum_k normalized[k][j] * style_maps[k][j].
// style_maps: (K,d,h,w) Var; returns (d,h,w) Var with gradient to the maps.
nn::Var aggregate_global_style(const ChannelWeights& weights, nn::Var style_maps);

}  // namespace vqfont::gen
