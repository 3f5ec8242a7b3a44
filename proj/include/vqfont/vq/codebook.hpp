#pragma once

#include <vector>

#include "vqfont/nn/ops.hpp"

namespace vqfont::vq {

// Nearest-code index per token row under squared Euclidean distance,
// ties broken by the smallest index. Exhaustive exact scan.
std::vector<int32_t> nearest_codes(const nn::Tensor& tokens, const nn::Tensor& codebook);

struct QuantizeResult {
  nn::Var quantized;             // (n,d) selected codes, straight-through gradient
  std::vector<int32_t> indices;  // n entries in [0, N)
};

// Replaces each token with its nearest code. The returned Var carries the
// straight-through gradient: d(loss)/d(tokens) = d(loss)/d(quantized),
// and no gradient reaches the codebook through this path.
QuantizeResult quantize_st(nn::Var tokens, nn::Var codebook);

// alpha * ||sg[z] - e||^2 + beta * ||z - sg[e]||^2 over the selected codes
// (mean-square over all token elements).
nn::Var latent_loss(nn::Var tokens, nn::Var codebook, const std::vector<int32_t>& indices,
                    double alpha, double beta);

}  // namespace vqfont::vq
