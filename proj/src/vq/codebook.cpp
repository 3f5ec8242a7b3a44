#include "vqfont/vq/codebook.hpp"

namespace vqfont::vq {

using nn::Tensor;
using nn::Var;

std::vector<int32_t> nearest_codes(const Tensor& tokens, const Tensor& codebook) {
  VQF_REQUIRE(tokens.ndim() == 2 && codebook.ndim() == 2 && tokens.dim(1) == codebook.dim(1),
              "nearest_codes: dim mismatch tokens " << tokens.shape_str() << " codebook "
                                                    << codebook.shape_str());
  const int64_t n = tokens.dim(0), d = tokens.dim(1), N = codebook.dim(0);
  VQF_REQUIRE(N >= 1, "empty codebook");
  std::vector<int32_t> idx(static_cast<size_t>(n));
  const double* tp = tokens.data();
  const double* cp = codebook.data();
  for (int64_t i = 0; i < n; ++i) {
    const double* t = tp + i * d;
    double best = std::numeric_limits<double>::infinity();
    int32_t best_n = 0;
    for (int64_t c = 0; c < N; ++c) {
      const double* e = cp + c * d;
      double dist = 0.0;
      for (int64_t j = 0; j < d; ++j) {
        const double diff = t[j] - e[j];
        dist += diff * diff;
      }
      if (dist < best) {  // strict: ties keep the smallest index
        best = dist;
        best_n = static_cast<int32_t>(c);
      }
    }
    idx[static_cast<size_t>(i)] = best_n;
  }
  return idx;
}

QuantizeResult quantize_st(Var tokens, Var codebook) {
  QuantizeResult res;
  res.indices = nearest_codes(tokens->value, codebook->value);

  const int64_t n = tokens->value.dim(0), d = tokens->value.dim(1);
  Tensor q = Tensor::uninit({n, d});
  const double* cp = codebook->value.data();
  double* qp = q.data();
  for (int64_t i = 0; i < n; ++i) {
    const double* e = cp + static_cast<int64_t>(res.indices[static_cast<size_t>(i)]) * d;
    std::copy(e, e + d, qp + i * d);
  }
  // Straight-through: the only recorded parent is the encoder-side tokens.
  res.quantized = nn::make_op(std::move(q), {tokens}, [](nn::Node& nd) {
    if (nd.parents[0]->requires_grad) nd.parents[0]->accumulate_grad(nd.grad);
  });
  return res;
}

Var latent_loss(Var tokens, Var codebook, const std::vector<int32_t>& indices, double alpha,
                double beta) {
  Var selected = nn::gather_rows(codebook, indices);
  Var codebook_term = nn::mse_loss(nn::detach(tokens), selected);
  Var commit_term = nn::mse_loss(tokens, nn::detach(selected));
  return nn::add(nn::mul_scalar(codebook_term, alpha), nn::mul_scalar(commit_term, beta));
}

}  // namespace vqfont::vq
