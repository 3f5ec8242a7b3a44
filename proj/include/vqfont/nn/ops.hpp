#pragma once

#include <vector>

#include "vqfont/nn/autograd.hpp"

namespace vqfont::nn {

// Elementwise / arithmetic. Same-shape operands unless noted.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var add_scalar(Var a, double s);
Var mul_scalar(Var a, double s);
Var relu(Var a);
Var leaky_relu(Var a, double slope);
Var tanh_op(Var a);

// Reductions to a single-element tensor.
Var sum_all(Var a);
Var mean_all(Var a);
Var mse_loss(Var a, Var b);
Var l1_loss(Var a, Var b);

// 2-D linear algebra.
Var matmul(Var a, Var b);     // (n,k)x(k,m) -> (n,m)
Var matmul_nt(Var a, Var b);  // (n,k)x(m,k)^T -> (n,m)
Var linear(Var x, Var w, Var b);  // x:(n,din) w:(dout,din) b:(dout) -> (n,dout)
Var softmax_rows(Var x);
Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-5);
Var row_l2_normalize(Var x, double eps = 1e-12);
Var slice_cols(Var x, int64_t c0, int64_t c1);
Var concat_cols(const std::vector<Var>& xs);
Var gather_rows(Var m, std::vector<int32_t> idx);
Var rows_dot(Var a, Var b);  // (n,m),(n,m) -> (n,1)
Var stack_scalars(const std::vector<Var>& xs);  // n scalars -> (n)
Var logsumexp_vec(Var x);                       // (n) -> (1)

// Spatial ops, NCHW layout.
Var conv2d(Var x, Var w, Var b, int stride, int pad);
// w layout (Cin, Cout, kh, kw); Hout = (H-1)*stride - 2*pad + kh + out_pad.
Var conv_transpose2d(Var x, Var w, Var b, int stride, int pad, int out_pad);
Var avg_pool2d(Var x);       // 2x2, stride 2
Var global_mean_pool(Var x); // (B,C,H,W) -> (B,C)
Var concat_channels(const std::vector<Var>& xs);
Var slice_batch(Var x, int64_t b0, int64_t b1);
Var stack_batch(const std::vector<Var>& xs);  // list of (C,H,W) -> (B,C,H,W)
Var to_tokens(Var x);  // (B,C,H,W) -> (B*H*W, C)
Var tokens_to_bchw(Var t, int64_t batch, int64_t h, int64_t w);
// out[j,:,:] = sum_k weights(k,j) * maps[k,j,:,:]; weights are constants.
Var weighted_channel_sum(Var maps, const Tensor& weights);

Var detach(Var x);
Var reshape(Var x, std::vector<int64_t> shape);  // element count preserved

// Shared helper for op authors: constant-folds when the tape is off or no
// parent needs gradients.
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop);

}  // namespace vqfont::nn
