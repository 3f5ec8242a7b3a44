#pragma once

#include <memory>

#include "vqfont/nn/modules.hpp"

namespace vqfont::gen {

struct AttentionConfig {
  int64_t dim = 256;
  int heads = 8;
  int layers = 3;
  int64_t ff_hidden() const { return 4 * dim; }
  int64_t head_dim() const { return dim / heads; }
};

// Softmax matrices captured for inspection: probs[layer][head] is the
// (queries x tokens) attention distribution.
struct AttentionTrace {
  std::vector<std::vector<nn::Tensor>> probs;
};

// One cross-attention block: multi-head attention over reference tokens,
// then a feedforward, each with residual + layer norm.
class CrossAttentionLayer : public nn::Module {
 public:
  CrossAttentionLayer(Rng& rng, const AttentionConfig& cfg);
  nn::Var operator()(nn::Var queries, nn::Var tokens,
                     std::vector<nn::Tensor>* probs_out = nullptr) const;

 private:
  AttentionConfig cfg_;
  nn::Linear wq_, wk_, wv_, wo_;
  nn::LayerNorm ln_attn_;
  nn::Linear ff1_, ff2_;
  nn::LayerNorm ln_ff_;
};

// The CAM: stacked cross-attention layers. Layer 1 queries are the frozen
// component codes; deeper layers query the progressively stylized codes.
// Keys/values are the same reference tokens at every layer.
class AttentionStack : public nn::Module {
 public:
  AttentionStack(Rng& rng, AttentionConfig cfg);
  // codes: (N,d) queries; tokens: (K*h*w, d). Returns stylized codes (N,d).
  nn::Var operator()(nn::Var codes, nn::Var tokens, AttentionTrace* trace = nullptr) const;

  const AttentionConfig& config() const { return cfg_; }
  int64_t forward_count() const { return forward_count_; }
  void reset_forward_count() { forward_count_ = 0; }

 private:
  AttentionConfig cfg_;
  std::vector<std::unique_ptr<CrossAttentionLayer>> layers_;
  mutable int64_t forward_count_ = 0;
};

}  // namespace vqfont::gen
