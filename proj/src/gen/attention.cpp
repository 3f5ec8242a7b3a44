#include "vqfont/gen/attention.hpp"

#include <cmath>

namespace vqfont::gen {

using nn::Var;

CrossAttentionLayer::CrossAttentionLayer(Rng& rng, const AttentionConfig& cfg)
    : cfg_(cfg),
      wq_(rng, cfg.dim, cfg.dim),
      wk_(rng, cfg.dim, cfg.dim),
      wv_(rng, cfg.dim, cfg.dim),
      wo_(rng, cfg.dim, cfg.dim),
      ln_attn_(cfg.dim),
      ff1_(rng, cfg.dim, cfg.ff_hidden()),
      ff2_(rng, cfg.ff_hidden(), cfg.dim),
      ln_ff_(cfg.dim) {
  add_child("wq", &wq_);
  add_child("wk", &wk_);
  add_child("wv", &wv_);
  add_child("wo", &wo_);
  add_child("ln_attn", &ln_attn_);
  add_child("ff1", &ff1_);
  add_child("ff2", &ff2_);
  add_child("ln_ff", &ln_ff_);
}

Var CrossAttentionLayer::operator()(Var queries, Var tokens,
                                    std::vector<nn::Tensor>* probs_out) const {
  const int64_t c = cfg_.head_dim();
  const double inv_sqrt_c = 1.0 / std::sqrt(static_cast<double>(c));

  Var q = wq_(queries);
  Var k = wk_(tokens);
  Var v = wv_(tokens);

  std::vector<Var> heads;
  heads.reserve(static_cast<size_t>(cfg_.heads));
  for (int h = 0; h < cfg_.heads; ++h) {
    Var qh = nn::slice_cols(q, h * c, (h + 1) * c);
    Var kh = nn::slice_cols(k, h * c, (h + 1) * c);
    Var vh = nn::slice_cols(v, h * c, (h + 1) * c);
    Var scores = nn::mul_scalar(nn::matmul_nt(qh, kh), inv_sqrt_c);
    Var probs = nn::softmax_rows(scores);
    if (probs_out) probs_out->push_back(probs->value);
    heads.push_back(nn::matmul(probs, vh));
  }
  Var attn = wo_(nn::concat_cols(heads));
  Var x = ln_attn_(nn::add(std::move(queries), std::move(attn)));
  Var ff = ff2_(nn::relu(ff1_(x)));
  return ln_ff_(nn::add(std::move(x), std::move(ff)));
}

AttentionStack::AttentionStack(Rng& rng, AttentionConfig cfg) : cfg_(cfg) {
  VQF_REQUIRE(cfg.heads >= 1 && cfg.dim % cfg.heads == 0,
              "attention heads (" << cfg.heads << ") must divide dim (" << cfg.dim << ")");
  VQF_REQUIRE(cfg.layers >= 1, "attention stack needs at least one layer");
  for (int i = 0; i < cfg.layers; ++i) {
    layers_.push_back(std::make_unique<CrossAttentionLayer>(rng, cfg));
    add_child("layer" + std::to_string(i), layers_.back().get());
  }
}

Var AttentionStack::operator()(Var codes, Var tokens, AttentionTrace* trace) const {
  VQF_REQUIRE(codes->value.ndim() == 2 && tokens->value.ndim() == 2 &&
                  codes->value.dim(1) == cfg_.dim && tokens->value.dim(1) == cfg_.dim,
              "attention stack: bad shapes codes " << codes->value.shape_str() << " tokens "
                                                   << tokens->value.shape_str());
  ++forward_count_;
  Var x = std::move(codes);
  for (const auto& layer : layers_) {
    std::vector<nn::Tensor>* probs = nullptr;
    if (trace) {
      trace->probs.emplace_back();
      probs = &trace->probs.back();
    }
    x = (*layer)(std::move(x), tokens, probs);
  }
  return x;
}

}  // namespace vqfont::gen
