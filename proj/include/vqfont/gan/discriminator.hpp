#pragma once

#include <memory>

#include "vqfont/nn/modules.hpp"

namespace vqfont::gan {

struct DiscriminatorConfig {
  int canvas = 128;
  int64_t base_channels = 64;
  int blocks = 4;          // L: feature levels exposed for matching
  int64_t num_fonts = 1;   // style-label vocabulary (seen fonts)
  int64_t num_chars = 1;   // char-label vocabulary (seen chars)

  std::string to_json() const;
  static DiscriminatorConfig from_json(const std::string& s);
};

struct DiscriminatorOutput {
  nn::Var logits;                 // (B,1)
  std::vector<nn::Var> features;  // one per block, shallow to deep
};

// Residual downsampling block: 3x3 conv + 4x4 stride-2 conv on the main
// path, 1x1 conv after 2x2 average pooling on the skip.
class ResBlockDown : public nn::Module {
 public:
  ResBlockDown(Rng& rng, int64_t in_ch, int64_t out_ch);
  nn::Var operator()(nn::Var x) const;

 private:
  nn::Conv2d main1_, main2_, skip_;
};

// Projection discriminator: unconditional backbone score plus inner products
// of the pooled features with per-font and per-char embeddings.
class Discriminator : public nn::Module {
 public:
  Discriminator(Rng& rng, DiscriminatorConfig cfg);

  DiscriminatorOutput operator()(nn::Var images, const std::vector<int32_t>& font_labels,
                                 const std::vector<int32_t>& char_labels) const;

  const DiscriminatorConfig& config() const { return cfg_; }
  nn::Embedding& font_embedding() { return font_emb_; }
  nn::Embedding& char_embedding() { return char_emb_; }

 private:
  DiscriminatorConfig cfg_;
  std::vector<std::unique_ptr<ResBlockDown>> blocks_;
  nn::Linear head_;
  nn::Embedding font_emb_, char_emb_;
};

}  // namespace vqfont::gan
