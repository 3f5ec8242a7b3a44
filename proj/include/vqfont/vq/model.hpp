#pragma once

#include <filesystem>
#include <memory>

#include "vqfont/font/glyph.hpp"
#include "vqfont/nn/modules.hpp"
#include "vqfont/nn/serialize.hpp"
#include "vqfont/vq/codebook.hpp"

namespace vqfont::vq {

// Conv trunk geometry shared by the content and style encoders:
// `downsamples` stride-2 stages up to `dim` channels, then residual
// refinement at the bottleneck resolution.
struct EncoderSpec {
  int64_t dim = 256;
  int downsamples = 3;
  int res_blocks = 2;

  std::vector<int64_t> stage_channels() const;
  int downscale() const { return 1 << downsamples; }
};

class ResBlock : public nn::Module {
 public:
  ResBlock(Rng& rng, int64_t channels);
  nn::Var operator()(nn::Var x) const;

 private:
  nn::Conv2d c1_, c2_;
};

class ConvEncoder : public nn::Module {
 public:
  ConvEncoder(Rng& rng, EncoderSpec spec);
  // (B,1,H,W) -> (B,dim,H/s,W/s)
  nn::Var operator()(nn::Var images) const;
  const EncoderSpec& spec() const { return spec_; }

 private:
  EncoderSpec spec_;
  std::vector<std::unique_ptr<nn::Conv2d>> downs_;
  std::vector<std::unique_ptr<ResBlock>> res_;
};

// Mirror of the encoder. Consumes the quantized latent grid alone — there
// is no side channel from the encoder.
class ReconDecoder : public nn::Module {
 public:
  ReconDecoder(Rng& rng, EncoderSpec spec);
  // (B,dim,h,w) -> (B,1,H,W) bounded to [-1,1]
  nn::Var operator()(nn::Var zq) const;

 private:
  EncoderSpec spec_;
  std::vector<std::unique_ptr<ResBlock>> res_;
  std::vector<std::unique_ptr<nn::ConvTranspose2d>> ups_;
  std::unique_ptr<nn::Conv2d> out_;
};

struct VQModelConfig {
  int64_t codebook_size = 100;
  int64_t dim = 256;
  int canvas = 128;
  int downsamples = 3;
  int res_blocks = 2;

  EncoderSpec encoder_spec() const { return {dim, downsamples, res_blocks}; }
  int grid() const { return canvas / (1 << downsamples); }
  std::string to_json() const;
  static VQModelConfig from_json(const std::string& s);
};

class VQModel : public nn::Module {
 public:
  VQModel(uint64_t seed, VQModelConfig cfg);

  nn::Var encode(nn::Var images) const;

  struct Forward {
    nn::Var z_tokens;   // (B*h*w, d)
    QuantizeResult q;   // straight-through codes + indices
    nn::Var recon;      // (B,1,H,W)
  };
  Forward reconstruct(nn::Var images) const;

  nn::Var codebook() const { return codebook_; }
  ConvEncoder& encoder() { return *encoder_; }
  const ConvEncoder& encoder() const { return *encoder_; }
  ReconDecoder& decoder() { return *decoder_; }
  const VQModelConfig& config() const { return cfg_; }

  // Similarity heatmap of one code over the encoded grid: 1 where the code
  // is the nearest, exp(-(d^2 - d_best^2)) in [0,1) elsewhere.
  nn::Tensor code_activation_map(const font::GlyphImage& image, int code_index) const;

  // Encoder + codebook become immutable; the recon decoder stays trainable.
  void freeze_frontend();
  uint64_t frontend_hash() const;

 private:
  VQModelConfig cfg_;
  std::unique_ptr<ConvEncoder> encoder_;
  std::unique_ptr<ReconDecoder> decoder_;
  nn::Var codebook_;
};

void save_vq_checkpoint(const std::filesystem::path& path, const VQModel& model, int64_t step,
                        const std::string& config_echo);
std::unique_ptr<VQModel> load_vq_model(const nn::Checkpoint& ck);

}  // namespace vqfont::vq
