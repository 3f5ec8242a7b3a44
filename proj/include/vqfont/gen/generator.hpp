#pragma once

#include "vqfont/font/glyph_tensor.hpp"
#include "vqfont/gen/attention.hpp"
#include "vqfont/gen/gsa.hpp"
#include "vqfont/vq/model.hpp"

namespace vqfont::gen {

struct GeneratorConfig {
  vq::VQModelConfig vq;  // frontend geometry; must match the pretrained codebook
  int heads = 8;
  int attn_layers = 3;
  double gsa_temperature = 1.0;
  bool use_lsa = true;
  bool use_gsa = true;

  int64_t decoder_in_mult() const { return 1 + (use_lsa ? 1 : 0) + (use_gsa ? 1 : 0); }
  std::string to_json() const;
  static GeneratorConfig from_json(const std::string& s);
};

// Fuses [f_c ; f_sr-L ; f_sr-G] and decodes to a glyph bounded in [-1,1].
class FusionDecoder : public nn::Module {
 public:
  FusionDecoder(Rng& rng, vq::EncoderSpec spec, int64_t in_mult);
  nn::Var operator()(nn::Var fused) const;

 private:
  nn::Conv2d fuse_;
  vq::ReconDecoder body_;
};

class GeneratorModel {
 public:
  GeneratorModel(uint64_t seed, GeneratorConfig cfg);

  // Copies the pretrained content encoder + codebook and freezes them.
  void adopt_frontend(const vq::VQModel& pretrained);

  // Style encoder forward; per-image encodings are independent.
  nn::Var encode_style(nn::Var images) const;
  // Frozen content path (constant in the tape).
  nn::Var encode_content(nn::Var images) const;
  // Stylized codes e_s from reference tokens; one CAM pass per reference set.
  nn::Var stylize(nn::Var tokens, AttentionTrace* trace = nullptr) const;
  // Nearest-code index grid of a content feature map, token order.
  std::vector<int32_t> content_code_indices(const nn::Tensor& content_tokens) const;
  // f_sr-L: hard replacement of each cell by its stylized component code.
  nn::Var assemble_local_style(nn::Var stylized, const std::vector<int32_t>& indices, int64_t h,
                               int64_t w) const;

  struct TrainBatch {
    nn::Tensor content;  // (B,1,H,W)
    nn::Tensor refs;     // (B*K,1,H,W), sample-major
    int64_t batch = 0;
    int64_t k = 0;
  };
  struct TrainForward {
    nn::Var fake;                   // (B,1,H,W)
    std::vector<nn::Var> stylized;  // per-sample e_s; empty when LSA is off
  };
  TrainForward forward_train(const TrainBatch& b) const;

  // Inference: the style context is computed once per reference set and can
  // be reused for a whole character library.
  struct StyleContext {
    std::string font_id;                  // reference font
    nn::Tensor stylized_codes;            // (N,d); zero-size when LSA is off
    nn::Tensor style_maps;                // (K,d,h,w)
    std::vector<nn::Tensor> ref_content;  // K content maps (d,h,w)
  };
  StyleContext prepare_style(const std::vector<font::GlyphImage>& refs) const;
  font::GlyphImage generate_with(const StyleContext& ctx, const font::GlyphImage& content) const;
  font::GlyphImage generate(const font::GlyphImage& content,
                            const std::vector<font::GlyphImage>& refs) const;

  std::vector<nn::Var> trainable_parameters() const;
  uint64_t frontend_hash() const;
  uint64_t trainable_hash() const;

  const GeneratorConfig& config() const { return cfg_; }
  AttentionStack& cam();
  const AttentionStack* cam_ptr() const { return cam_.get(); }
  nn::Var codebook() const { return codebook_; }
  const vq::ConvEncoder& content_encoder() const { return *content_encoder_; }
  vq::ConvEncoder& style_encoder() { return *style_encoder_; }

  void put_to(nn::Checkpoint& ck) const;
  void load_from(const nn::Checkpoint& ck);

 private:
  GeneratorConfig cfg_;
  std::unique_ptr<vq::ConvEncoder> content_encoder_;  // frozen
  nn::Var codebook_;                                  // frozen
  std::unique_ptr<vq::ConvEncoder> style_encoder_;
  std::unique_ptr<AttentionStack> cam_;  // null when use_lsa is false
  std::unique_ptr<FusionDecoder> decoder_;
  bool frontend_ready_ = false;
};

void save_gan_checkpoint(const std::filesystem::path& path, const GeneratorModel& gen,
                         const nn::Module* disc, int64_t step, const std::string& config_echo);
std::unique_ptr<GeneratorModel> load_generator(const nn::Checkpoint& ck);

}  // namespace vqfont::gen
