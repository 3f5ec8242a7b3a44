#include "vqfont/vq/model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "vqfont/font/glyph_tensor.hpp"

namespace vqfont::vq {

using nn::Tensor;
using nn::Var;

namespace {
constexpr double kSlope = 0.2;
}

std::vector<int64_t> EncoderSpec::stage_channels() const {
  std::vector<int64_t> ch(static_cast<size_t>(downsamples));
  for (int i = 0; i < downsamples; ++i) {
    ch[static_cast<size_t>(i)] = std::max<int64_t>(4, dim >> (downsamples - 1 - i));
  }
  return ch;
}

ResBlock::ResBlock(Rng& rng, int64_t channels)
    : c1_(rng, channels, channels, 3, 1, 1), c2_(rng, channels, channels, 3, 1, 1) {
  add_child("c1", &c1_);
  add_child("c2", &c2_);
}

Var ResBlock::operator()(Var x) const {
  Var y = c2_(nn::leaky_relu(c1_(x), kSlope));
  return nn::leaky_relu(nn::add(std::move(x), std::move(y)), kSlope);
}

ConvEncoder::ConvEncoder(Rng& rng, EncoderSpec spec) : spec_(spec) {
  const auto ch = spec.stage_channels();
  int64_t prev = 1;
  for (int i = 0; i < spec.downsamples; ++i) {
    downs_.push_back(std::make_unique<nn::Conv2d>(rng, prev, ch[static_cast<size_t>(i)], 4, 2, 1));
    add_child("down" + std::to_string(i), downs_.back().get());
    prev = ch[static_cast<size_t>(i)];
  }
  for (int i = 0; i < spec.res_blocks; ++i) {
    res_.push_back(std::make_unique<ResBlock>(rng, spec.dim));
    add_child("res" + std::to_string(i), res_.back().get());
  }
}

Var ConvEncoder::operator()(Var images) const {
  VQF_REQUIRE(images->value.ndim() == 4 && images->value.dim(1) == 1,
              "encoder expects (B,1,H,W), got " << images->value.shape_str());
  VQF_REQUIRE(images->value.dim(2) % spec_.downscale() == 0,
              "canvas " << images->value.dim(2) << " not divisible by the encoder downscale "
                        << spec_.downscale());
  Var x = std::move(images);
  for (const auto& conv : downs_) x = nn::leaky_relu((*conv)(x), kSlope);
  for (const auto& r : res_) x = (*r)(x);
  return x;
}

ReconDecoder::ReconDecoder(Rng& rng, EncoderSpec spec) : spec_(spec) {
  for (int i = 0; i < spec.res_blocks; ++i) {
    res_.push_back(std::make_unique<ResBlock>(rng, spec.dim));
    add_child("res" + std::to_string(i), res_.back().get());
  }
  auto ch = spec.stage_channels();  // e.g. {64,128,256}
  for (int i = spec.downsamples - 1; i >= 0; --i) {
    const int64_t in_ch = ch[static_cast<size_t>(i)];
    const int64_t out_ch = i > 0 ? ch[static_cast<size_t>(i - 1)] : ch[0];
    ups_.push_back(std::make_unique<nn::ConvTranspose2d>(rng, in_ch, out_ch, 4, 2, 1));
    add_child("up" + std::to_string(spec.downsamples - 1 - i), ups_.back().get());
  }
  out_ = std::make_unique<nn::Conv2d>(rng, ch[0], 1, 3, 1, 1);
  add_child("out", out_.get());
}

Var ReconDecoder::operator()(Var zq) const {
  Var x = std::move(zq);
  for (const auto& r : res_) x = (*r)(x);
  for (const auto& up : ups_) x = nn::leaky_relu((*up)(x), kSlope);
  return nn::tanh_op((*out_)(x));
}

std::string VQModelConfig::to_json() const {
  nlohmann::json j = {{"codebook_size", codebook_size},
                      {"dim", dim},
                      {"canvas", canvas},
                      {"downsamples", downsamples},
                      {"res_blocks", res_blocks}};
  return j.dump();
}

VQModelConfig VQModelConfig::from_json(const std::string& s) {
  const auto j = nlohmann::json::parse(s);
  VQModelConfig c;
  c.codebook_size = j.at("codebook_size").get<int64_t>();
  c.dim = j.at("dim").get<int64_t>();
  c.canvas = j.at("canvas").get<int>();
  c.downsamples = j.at("downsamples").get<int>();
  c.res_blocks = j.at("res_blocks").get<int>();
  return c;
}

VQModel::VQModel(uint64_t seed, VQModelConfig cfg) : cfg_(cfg) {
  VQF_REQUIRE(cfg.codebook_size >= 2, "codebook size must be >= 2, got " << cfg.codebook_size);
  VQF_REQUIRE(cfg.dim > 0, "embedding dim must be positive");
  VQF_REQUIRE(cfg.canvas % (1 << cfg.downsamples) == 0,
              "canvas " << cfg.canvas << " not divisible by 2^" << cfg.downsamples);
  Rng enc_rng(derive_seed(seed, "content-encoder"));
  encoder_ = std::make_unique<ConvEncoder>(enc_rng, cfg.encoder_spec());
  add_child("encoder", encoder_.get());
  Rng dec_rng(derive_seed(seed, "recon-decoder"));
  decoder_ = std::make_unique<ReconDecoder>(dec_rng, cfg.encoder_spec());
  add_child("decoder", decoder_.get());

  const double bound = 1.0 / static_cast<double>(cfg.codebook_size);
  Rng cb_rng(derive_seed(seed, "codebook"));
  codebook_ = add_param("codebook",
                        Tensor::uniform(cb_rng, {cfg.codebook_size, cfg.dim}, -bound, bound));
}

Var VQModel::encode(Var images) const { return (*encoder_)(images); }

VQModel::Forward VQModel::reconstruct(Var images) const {
  const int64_t B = images->value.dim(0);
  const int64_t h = images->value.dim(2) / cfg_.encoder_spec().downscale();
  const int64_t w = images->value.dim(3) / cfg_.encoder_spec().downscale();
  Forward f;
  Var z = encode(std::move(images));
  f.z_tokens = nn::to_tokens(z);
  f.q = quantize_st(f.z_tokens, codebook_);
  f.recon = (*decoder_)(nn::tokens_to_bchw(f.q.quantized, B, h, w));
  return f;
}

Tensor VQModel::code_activation_map(const font::GlyphImage& image, int code_index) const {
  VQF_REQUIRE(code_index >= 0 && code_index < cfg_.codebook_size,
              "code index " << code_index << " out of range [0," << cfg_.codebook_size << ")");
  nn::NoGradGuard no_grad;
  Var z = encode(nn::make_constant(font::tensor_from_glyph(image)));
  const Tensor tokens = nn::to_tokens(z)->value;
  const int64_t n = tokens.dim(0), d = tokens.dim(1);
  const Tensor& cb = codebook_->value;

  const int grid_h = static_cast<int>(z->value.dim(2));
  const int grid_w = static_cast<int>(z->value.dim(3));
  Tensor heat({grid_h, grid_w});
  for (int64_t i = 0; i < n; ++i) {
    const double* t = tokens.data() + i * d;
    double best = std::numeric_limits<double>::infinity();
    double dist_code = 0.0;
    for (int64_t c = 0; c < cfg_.codebook_size; ++c) {
      const double* e = cb.data() + c * d;
      double dist = 0.0;
      for (int64_t j = 0; j < d; ++j) {
        const double diff = t[j] - e[j];
        dist += diff * diff;
      }
      if (dist < best) best = dist;
      if (c == code_index) dist_code = dist;
    }
    heat[i] = std::exp(-(dist_code - best));
  }
  return heat;
}

void VQModel::freeze_frontend() {
  encoder_->freeze();
  codebook_->requires_grad = false;
}

uint64_t VQModel::frontend_hash() const {
  uint64_t h = encoder_->parameters_hash();
  return codebook_->value.bytes_hash(h);
}

void save_vq_checkpoint(const std::filesystem::path& path, const VQModel& model, int64_t step,
                        const std::string& config_echo) {
  nn::Checkpoint ck;
  ck.kind = "vq";
  ck.step = step;
  ck.config_json = config_echo;
  ck.model_json = model.config().to_json();
  for (const auto& [name, p] : model.named_parameters()) {
    ck.tensors[name] = p->value.clone();
  }
  ck.save(path);
}

std::unique_ptr<VQModel> load_vq_model(const nn::Checkpoint& ck) {
  VQF_REQUIRE(ck.kind == "vq", "expected a vq checkpoint, got kind '" << ck.kind << "'");
  auto model = std::make_unique<VQModel>(0, VQModelConfig::from_json(ck.model_json));
  for (const auto& [name, p] : model->named_parameters()) {
    auto it = ck.tensors.find(name);
    VQF_REQUIRE(it != ck.tensors.end(), "vq checkpoint missing tensor '" << name << "'");
    VQF_REQUIRE(it->second.same_shape(p->value), "vq checkpoint tensor '" << name << "' shape "
                << it->second.shape_str() << " != " << p->value.shape_str());
    std::copy(it->second.data(), it->second.data() + it->second.numel(), p->value.data());
  }
  return model;
}

}  // namespace vqfont::vq
