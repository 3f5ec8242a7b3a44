#include "vqfont/gen/generator.hpp"

#include <nlohmann/json.hpp>

namespace vqfont::gen {

using nn::Tensor;
using nn::Var;

namespace {
constexpr double kSlope = 0.2;

Tensor slice_image(const Tensor& bchw, int64_t b) {
  const int64_t C = bchw.dim(1), H = bchw.dim(2), W = bchw.dim(3);
  Tensor out = Tensor::uninit({C, H, W});
  const int64_t n = C * H * W;
  std::copy(bchw.data() + b * n, bchw.data() + (b + 1) * n, out.data());
  return out;
}
}  // namespace

std::string GeneratorConfig::to_json() const {
  nlohmann::json j = {{"vq", nlohmann::json::parse(vq.to_json())},
                      {"heads", heads},
                      {"attn_layers", attn_layers},
                      {"gsa_temperature", gsa_temperature},
                      {"use_lsa", use_lsa},
                      {"use_gsa", use_gsa}};
  return j.dump();
}

GeneratorConfig GeneratorConfig::from_json(const std::string& s) {
  const auto j = nlohmann::json::parse(s);
  GeneratorConfig c;
  c.vq = vq::VQModelConfig::from_json(j.at("vq").dump());
  c.heads = j.at("heads").get<int>();
  c.attn_layers = j.at("attn_layers").get<int>();
  c.gsa_temperature = j.at("gsa_temperature").get<double>();
  c.use_lsa = j.at("use_lsa").get<bool>();
  c.use_gsa = j.at("use_gsa").get<bool>();
  return c;
}

FusionDecoder::FusionDecoder(Rng& rng, vq::EncoderSpec spec, int64_t in_mult)
    : fuse_(rng, spec.dim * in_mult, spec.dim, 3, 1, 1), body_(rng, spec) {
  add_child("fuse", &fuse_);
  add_child("body", &body_);
}

Var FusionDecoder::operator()(Var fused) const {
  return body_(nn::leaky_relu(fuse_(std::move(fused)), kSlope));
}

GeneratorModel::GeneratorModel(uint64_t seed, GeneratorConfig cfg) : cfg_(cfg) {
  const auto spec = cfg.vq.encoder_spec();
  VQF_REQUIRE(cfg.use_lsa || cfg.use_gsa, "generator needs at least one style path enabled");

  Rng content_rng(derive_seed(seed, "gen-content-encoder"));
  content_encoder_ = std::make_unique<vq::ConvEncoder>(content_rng, spec);
  codebook_ = nn::make_param(Tensor::zeros({cfg.vq.codebook_size, cfg.vq.dim}), "codebook");

  Rng style_rng(derive_seed(seed, "style-encoder"));
  style_encoder_ = std::make_unique<vq::ConvEncoder>(style_rng, spec);
  if (cfg.use_lsa) {
    Rng cam_rng(derive_seed(seed, "cam"));
    cam_ = std::make_unique<AttentionStack>(
        cam_rng, AttentionConfig{cfg.vq.dim, cfg.heads, cfg.attn_layers});
  }
  Rng dec_rng(derive_seed(seed, "fusion-decoder"));
  decoder_ = std::make_unique<FusionDecoder>(dec_rng, spec, cfg.decoder_in_mult());
}

void GeneratorModel::adopt_frontend(const vq::VQModel& pretrained) {
  VQF_REQUIRE(pretrained.config().dim == cfg_.vq.dim &&
                  pretrained.config().codebook_size == cfg_.vq.codebook_size &&
                  pretrained.config().downsamples == cfg_.vq.downsamples &&
                  pretrained.config().res_blocks == cfg_.vq.res_blocks,
              "pretrained frontend geometry " << pretrained.config().to_json()
                                              << " does not match generator config "
                                              << cfg_.vq.to_json());
  auto src = pretrained.encoder().named_parameters();
  auto dst = content_encoder_->named_parameters();
  VQF_REQUIRE(src.size() == dst.size(), "encoder parameter lists differ");
  for (size_t i = 0; i < src.size(); ++i) {
    VQF_REQUIRE(src[i].first == dst[i].first && src[i].second->value.same_shape(dst[i].second->value),
                "encoder parameter mismatch at '" << src[i].first << "'");
    std::copy(src[i].second->value.data(),
              src[i].second->value.data() + src[i].second->value.numel(),
              dst[i].second->value.data());
  }
  std::copy(pretrained.codebook()->value.data(),
            pretrained.codebook()->value.data() + pretrained.codebook()->value.numel(),
            codebook_->value.data());
  content_encoder_->freeze();
  codebook_->requires_grad = false;
  frontend_ready_ = true;
}

Var GeneratorModel::encode_style(Var images) const {
  VQF_REQUIRE(images->value.dim(0) >= 1, "empty reference batch");
  return (*style_encoder_)(std::move(images));
}

Var GeneratorModel::encode_content(Var images) const {
  VQF_REQUIRE(frontend_ready_, "content encoder not loaded; adopt a pretrained frontend first");
  return (*content_encoder_)(std::move(images));
}

Var GeneratorModel::stylize(Var tokens, AttentionTrace* trace) const {
  VQF_REQUIRE(cam_ != nullptr, "stylize called with the local style path disabled");
  return (*cam_)(nn::make_constant(codebook_->value), std::move(tokens), trace);
}

std::vector<int32_t> GeneratorModel::content_code_indices(const Tensor& content_tokens) const {
  return vq::nearest_codes(content_tokens, codebook_->value);
}

Var GeneratorModel::assemble_local_style(Var stylized, const std::vector<int32_t>& indices,
                                         int64_t h, int64_t w) const {
  VQF_REQUIRE(static_cast<int64_t>(indices.size()) == h * w,
              "index grid size " << indices.size() << " != " << h << "x" << w);
  Var cells = nn::gather_rows(std::move(stylized), indices);
  return nn::reshape(nn::tokens_to_bchw(std::move(cells), 1, h, w), {cfg_.vq.dim, h, w});
}

GeneratorModel::TrainForward GeneratorModel::forward_train(const TrainBatch& b) const {
  VQF_REQUIRE(frontend_ready_, "frontend not loaded");
  const int64_t B = b.batch, K = b.k;
  VQF_REQUIRE(b.content.dim(0) == B && b.refs.dim(0) == B * K,
              "train batch shapes content " << b.content.shape_str() << " refs "
                                            << b.refs.shape_str());
  const int64_t h = b.content.dim(2) / cfg_.vq.encoder_spec().downscale();
  const int64_t w = h;

  // Frozen content path: constants in the tape.
  Var f_c = encode_content(nn::make_constant(b.content));
  const Tensor content_tokens = nn::to_tokens(f_c)->value;
  Var ref_content;
  if (cfg_.use_gsa) ref_content = encode_content(nn::make_constant(b.refs));

  // Trainable style path.
  Var style_maps = encode_style(nn::make_constant(b.refs));  // (B*K,d,h,w)

  TrainForward out;
  std::vector<Var> local_parts, global_parts;
  for (int64_t i = 0; i < B; ++i) {
    Var set_maps = nn::slice_batch(style_maps, i * K, (i + 1) * K);
    if (cfg_.use_lsa) {
      Var tokens = nn::to_tokens(set_maps);
      Var e_s = stylize(tokens);
      out.stylized.push_back(e_s);
      // Index grid of sample i from the batched token matrix.
      const std::vector<int32_t> sample_idx = content_code_indices(
          Tensor::from(std::vector<double>(content_tokens.data() + i * h * w * cfg_.vq.dim,
                                           content_tokens.data() + (i + 1) * h * w * cfg_.vq.dim),
                       {h * w, cfg_.vq.dim}));
      local_parts.push_back(assemble_local_style(e_s, sample_idx, h, w));
    }
    if (cfg_.use_gsa) {
      std::vector<Tensor> ref_maps;
      for (int64_t k = 0; k < K; ++k) {
        ref_maps.push_back(slice_image(ref_content->value, i * K + k));
      }
      const auto weights = content_similarity_weights(slice_image(f_c->value, i), ref_maps,
                                                      cfg_.gsa_temperature);
      global_parts.push_back(aggregate_global_style(weights, set_maps));
    }
  }

  std::vector<Var> channels{f_c};
  if (cfg_.use_lsa) channels.push_back(nn::stack_batch(local_parts));
  if (cfg_.use_gsa) channels.push_back(nn::stack_batch(global_parts));
  out.fake = (*decoder_)(nn::concat_channels(channels));
  return out;
}

GeneratorModel::StyleContext GeneratorModel::prepare_style(
    const std::vector<font::GlyphImage>& refs) const {
  VQF_REQUIRE(!refs.empty(), "empty reference list");
  VQF_REQUIRE(frontend_ready_, "frontend not loaded");
  for (const auto& r : refs) {
    VQF_REQUIRE(r.canvas == cfg_.vq.canvas, "reference canvas " << r.canvas
                << " != model canvas " << cfg_.vq.canvas);
    VQF_REQUIRE(r.font_id == refs.front().font_id, "references must share one font");
  }
  nn::NoGradGuard no_grad;
  std::vector<const font::GlyphImage*> ptrs;
  for (const auto& r : refs) ptrs.push_back(&r);
  Var batch = nn::make_constant(font::batch_from_glyphs(ptrs));

  StyleContext ctx;
  ctx.font_id = refs.front().font_id;
  Var maps = encode_style(batch);
  ctx.style_maps = maps->value;
  if (cfg_.use_lsa) {
    ctx.stylized_codes = stylize(nn::to_tokens(maps))->value;
  }
  if (cfg_.use_gsa) {
    Var rc = encode_content(batch);
    for (size_t k = 0; k < refs.size(); ++k) {
      ctx.ref_content.push_back(slice_image(rc->value, static_cast<int64_t>(k)));
    }
  }
  return ctx;
}

font::GlyphImage GeneratorModel::generate_with(const StyleContext& ctx,
                                               const font::GlyphImage& content) const {
  VQF_REQUIRE(frontend_ready_, "frontend not loaded");
  VQF_REQUIRE(content.canvas == cfg_.vq.canvas,
              "content canvas " << content.canvas << " != model canvas " << cfg_.vq.canvas);
  nn::NoGradGuard no_grad;
  const int64_t h = cfg_.vq.grid(), w = cfg_.vq.grid();

  Var f_c = encode_content(nn::make_constant(font::tensor_from_glyph(content)));
  std::vector<Var> channels{f_c};
  if (cfg_.use_lsa) {
    const auto idx = content_code_indices(nn::to_tokens(f_c)->value);
    Var f_local = assemble_local_style(nn::make_constant(ctx.stylized_codes), idx, h, w);
    channels.push_back(nn::stack_batch({f_local}));
  }
  if (cfg_.use_gsa) {
    const auto weights =
        content_similarity_weights(slice_image(f_c->value, 0), ctx.ref_content,
                                   cfg_.gsa_temperature);
    Var f_global =
        aggregate_global_style(weights, nn::make_constant(ctx.style_maps));
    channels.push_back(nn::stack_batch({f_global}));
  }
  Var out = (*decoder_)(nn::concat_channels(channels));
  return font::glyph_from_tensor(out->value, 0, ctx.font_id, content.ch);
}

font::GlyphImage GeneratorModel::generate(const font::GlyphImage& content,
                                          const std::vector<font::GlyphImage>& refs) const {
  return generate_with(prepare_style(refs), content);
}

std::vector<Var> GeneratorModel::trainable_parameters() const {
  std::vector<Var> params = style_encoder_->parameters();
  if (cam_) {
    auto c = cam_->parameters();
    params.insert(params.end(), c.begin(), c.end());
  }
  auto d = decoder_->parameters();
  params.insert(params.end(), d.begin(), d.end());
  return params;
}

uint64_t GeneratorModel::frontend_hash() const {
  uint64_t h = content_encoder_->parameters_hash();
  return codebook_->value.bytes_hash(h);
}

uint64_t GeneratorModel::trainable_hash() const {
  uint64_t h = style_encoder_->parameters_hash();
  if (cam_) h ^= cam_->parameters_hash();
  h ^= decoder_->parameters_hash();
  return h;
}

AttentionStack& GeneratorModel::cam() {
  VQF_REQUIRE(cam_ != nullptr, "local style path disabled");
  return *cam_;
}

void GeneratorModel::put_to(nn::Checkpoint& ck) const {
  auto put = [&ck](const std::string& prefix, const nn::Module& m) {
    for (const auto& [name, p] : m.named_parameters()) {
      ck.tensors[prefix + "." + name] = p->value.clone();
    }
  };
  put("content_encoder", *content_encoder_);
  ck.tensors["codebook"] = codebook_->value.clone();
  put("style_encoder", *style_encoder_);
  if (cam_) put("cam", *cam_);
  put("decoder", *decoder_);
}

void GeneratorModel::load_from(const nn::Checkpoint& ck) {
  auto load = [&ck](const std::string& prefix, nn::Module& m) { ck.load_module(prefix, m); };
  load("content_encoder", *content_encoder_);
  auto it = ck.tensors.find("codebook");
  VQF_REQUIRE(it != ck.tensors.end(), "checkpoint missing codebook");
  VQF_REQUIRE(it->second.same_shape(codebook_->value), "codebook shape mismatch");
  std::copy(it->second.data(), it->second.data() + it->second.numel(), codebook_->value.data());
  load("style_encoder", *style_encoder_);
  if (cam_) load("cam", *cam_);
  load("decoder", *decoder_);
  content_encoder_->freeze();
  codebook_->requires_grad = false;
  frontend_ready_ = true;
}

void save_gan_checkpoint(const std::filesystem::path& path, const GeneratorModel& gen,
                         const nn::Module* disc, int64_t step, const std::string& config_echo) {
  nn::Checkpoint ck;
  ck.kind = "gan";
  ck.step = step;
  ck.config_json = config_echo;
  ck.model_json = gen.config().to_json();
  gen.put_to(ck);
  if (disc) {
    for (const auto& [name, p] : disc->named_parameters()) {
      ck.tensors["disc." + name] = p->value.clone();
    }
  }
  ck.save(path);
}

std::unique_ptr<GeneratorModel> load_generator(const nn::Checkpoint& ck) {
  VQF_REQUIRE(ck.kind == "gan", "expected a gan checkpoint, got kind '" << ck.kind << "'");
  auto gen = std::make_unique<GeneratorModel>(0, GeneratorConfig::from_json(ck.model_json));
  gen->load_from(ck);
  return gen;
}

}  // namespace vqfont::gen
