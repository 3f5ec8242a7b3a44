#include "vqfont/vq/pretrain.hpp"

#include <fstream>
#include <iostream>

#include "vqfont/font/glyph_tensor.hpp"
#include "vqfont/font/sampler.hpp"
#include "vqfont/nn/optim.hpp"

namespace vqfont::vq {

using nn::Tensor;
using nn::Var;

PretrainResult pretrain_codebook(const font::DatasetManifest& manifest, const VQModelConfig& cfg,
                                 const PretrainOptions& opt,
                                 const std::filesystem::path& out_checkpoint,
                                 const std::filesystem::path& trace_csv) {
  VQF_REQUIRE(cfg.canvas == manifest.canvas || manifest.canvas == 0,
              "model canvas " << cfg.canvas << " != manifest canvas " << manifest.canvas);

  // Template-font glyphs over the seen character set.
  const auto& seen = manifest.split("SFSC");
  std::vector<char32_t> chars = manifest.renderable_chars(manifest.content_font_id, seen.chars);
  VQF_REQUIRE(!chars.empty(), "template font renders no seen character");
  if (opt.glyph_limit > 0 && static_cast<int64_t>(chars.size()) > opt.glyph_limit) {
    chars.resize(static_cast<size_t>(opt.glyph_limit));
  }

  font::GlyphStore store(manifest);
  std::vector<const font::GlyphImage*> glyphs;
  for (char32_t c : chars) glyphs.push_back(&store.get(manifest.content_font_id, c));
  const int64_t pool = static_cast<int64_t>(glyphs.size());
  const int64_t batch = std::min<int64_t>(opt.batch, pool);

  VQModel model(derive_seed(opt.seed, "vq-model"), cfg);
  nn::Adam optim(model.parameters(), opt.lr);
  Rng rng(derive_seed(opt.seed, "vq-batches"));

  PretrainResult result;
  result.checkpoint = out_checkpoint;

  std::ofstream trace_out;
  if (!trace_csv.empty()) {
    trace_out.open(trace_csv);
    trace_out << "step,l1,latent,total\n";
  }

  std::vector<int64_t> code_last_used(static_cast<size_t>(cfg.codebook_size), 0);
  std::uniform_int_distribution<int64_t> pick(0, pool - 1);
  double l1_window = 0.0;
  int64_t l1_window_n = 0;
  bool wrote_checkpoint = false;

  for (int64_t step = 1; step <= opt.steps; ++step) {
    std::vector<const font::GlyphImage*> batch_glyphs(static_cast<size_t>(batch));
    for (int64_t i = 0; i < batch; ++i) batch_glyphs[static_cast<size_t>(i)] = glyphs[pick(rng)];

    Var images = nn::make_constant(font::batch_from_glyphs(batch_glyphs));
    auto fwd = model.reconstruct(images);
    Var l1 = nn::l1_loss(fwd.recon, images);
    Var lat = latent_loss(fwd.z_tokens, model.codebook(), fwd.q.indices, opt.alpha, opt.beta);
    Var total = nn::add(l1, lat);

    const double l1_v = l1->value[0];
    const double lat_v = lat->value[0];
    const double total_v = total->value[0];
    if (!std::isfinite(total_v)) {
      std::cerr << "pretrain: loss diverged at step " << step << "; stopping at last checkpoint\n";
      result.diverged = true;
      // The parameters themselves are still the last finite iterate (NaN was
      // caught before this step's update), so they are the checkpoint.
      bool params_finite = true;
      for (const auto& p : model.parameters()) params_finite &= p->value.all_finite();
      if (params_finite) {
        save_vq_checkpoint(out_checkpoint, model, step - 1, opt.config_echo);
        wrote_checkpoint = true;
      }
      break;
    }

    optim.zero_grad();
    nn::backward(total);
    optim.step();
    result.steps_completed = step;

    l1_window += l1_v;
    ++l1_window_n;
    if (step % opt.log_every == 0 || step == opt.steps) {
      result.trace.push_back({step, l1_v, lat_v, total_v});
      if (trace_out.is_open()) {
        trace_out << step << "," << l1_v << "," << lat_v << "," << total_v << "\n";
      }
      result.final_l1 = l1_window / static_cast<double>(l1_window_n);
      l1_window = 0.0;
      l1_window_n = 0;
    }

    if (opt.reseed_dead_codes) {
      for (int32_t idx : fwd.q.indices) code_last_used[static_cast<size_t>(idx)] = step;
      if (step % opt.dead_code_window == 0) {
        const Tensor tokens = fwd.z_tokens->value;
        std::uniform_int_distribution<int64_t> tok(0, tokens.dim(0) - 1);
        double* cb = model.codebook()->value.data();
        for (int64_t c = 0; c < cfg.codebook_size; ++c) {
          if (step - code_last_used[static_cast<size_t>(c)] >= opt.dead_code_window) {
            const double* src = tokens.data() + tok(rng) * cfg.dim;
            std::copy(src, src + cfg.dim, cb + c * cfg.dim);
            code_last_used[static_cast<size_t>(c)] = step;
          }
        }
      }
    }

    if (step % opt.checkpoint_every == 0 || step == opt.steps) {
      save_vq_checkpoint(out_checkpoint, model, step, opt.config_echo);
      wrote_checkpoint = true;
    }
  }

  if (!wrote_checkpoint && !result.diverged) {
    save_vq_checkpoint(out_checkpoint, model, result.steps_completed, opt.config_echo);
    wrote_checkpoint = true;
  }
  VQF_REQUIRE(wrote_checkpoint, "pretraining diverged with no finite checkpoint to keep");
  return result;
}

}  // namespace vqfont::vq
