#include <doctest.h>

#include <chrono>

#include "testutil.hpp"
#include "vqfont/font/glyph_tensor.hpp"
#include "vqfont/font/image_io.hpp"
#include "vqfont/font/render.hpp"
#include "vqfont/font/sampler.hpp"
#include "vqfont/vq/model.hpp"
#include "vqfont/vq/pretrain.hpp"

using namespace vqfont;
using namespace vqfont::nn;
using namespace vqfont::vq;

TEST_CASE("quantize picks the nearest code with brute-force agreement") {
  // Hand case: codes {(0,0),(1,1)}, cell (0.2,0.1): distances 0.05 vs 1.45.
  auto codebook = make_param(Tensor::from({0, 0, 1, 1}, {2, 2}));
  auto cell = make_param(Tensor::from({0.2, 0.1}, {1, 2}));
  auto q = quantize_st(cell, codebook);
  CHECK(q.indices == std::vector<int32_t>{0});
  CHECK(q.quantized->value[0] == 0.0);
  CHECK(q.quantized->value[1] == 0.0);

  // A cell equal to a code maps to it with distance 0.
  auto exact = make_param(Tensor::from({1.0, 1.0}, {1, 2}));
  auto q2 = quantize_st(exact, codebook);
  CHECK(q2.indices == std::vector<int32_t>{1});
  CHECK(q2.quantized->value[0] == 1.0);

  // 1000 random cells, d=8, N=16: exact match with an independent scan.
  Rng rng(12345);
  Tensor tokens = Tensor::randn(rng, {1000, 8});
  Tensor codes = Tensor::randn(rng, {16, 8});
  const auto t0 = std::chrono::steady_clock::now();
  const auto idx = nearest_codes(tokens, codes);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
  for (int64_t i = 0; i < 1000; ++i) {
    // Oracle: plain double loop, written independently of the implementation.
    double best = 1e300;
    int32_t arg = -1;
    for (int64_t c = 0; c < 16; ++c) {
      double s = 0;
      for (int64_t j = 0; j < 8; ++j) {
        const double diff = tokens.at(i, j) - codes.at(c, j);
        s += diff * diff;
      }
      if (s < best) {
        best = s;
        arg = static_cast<int32_t>(c);
      }
    }
    REQUIRE(idx[static_cast<size_t>(i)] == arg);
  }
}

TEST_CASE("quantize tie breaks to the smallest index") {
  auto codebook = make_param(Tensor::from({1, 0, 1, 0, -1, 0}, {3, 2}));  // codes 0 and 1 equal
  auto cell = make_param(Tensor::from({0.9, 0.1}, {1, 2}));
  auto q = quantize_st(cell, codebook);
  CHECK(q.indices[0] == 0);
}

TEST_CASE("stop-gradient contract on a 2x2x4 micro-instance") {
  // Micro "encoder": a 1x1 conv over a 2x2 grid with 4 channels.
  Rng rng(5);
  auto enc_w = make_param(Tensor::randn(rng, {4, 4, 1, 1}, 0.5), "enc_w");
  auto enc_b = make_param(Tensor::randn(rng, {4}, 0.1), "enc_b");
  auto input = make_constant(Tensor::randn(rng, {1, 4, 2, 2}));
  auto codebook = make_param(Tensor::randn(rng, {3, 4}, 0.5), "codebook");

  auto forward_tokens = [&] { return to_tokens(conv2d(input, enc_w, enc_b, 1, 0)); };

  // Alpha term: gradient w.r.t. encoder parameters is exactly zero.
  {
    auto tokens = forward_tokens();
    auto idx = nearest_codes(tokens->value, codebook->value);
    auto alpha_term = mse_loss(detach(tokens), gather_rows(codebook, idx));
    backward(alpha_term);
    CHECK(!enc_w->grad.defined());
    CHECK(!enc_b->grad.defined());
    REQUIRE(codebook->grad.defined());
    CHECK(codebook->grad.abs_max() > 0.0);
    codebook->grad.zero();
  }

  // Beta term: gradient w.r.t. the codebook is exactly zero.
  {
    auto tokens = forward_tokens();
    auto idx = nearest_codes(tokens->value, codebook->value);
    auto beta_term = mse_loss(tokens, detach(gather_rows(codebook, idx)));
    backward(beta_term);
    CHECK(codebook->grad.abs_max() == 0.0);  // zeroed above, untouched here
    REQUIRE(enc_w->grad.defined());
    CHECK(enc_w->grad.abs_max() > 0.0);
    enc_w->grad.zero();
    enc_b->grad.zero();
  }
}

TEST_CASE("straight-through gradient equals the downstream gradient elementwise") {
  Rng rng(9);
  auto tokens = make_param(Tensor::randn(rng, {4, 4}));
  auto codebook = make_param(Tensor::randn(rng, {3, 4}));
  auto mix = make_constant(Tensor::randn(rng, {4, 4}));

  auto q = quantize_st(tokens, codebook);
  auto loss = mean_all(tanh_op(mul(q.quantized, mix)));
  backward(loss);

  REQUIRE(tokens->grad.defined());
  REQUIRE(q.quantized->grad.defined());
  for (int64_t i = 0; i < tokens->value.numel(); ++i) {
    CHECK(tokens->grad[i] == q.quantized->grad[i]);  // exact, not approximate
  }
  CHECK(!codebook->grad.defined());  // no gradient through the lookup
}

TEST_CASE("latent loss gradients match central differences at 1e-4 (double)") {
  // Feature map 2x2 with d=4 (8+ tokens of margin from ties), N=3.
  Rng rng(21);
  auto enc_w = make_param(Tensor::randn(rng, {4, 4, 1, 1}, 0.5), "enc_w");
  auto enc_b = make_param(Tensor::randn(rng, {4}, 0.1), "enc_b");
  auto input = make_constant(Tensor::randn(rng, {1, 4, 2, 2}));
  auto codebook = make_param(Tensor::randn(rng, {3, 4}, 0.6), "codebook");
  const double alpha = 1.0, beta = 0.1;

  auto tokens_of = [&] { return to_tokens(conv2d(input, enc_w, enc_b, 1, 0)); };

  // Base forward fixes the stop-gradient branches and the argmin selection.
  auto base_tokens = tokens_of();
  const auto idx0 = nearest_codes(base_tokens->value, codebook->value);
  const Tensor z0 = base_tokens->value.clone();

  // Analytic gradients of the production latent loss, captured before any
  // oracle backward can touch the same leaves.
  {
    auto tokens = tokens_of();
    auto loss = latent_loss(tokens, codebook, idx0, alpha, beta);
    backward(loss);
  }
  const Tensor prod_w = enc_w->grad.clone();
  const Tensor prod_b = enc_b->grad.clone();
  const Tensor prod_cb = codebook->grad.clone();
  enc_w->grad.zero();
  enc_b->grad.zero();
  codebook->grad.zero();

  // FD oracle for encoder params: only the beta term varies; sg holds the
  // alpha term's tokens and the selected codes at their base values.
  auto fd_encoder = [&] {
    auto tokens = tokens_of();
    auto frozen_codes = make_constant(gather_rows(codebook, idx0)->value);
    return mul_scalar(mse_loss(tokens, frozen_codes), beta);
  };
  // FD oracle for the codebook: only the alpha term varies, tokens frozen.
  auto fd_codebook = [&] {
    auto frozen_tokens = make_constant(z0);
    return mul_scalar(mse_loss(frozen_tokens, gather_rows(codebook, idx0)), alpha);
  };

  auto check_against = [&](const Var& leaf, const Tensor& production,
                           const std::function<Var()>& oracle) {
    auto r = vqfont::testutil::grad_check(oracle, leaf, 1e-6);
    CHECK(r.max_rel_err < 1e-4);
    // The production latent loss must agree with the sg-frozen oracle's
    // recorded gradient, which the FD probes just validated.
    for (int64_t i = 0; i < production.numel(); ++i) {
      CHECK(production[i] == doctest::Approx(r.analytic[i]).epsilon(1e-10));
    }
  };
  check_against(enc_w, prod_w, fd_encoder);
  check_against(enc_b, prod_b, fd_encoder);
  check_against(codebook, prod_cb, fd_codebook);
}

TEST_CASE("vq model shapes, determinism, and degenerate input") {
  VQModelConfig cfg;
  cfg.codebook_size = 16;
  cfg.dim = 32;
  cfg.canvas = 32;
  cfg.downsamples = 3;
  cfg.res_blocks = 1;
  VQModel model(7, cfg);

  Rng rng(3);
  auto img = make_constant(Tensor::uniform(rng, {2, 1, 32, 32}, -1.0, 1.0));
  NoGradGuard no_grad;
  auto z = model.encode(img);
  CHECK(z->value.shape() == std::vector<int64_t>{2, 32, 4, 4});

  auto z2 = model.encode(img);
  for (int64_t i = 0; i < z->value.numel(); ++i) REQUIRE(z->value[i] == z2->value[i]);

  auto blank = make_constant(Tensor::full({1, 1, 32, 32}, 1.0));
  auto zb = model.encode(blank);
  CHECK(zb->value.all_finite());

  // Mismatched canvas is rejected with both sizes named.
  auto bad = make_constant(Tensor::zeros({1, 1, 20, 20}));
  CHECK_THROWS_AS(model.encode(bad), Error);
}

TEST_CASE("paper-scale encoder geometry: 128 canvas, 3 downsamples, d=256") {
  // Shape arithmetic only; weights are untrained.
  VQModelConfig cfg;
  cfg.codebook_size = 4;
  cfg.dim = 256;
  cfg.canvas = 128;
  cfg.downsamples = 3;
  cfg.res_blocks = 1;
  VQModel model(1, cfg);
  NoGradGuard no_grad;
  Rng rng(4);
  auto z = model.encode(make_constant(Tensor::uniform(rng, {1, 1, 128, 128}, -1.0, 1.0)));
  CHECK(z->value.shape() == std::vector<int64_t>{1, 256, 16, 16});
}

TEST_CASE("recon decoder consumes the quantized grid alone") {
  VQModelConfig cfg;
  cfg.codebook_size = 8;
  cfg.dim = 16;
  cfg.canvas = 16;
  cfg.downsamples = 2;
  cfg.res_blocks = 1;
  VQModel model(11, cfg);
  NoGradGuard no_grad;

  // Same z_q decodes identically no matter which image produced it:
  // the decoder signature admits nothing but the quantized grid.
  Rng rng(8);
  auto imgA = make_constant(Tensor::uniform(rng, {1, 1, 16, 16}, -1.0, 1.0));
  auto fA = model.reconstruct(imgA);
  auto zq = make_constant(tokens_to_bchw(fA.q.quantized, 1, 4, 4)->value);
  auto d1 = model.decoder()(zq);
  auto d2 = model.decoder()(zq);
  for (int64_t i = 0; i < d1->value.numel(); ++i) REQUIRE(d1->value[i] == d2->value[i]);
  CHECK(d1->value.abs_max() <= 1.0);  // bounded output
}

TEST_CASE("code activation map marks selected cells with 1") {
  VQModelConfig cfg;
  cfg.codebook_size = 6;
  cfg.dim = 8;
  cfg.canvas = 16;
  cfg.downsamples = 2;
  cfg.res_blocks = 1;
  VQModel model(13, cfg);

  const auto fonts = testutil::find_system_fonts();
  REQUIRE(!fonts.empty());
  const auto font = font::TrueTypeFont::load(fonts[0]);
  const auto glyph = font::render_glyph(font, U'E', 16);

  NoGradGuard no_grad;
  auto z = model.encode(make_constant(font::tensor_from_glyph(glyph)));
  auto idx = nearest_codes(to_tokens(z)->value, model.codebook()->value);

  for (int code = 0; code < 6; ++code) {
    const Tensor heat = model.code_activation_map(glyph, code);
    CHECK(heat.shape() == std::vector<int64_t>{4, 4});
    for (int64_t cell = 0; cell < 16; ++cell) {
      CHECK(heat[cell] >= 0.0);
      CHECK(heat[cell] <= 1.0);
      if (idx[static_cast<size_t>(cell)] == code) {
        CHECK(heat[cell] == 1.0);
      } else {
        CHECK(heat[cell] < 1.0);
      }
    }
  }
  CHECK_THROWS_AS(model.code_activation_map(glyph, 6), Error);
  CHECK_THROWS_AS(model.code_activation_map(glyph, -1), Error);
}

TEST_CASE("a short pretrain run reduces reconstruction loss") {
  const auto fonts = testutil::find_system_fonts();
  REQUIRE(fonts.size() >= 2);
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "vqfont_pretrain_unit";
  fs::remove_all(root);
  fs::create_directories(root);
  for (int i = 0; i < 2; ++i) {
    auto res = font::render_font(fonts[static_cast<size_t>(i)],
                                 {U'A', U'B', U'C', U'D', U'E', U'F', U'G', U'H'}, 16);
    const fs::path dir = root / res.images.front().font_id;
    fs::create_directories(dir);
    for (const auto& img : res.images) {
      font::save_glyph_png(dir / (font::codepoint_hex(img.ch) + ".png"), img);
    }
  }
  auto manifest = font::build_manifest(root, 1, 6, 3);

  VQModelConfig cfg;
  cfg.codebook_size = 8;
  cfg.dim = 16;
  cfg.canvas = 16;
  cfg.downsamples = 2;
  cfg.res_blocks = 1;
  PretrainOptions opt;
  opt.steps = 400;
  opt.batch = 6;
  opt.seed = 5;
  opt.lr = 1e-3;
  opt.log_every = 20;
  opt.checkpoint_every = 200;

  auto result = pretrain_codebook(manifest, cfg, opt, root / "vq.ckpt");
  CHECK(!result.diverged);
  CHECK(result.steps_completed == 400);
  REQUIRE(result.trace.size() >= 8);
  // Downward trend on an overfit-scale run, smoothed over trace windows.
  auto window_mean = [&](size_t begin, size_t count) {
    double s = 0;
    for (size_t i = begin; i < begin + count; ++i) s += result.trace[i].total;
    return s / static_cast<double>(count);
  };
  const double head = window_mean(0, 3);
  const double tail = window_mean(result.trace.size() - 3, 3);
  CHECK(tail < head);

  // Reload and confirm frozen-frontend hashing is stable.
  auto ck = nn::Checkpoint::load(root / "vq.ckpt");
  CHECK(ck.kind == "vq");
  CHECK(ck.step == 400);
  auto model = load_vq_model(ck);
  const uint64_t h = model->frontend_hash();
  model->freeze_frontend();
  CHECK(model->frontend_hash() == h);
  fs::remove_all(root);
}
