#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "testutil.hpp"
#include "vqfont/font/image_io.hpp"
#include "vqfont/font/render.hpp"
#include "vqfont/gan/losses.hpp"
#include "vqfont/gan/trainer.hpp"

using namespace vqfont;
using namespace vqfont::nn;
using namespace vqfont::gan;

namespace {

Var logits_of(std::vector<double> v) {
  const int64_t n = static_cast<int64_t>(v.size());
  return make_constant(Tensor::from(std::move(v), {n, 1}));
}

// Small rendered corpus + manifest + pretrained-at-init VQ model, reused by
// the trainer tests below.
struct TrainerFixture {
  std::filesystem::path root;
  font::DatasetManifest manifest;
  std::unique_ptr<vq::VQModel> vq_model;

  TrainerFixture() {
    namespace fs = std::filesystem;
    const auto fonts = testutil::find_system_fonts();
    REQUIRE(fonts.size() >= 3);
    root = fs::temp_directory_path() / "vqfont_trainer_fixture";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string charset = "ABCDEFGHIJKLMNOP";
    for (int i = 0; i < 3; ++i) {
      auto res = font::render_font(fonts[static_cast<size_t>(i)],
                                   {charset.begin(), charset.end()}, 16);
      fs::create_directories(root / res.images.front().font_id);
      for (const auto& img : res.images) {
        font::save_glyph_png(root / img.font_id / (font::codepoint_hex(img.ch) + ".png"), img);
      }
    }
    manifest = font::build_manifest(root, 2, 12, 11);

    vq::VQModelConfig cfg;
    cfg.codebook_size = 8;
    cfg.dim = 16;
    cfg.canvas = 16;
    cfg.downsamples = 2;
    cfg.res_blocks = 1;
    vq_model = std::make_unique<vq::VQModel>(3, cfg);  // untrained weights suffice here
  }
  ~TrainerFixture() {
    std::error_code ec;
    std::filesystem::remove_all(root, ec);
  }

  TrainOptions micro_options() const {
    TrainOptions opt;
    opt.iterations = 2;
    opt.batch = 4;
    opt.k = 2;
    opt.d_base_channels = 8;
    opt.d_blocks = 2;
    opt.seed = 17;
    opt.checkpoint_every = 1;
    return opt;
  }
};

}  // namespace

TEST_CASE("hinge losses reproduce the hand-computed points") {
  // Margins satisfied: D(real)=2, D(fake)=-2 -> d loss 0.
  CHECK(hinge_d_loss(logits_of({2.0}), logits_of({-2.0}))->value[0] == doctest::Approx(0.0));
  // Zero logits: d loss = 2, g loss = 0.
  CHECK(hinge_d_loss(logits_of({0.0}), logits_of({0.0}))->value[0] == doctest::Approx(2.0));
  CHECK(hinge_g_loss(logits_of({0.0}))->value[0] == doctest::Approx(0.0));
  // D(fake)=3 -> g loss = -3.
  CHECK(hinge_g_loss(logits_of({3.0}))->value[0] == doctest::Approx(-3.0));
  // Nonnegative d loss and piecewise linearity over a few points.
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    const double r = d(rng), f = d(rng);
    const double expect = std::max(0.0, 1.0 - r) + std::max(0.0, 1.0 + f);
    CHECK(hinge_d_loss(logits_of({r}), logits_of({f}))->value[0] == doctest::Approx(expect));
    CHECK(expect >= 0.0);
  }
}

TEST_CASE("matching losses: identity, opposite constants, brute-force oracle") {
  Rng rng(5);
  auto a = make_constant(Tensor::uniform(rng, {2, 1, 8, 8}, -1.0, 1.0));
  CHECK(image_matching_loss(a, a)->value[0] == 0.0);

  auto white = make_constant(Tensor::full({1, 1, 8, 8}, 1.0));
  auto black = make_constant(Tensor::full({1, 1, 8, 8}, -1.0));
  CHECK(image_matching_loss(white, black)->value[0] == doctest::Approx(2.0));

  auto b = make_constant(Tensor::uniform(rng, {2, 1, 8, 8}, -1.0, 1.0));
  double oracle = 0.0;
  for (int64_t i = 0; i < a->value.numel(); ++i) oracle += std::abs(a->value[i] - b->value[i]);
  oracle /= static_cast<double>(a->value.numel());
  CHECK(std::abs(image_matching_loss(a, b)->value[0] - oracle) < 1e-6);

  // Feature matching sums the per-layer means.
  auto f1 = make_constant(Tensor::full({1, 2, 2, 2}, 0.5));
  auto f2 = make_constant(Tensor::full({1, 2, 2, 2}, -0.5));
  auto z = make_constant(Tensor::zeros({1, 2, 2, 2}));
  CHECK(feature_matching_loss({f1, f2}, {z, z})->value[0] == doctest::Approx(1.0));
}

TEST_CASE("style contrastive loss closed forms and row-permutation invariance") {
  Rng rng(7);
  const double tau = 0.1;

  // Uniform similarity: positive == every negative == anchor.
  for (int negs : {1, 3, 7}) {
    auto anchor = make_constant(Tensor::randn(rng, {6, 4}));
    auto positive = make_constant(anchor->value.clone());
    std::vector<Var> negatives;
    for (int i = 0; i < negs; ++i) negatives.push_back(make_constant(anchor->value.clone()));
    const double loss = style_contrastive_loss(anchor, positive, negatives, tau)->value[0];
    CHECK(std::abs(loss - std::log(1.0 + negs)) < 1e-5);
  }

  // Large positive similarity with weak negatives drives the loss to 0.
  {
    auto anchor = make_constant(Tensor::randn(rng, {6, 4}));
    auto positive = make_constant(anchor->value.clone());
    // Orthogonal-ish negatives: swap feature signs pairwise.
    Tensor neg = anchor->value.clone();
    for (int64_t r = 0; r < 6; ++r) {
      std::swap(neg.at(r, 0), neg.at(r, 1));
      neg.at(r, 0) = -neg.at(r, 0);
      std::swap(neg.at(r, 2), neg.at(r, 3));
      neg.at(r, 2) = -neg.at(r, 2);
    }
    const double loss =
        style_contrastive_loss(anchor, positive, {make_constant(neg)}, tau)->value[0];
    CHECK(loss < 1e-3);
    CHECK(loss > 0.0);
  }

  // Hand-computed N=2, d=2 instance with one negative.
  {
    auto anchor = make_constant(Tensor::from({1.0, 0.0, 0.0, 2.0}, {2, 2}));
    auto positive = make_constant(Tensor::from({1.0, 1.0, 0.0, 1.0}, {2, 2}));
    auto negative = make_constant(Tensor::from({-1.0, 0.0, 1.0, 1.0}, {2, 2}));
    // cos(anchor_0, pos_0) = 1/sqrt(2); cos(anchor_1, pos_1) = 1.
    // cos(anchor_0, neg_0) = -1;        cos(anchor_1, neg_1) = 1/sqrt(2).
    const double s_pos = (1.0 / std::sqrt(2.0) + 1.0) / (2.0 * tau);
    const double s_neg = (-1.0 + 1.0 / std::sqrt(2.0)) / (2.0 * tau);
    const double expect = std::log(std::exp(s_pos) + std::exp(s_neg)) - s_pos;
    const double got = style_contrastive_loss(anchor, positive, {negative}, tau)->value[0];
    CHECK(std::abs(got - expect) < 1e-6);
  }

  // Invariance under a common row permutation.
  {
    Tensor a = Tensor::randn(rng, {5, 3});
    Tensor p = Tensor::randn(rng, {5, 3});
    Tensor n1 = Tensor::randn(rng, {5, 3});
    Tensor n2 = Tensor::randn(rng, {5, 3});
    const double base = style_contrastive_loss(make_constant(a), make_constant(p),
                                               {make_constant(n1), make_constant(n2)}, tau)
                            ->value[0];
    std::vector<int64_t> perm{3, 0, 4, 1, 2};
    auto permute = [&](const Tensor& t) {
      Tensor out({5, 3});
      for (int64_t r = 0; r < 5; ++r) {
        for (int64_t c = 0; c < 3; ++c) out.at(r, c) = t.at(perm[static_cast<size_t>(r)], c);
      }
      return out;
    };
    const double permuted =
        style_contrastive_loss(make_constant(permute(a)), make_constant(permute(p)),
                               {make_constant(permute(n1)), make_constant(permute(n2))}, tau)
            ->value[0];
    CHECK(base == doctest::Approx(permuted).epsilon(1e-12));
  }

  // No negatives is an error.
  auto anchor = make_constant(Tensor::randn(rng, {3, 2}));
  CHECK_THROWS_AS(style_contrastive_loss(anchor, anchor, {}, tau), Error);
}

TEST_CASE("projection discriminator conditions on labels") {
  Rng rng(9);
  DiscriminatorConfig cfg;
  cfg.canvas = 16;
  cfg.base_channels = 8;
  cfg.blocks = 2;
  cfg.num_fonts = 4;
  cfg.num_chars = 6;
  Discriminator disc(rng, cfg);

  auto img = make_constant(Tensor::uniform(rng, {1, 1, 16, 16}, -1.0, 1.0));
  auto out_a = disc(img, {0}, {0});
  auto out_b = disc(img, {1}, {0});
  CHECK(out_a.logits->value[0] != out_b.logits->value[0]);  // projection term active
  CHECK(out_a.features.size() == 2);                        // L = block count

  // Zeroed embeddings collapse to the unconditional backbone score.
  disc.font_embedding().table()->value.zero();
  disc.char_embedding().table()->value.zero();
  auto u0 = disc(img, {2}, {3});
  auto u1 = disc(img, {1}, {5});
  CHECK(u0.logits->value[0] == u1.logits->value[0]);

  CHECK_THROWS_AS(disc(img, {4}, {0}), Error);   // style label out of range
  CHECK_THROWS_AS(disc(img, {0}, {-1}), Error);  // char label out of range
}

TEST_CASE("discriminator feature list length follows the architecture depth") {
  Rng rng(13);
  DiscriminatorConfig cfg;
  cfg.canvas = 16;
  cfg.base_channels = 4;
  cfg.blocks = 4;
  cfg.num_fonts = 2;
  cfg.num_chars = 2;
  Discriminator disc(rng, cfg);
  auto img = make_constant(Tensor::uniform(rng, {2, 1, 16, 16}, -1.0, 1.0));
  auto out = disc(img, {0, 1}, {0, 1});
  CHECK(out.features.size() == 4);
  CHECK(out.features.back()->value.dim(2) == 1);  // 16 / 2^4
  CHECK(out.logits->value.shape() == std::vector<int64_t>{2, 1});
}

TEST_CASE("optimization steps touch only their own parameters") {
  TrainerFixture fx;
  gen::GeneratorConfig gcfg;
  gcfg.heads = 4;
  gcfg.attn_layers = 2;
  GanTrainer trainer(fx.manifest, *fx.vq_model, gcfg, fx.micro_options(), fx.root / "run");

  const uint64_t frontend0 = trainer.frontend_hash();
  const uint64_t g0 = trainer.generator().trainable_hash();
  const uint64_t d0 = trainer.discriminator().parameters_hash();

  trainer.step_discriminator();
  CHECK(trainer.generator().trainable_hash() == g0);  // D step leaves G alone
  const uint64_t d1 = trainer.discriminator().parameters_hash();
  CHECK(d1 != d0);

  GanTrainer::StepLosses losses;
  trainer.step_generator(losses);
  CHECK(trainer.discriminator().parameters_hash() == d1);  // G step leaves D alone
  CHECK(trainer.generator().trainable_hash() != g0);
  CHECK(trainer.frontend_hash() == frontend0);  // frozen frontend untouched

  CHECK(losses.finite());
  CHECK(losses.img > 0.0);
}

TEST_CASE("generator objective matches central differences on a 10-parameter slice") {
  TrainerFixture fx;
  gen::GeneratorConfig gcfg;
  gcfg.heads = 4;
  gcfg.attn_layers = 2;
  TrainOptions opt = fx.micro_options();
  GanTrainer trainer(fx.manifest, *fx.vq_model, gcfg, opt, fx.root / "fd");

  auto batch = trainer.draw_batch();
  auto params = trainer.generator().trainable_parameters();

  // Analytic gradients once.
  zero_grad(params);
  auto loss = trainer.generator_objective(batch);
  backward(loss);

  // Slice: the largest-gradient entry of 10 distinct parameter tensors.
  struct Pick {
    Var param;
    int64_t index;
    double analytic;
  };
  std::vector<Pick> picks;
  for (const auto& p : params) {
    if (!p->grad.defined()) continue;
    int64_t best = 0;
    for (int64_t i = 1; i < p->grad.numel(); ++i) {
      if (std::abs(p->grad[i]) > std::abs(p->grad[best])) best = i;
    }
    if (std::abs(p->grad[best]) > 1e-8) picks.push_back({p, best, p->grad[best]});
    if (picks.size() == 10) break;
  }
  REQUIRE(picks.size() == 10);

  const double h = 1e-5;
  for (const auto& pick : picks) {
    const double orig = pick.param->value[pick.index];
    pick.param->value[pick.index] = orig + h;
    const double fp = trainer.generator_objective(batch)->value[0];
    pick.param->value[pick.index] = orig - h;
    const double fm = trainer.generator_objective(batch)->value[0];
    pick.param->value[pick.index] = orig;
    const double fd = (fp - fm) / (2.0 * h);
    const double rel =
        std::abs(fd - pick.analytic) / std::max({std::abs(fd), std::abs(pick.analytic), 1e-8});
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("a short training run writes checkpoints, traces, and keeps the frontend frozen") {
  TrainerFixture fx;
  gen::GeneratorConfig gcfg;
  gcfg.heads = 4;
  gcfg.attn_layers = 2;
  TrainOptions opt = fx.micro_options();
  opt.iterations = 3;
  GanTrainer trainer(fx.manifest, *fx.vq_model, gcfg, opt, fx.root / "short");
  const uint64_t frontend0 = trainer.frontend_hash();

  auto result = trainer.run();
  CHECK(!result.diverged);
  CHECK(result.steps_completed == 3);
  CHECK(result.frontend_hash == frontend0);
  CHECK(std::filesystem::exists(result.checkpoint));
  CHECK(std::filesystem::exists(result.trace_csv));

  // The checkpoint reloads into a working generator.
  auto ck = nn::Checkpoint::load(result.checkpoint);
  CHECK(ck.step == 3);
  auto gen2 = gen::load_generator(ck);
  CHECK(gen2->frontend_hash() == frontend0);

  // Trace has a header and one row per iteration.
  std::ifstream in(result.trace_csv);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}
