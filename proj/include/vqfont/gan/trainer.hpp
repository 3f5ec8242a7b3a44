#pragma once

#include <fstream>

#include "vqfont/font/sampler.hpp"
#include "vqfont/gan/discriminator.hpp"
#include "vqfont/gen/generator.hpp"
#include "vqfont/nn/optim.hpp"

namespace vqfont::gan {

struct TrainOptions {
  int64_t iterations = 500000;
  int64_t batch = 48;
  int k = 3;
  double lr_g = 1e-4;
  double lr_d = 2e-4;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.9;
  double lambda_img = 1.0;
  double lambda_feat = 1.0;
  double lambda_cst = 0.1;
  double tau = 0.1;
  int64_t d_base_channels = 64;
  int d_blocks = 4;
  uint64_t seed = 1;
  int64_t checkpoint_every = 1000;
  std::string config_echo = "{}";
};

struct TrainResult {
  std::filesystem::path checkpoint;
  std::filesystem::path trace_csv;
  bool diverged = false;
  int64_t steps_completed = 0;
  uint64_t frontend_hash = 0;
};

// Alternating hinge-GAN optimization: one discriminator step then one
// generator step per iteration. The content encoder and codebook stay
// frozen; drift is checked by hash at every checkpoint.
class GanTrainer {
 public:
  GanTrainer(const font::DatasetManifest& manifest, const vq::VQModel& pretrained,
             gen::GeneratorConfig gen_cfg, TrainOptions opt,
             const std::filesystem::path& out_dir);

  struct StepLosses {
    double d_adv = 0, g_adv = 0, img = 0, feat = 0, cst = 0;
    bool finite() const;
  };

  struct Batch {
    gen::GeneratorModel::TrainBatch tensors;
    nn::Tensor targets;
    std::vector<int32_t> font_labels, char_labels;
    std::vector<size_t> group_representative;  // index per distinct font
    std::vector<std::vector<const font::GlyphImage*>> rep_aux_refs;
  };
  Batch draw_batch();

  // Full generator objective on a fixed batch, without stepping. The
  // discriminator is treated as a fixed function (its real-pass features
  // come detached); the tape reaches every trainable generator parameter.
  nn::Var generator_objective(const Batch& b, StepLosses* losses = nullptr);

  // One alternation; phases are also exposed separately for testing.
  StepLosses step();
  double step_discriminator();
  void step_generator(StepLosses& losses);

  TrainResult run();

  gen::GeneratorModel& generator() { return *gen_; }
  Discriminator& discriminator() { return *disc_; }
  uint64_t frontend_hash() const { return gen_->frontend_hash(); }
  int64_t steps_done() const { return steps_done_; }
  void save_checkpoint();

 private:
  const font::DatasetManifest& manifest_;
  gen::GeneratorConfig gen_cfg_;
  TrainOptions opt_;
  std::filesystem::path out_dir_;
  std::unique_ptr<gen::GeneratorModel> gen_;
  std::unique_ptr<Discriminator> disc_;
  std::unique_ptr<nn::Adam> g_opt_, d_opt_;
  font::GlyphStore store_;
  std::unique_ptr<font::TripletSampler> sampler_;
  Rng batch_rng_;
  std::map<std::string, int32_t> font_label_of_;
  std::map<char32_t, int32_t> char_label_of_;
  uint64_t frontend_hash0_ = 0;
  int64_t steps_done_ = 0;
};

}  // namespace vqfont::gan
