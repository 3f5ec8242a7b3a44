#pragma once

#include "vqfont/eval/evaluator.hpp"
#include "vqfont/gan/trainer.hpp"
#include "vqfont/vq/pretrain.hpp"

namespace vqfont::eval {

enum class AblationAxis { CodebookSize, Modules, RefCount };
AblationAxis axis_from_string(const std::string& s);

struct AblationConfig {
  vq::VQModelConfig vq_cfg;
  vq::PretrainOptions pretrain;
  gen::GeneratorConfig gen_cfg;
  gan::TrainOptions train;
  EvalOptions eval;
  // Reuse paths: when set, the modules axis reuses the pretrained codebook,
  // and "full" / ref-count sweeps reuse an already trained model instead of
  // retraining with the shared seed.
  std::filesystem::path vq_checkpoint;
  std::filesystem::path full_checkpoint;
};

struct AblationRun {
  std::string value;
  MetricReport report;
};

// One training+evaluation run per axis value with a shared seed; the
// ref-count axis sweeps K at inference only. Values are validated before
// any training starts.
std::vector<AblationRun> ablation_sweep(const font::DatasetManifest& manifest, AblationAxis axis,
                                        const std::vector<std::string>& values,
                                        const AblationConfig& cfg,
                                        const std::filesystem::path& work_dir);

// value,ssim,rmse rows (Fig. 4-style plot data for the ref-count axis).
void write_sweep_csv(const std::vector<AblationRun>& runs, const std::filesystem::path& path);

}  // namespace vqfont::eval
