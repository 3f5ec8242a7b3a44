#pragma once

#include <array>

#include "vqfont/font/manifest.hpp"
#include "vqfont/vq/model.hpp"

namespace vqfont::vq {

struct PretrainOptions {
  int64_t steps = 50000;
  int64_t batch = 256;
  double lr = 3e-4;
  double alpha = 1.0;
  double beta = 0.1;
  int64_t glyph_limit = 0;  // 0 = every seen char the template font renders
  uint64_t seed = 1;
  int64_t checkpoint_every = 1000;
  int64_t log_every = 100;
  bool reseed_dead_codes = false;
  int64_t dead_code_window = 1000;
  std::string config_echo = "{}";
};

struct TracePoint {
  int64_t step;
  double l1;
  double latent;
  double total;
};

struct PretrainResult {
  std::filesystem::path checkpoint;
  std::vector<TracePoint> trace;
  bool diverged = false;
  int64_t steps_completed = 0;
  double final_l1 = 0.0;  // trailing-window mean of the reconstruction term
};

// Trains encoder + codebook + recon decoder on the template font's seen
// characters. On NaN loss the run stops and the last finite checkpoint wins.
PretrainResult pretrain_codebook(const font::DatasetManifest& manifest, const VQModelConfig& cfg,
                                 const PretrainOptions& opt,
                                 const std::filesystem::path& out_checkpoint,
                                 const std::filesystem::path& trace_csv = {});

}  // namespace vqfont::vq
