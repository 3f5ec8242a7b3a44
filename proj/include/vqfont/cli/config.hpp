#pragma once

#include <filesystem>
#include <string>

#include "vqfont/common.hpp"

namespace vqfont::cli {

// Every stage parameter with its paper value where one exists and the
// project default otherwise. The resolved config is echoed verbatim into
// every checkpoint, manifest, and report the run produces.
struct RunConfig {
  // global
  uint64_t seed = 1;
  int canvas = 128;

  // component codebook / encoder geometry
  int64_t codebook_size = 100;  // N
  int64_t dim = 256;            // d
  int downsamples = 3;
  int res_blocks = 2;

  // attention (CAM)
  int heads = 8;        // m
  int attn_layers = 3;  // stacked transformer layers
  double gsa_temperature = 1.0;

  // losses
  double alpha = 1.0;
  double beta = 0.1;
  double lambda_img = 1.0;
  double lambda_feat = 1.0;
  double lambda_cst = 0.1;
  double tau = 0.1;

  // references
  int k = 3;

  // codebook pretraining stage
  int64_t vq_steps = 50000;
  int64_t vq_batch = 256;
  double vq_lr = 3e-4;
  int64_t vq_glyph_limit = 0;
  bool reseed_dead_codes = false;

  // adversarial training stage
  int64_t train_iterations = 500000;
  int64_t train_batch = 48;
  double lr_g = 1e-4;
  double lr_d = 2e-4;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.9;
  int64_t d_base_channels = 64;
  int d_blocks = 4;
  int64_t checkpoint_every = 1000;
  bool use_lsa = true;
  bool use_gsa = true;

  // rendering stage
  double margin = 0.08;
  int n_seen_fonts = 6;
  int n_seen_chars = 100;

  // evaluation stage
  std::string eval_split = "UFUC";
  std::string ref_mode = "fixed";
  uint64_t ref_seed = 7;

  void validate() const;
  std::string to_json() const;  // stable key order

  // defaults <- file <- explicit overrides, in that precedence. Unknown
  // keys in the file are an error naming the key.
  static RunConfig from_file(const std::filesystem::path& path);
  void apply_json(const std::string& json_text);
};

}  // namespace vqfont::cli
