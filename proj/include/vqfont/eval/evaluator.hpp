#pragma once

#include <map>

#include "vqfont/eval/metrics.hpp"
#include "vqfont/font/sampler.hpp"
#include "vqfont/gen/generator.hpp"

namespace vqfont::eval {

enum class RefMode { Fixed, Random };
RefMode ref_mode_from_string(const std::string& s);
std::string to_string(RefMode m);

struct PairRecord {
  std::string font_id;
  char32_t ch;
  std::map<std::string, double> metrics;  // rmse, ssim, plus any adapters
};

struct MetricReport {
  std::string split;
  int k = 0;
  uint64_t ref_seed = 0;
  RefMode ref_mode = RefMode::Fixed;
  std::vector<PairRecord> records;
  std::map<std::string, double> aggregates;  // mean per metric
  int64_t skipped = 0;
  std::string config_echo;

  double aggregate(const std::string& metric) const;
  void save(const std::filesystem::path& path) const;  // deterministic JSON
  std::string to_json() const;
};

struct EvalOptions {
  std::string split = "UFUC";
  int k = 3;
  uint64_t ref_seed = 7;
  RefMode ref_mode = RefMode::Fixed;
  std::string config_echo = "{}";
  std::vector<const PairMetric*> extra_metrics;  // perceptual adapters
};

// Generates every (font, char) of the split, compares to ground truth, and
// aggregates. Missing ground-truth or content images are skipped and
// counted. Deterministic for a fixed (checkpoint, manifest, seed).
MetricReport evaluate_split(const gen::GeneratorModel& model,
                            const font::DatasetManifest& manifest, const EvalOptions& opt);

}  // namespace vqfont::eval
