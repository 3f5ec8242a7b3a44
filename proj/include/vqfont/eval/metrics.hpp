#pragma once

#include <memory>
#include <string>

#include "vqfont/font/glyph.hpp"

namespace vqfont::eval {

// Metrics are computed on the [0,1] remap of the [-1,1] pixel storage.
double rmse(const font::GlyphImage& a, const font::GlyphImage& b);

// Windowed SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// dynamic range 1, averaged over centers where the full window fits.
double ssim(const font::GlyphImage& a, const font::GlyphImage& b);

// Seam for perceptual adapters (LPIPS-style pairwise metrics plug in here;
// none ship in the core because they need external pretrained networks).
class PairMetric {
 public:
  virtual ~PairMetric() = default;
  virtual std::string name() const = 0;
  virtual double operator()(const font::GlyphImage& a, const font::GlyphImage& b) const = 0;
};

class RmseMetric : public PairMetric {
 public:
  std::string name() const override { return "rmse"; }
  double operator()(const font::GlyphImage& a, const font::GlyphImage& b) const override {
    return rmse(a, b);
  }
};

class SsimMetric : public PairMetric {
 public:
  std::string name() const override { return "ssim"; }
  double operator()(const font::GlyphImage& a, const font::GlyphImage& b) const override {
    return ssim(a, b);
  }
};

}  // namespace vqfont::eval
