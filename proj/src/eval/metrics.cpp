#include "vqfont/eval/metrics.hpp"

#include <cmath>
#include <vector>

namespace vqfont::eval {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2 with L = 1
constexpr double kC2 = 0.03 * 0.03;

inline double to_unit(double p) { return (p + 1.0) * 0.5; }

const std::vector<double>& gaussian_window() {
  static const std::vector<double> w = [] {
    std::vector<double> g(kWindow * kWindow);
    const int half = kWindow / 2;
    double sum = 0.0;
    for (int y = 0; y < kWindow; ++y) {
      for (int x = 0; x < kWindow; ++x) {
        const double dy = y - half, dx = x - half;
        const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
        g[static_cast<size_t>(y * kWindow + x)] = v;
        sum += v;
      }
    }
    for (double& v : g) v /= sum;
    return g;
  }();
  return w;
}

}  // namespace

double rmse(const font::GlyphImage& a, const font::GlyphImage& b) {
  VQF_REQUIRE(a.canvas == b.canvas, "rmse: canvas mismatch " << a.canvas << " vs " << b.canvas);
  double acc = 0.0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = to_unit(a.pixels[i]) - to_unit(b.pixels[i]);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.pixels.size()));
}

double ssim(const font::GlyphImage& a, const font::GlyphImage& b) {
  VQF_REQUIRE(a.canvas == b.canvas, "ssim: canvas mismatch " << a.canvas << " vs " << b.canvas);
  const int n = a.canvas;
  VQF_REQUIRE(n >= kWindow, "ssim needs canvas >= " << kWindow << ", got " << n);
  const auto& win = gaussian_window();
  const int half = kWindow / 2;

  double total = 0.0;
  int64_t count = 0;
  for (int cy = half; cy < n - half; ++cy) {
    for (int cx = half; cx < n - half; ++cx) {
      double mu_a = 0, mu_b = 0;
      for (int wy = 0; wy < kWindow; ++wy) {
        for (int wx = 0; wx < kWindow; ++wx) {
          const double w = win[static_cast<size_t>(wy * kWindow + wx)];
          mu_a += w * to_unit(a.at(cy + wy - half, cx + wx - half));
          mu_b += w * to_unit(b.at(cy + wy - half, cx + wx - half));
        }
      }
      double var_a = 0, var_b = 0, cov = 0;
      for (int wy = 0; wy < kWindow; ++wy) {
        for (int wx = 0; wx < kWindow; ++wx) {
          const double w = win[static_cast<size_t>(wy * kWindow + wx)];
          const double da = to_unit(a.at(cy + wy - half, cx + wx - half)) - mu_a;
          const double db = to_unit(b.at(cy + wy - half, cx + wx - half)) - mu_b;
          var_a += w * da * da;
          var_b += w * db * db;
          cov += w * da * db;
        }
      }
      const double numerator = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
      const double denominator = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
      total += numerator / denominator;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace vqfont::eval
