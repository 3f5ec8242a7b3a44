#include "vqfont/font/render.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace vqfont::font {

namespace {

// Coverage of closed polygons under the nonzero winding rule, anti-aliased
// with 4 subscanlines per pixel row and exact horizontal span clipping.
void rasterize(const std::vector<std::vector<std::pair<double, double>>>& polys, int canvas,
               std::vector<double>& coverage) {
  constexpr int kSubrows = 4;
  struct Edge {
    double x0, y0, x1, y1;
    int dir;
  };
  std::vector<Edge> edges;
  for (const auto& poly : polys) {
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
      const auto& a = poly[i];
      const auto& b = poly[(i + 1) % n];
      if (a.second == b.second) continue;  // horizontal: no crossings
      edges.push_back({a.first, a.second, b.first, b.second, b.second > a.second ? 1 : -1});
    }
  }
  std::vector<std::pair<double, int>> crossings;
  for (int row = 0; row < canvas; ++row) {
    double* cov = coverage.data() + static_cast<size_t>(row) * canvas;
    for (int sub = 0; sub < kSubrows; ++sub) {
      const double y = row + (sub + 0.5) / kSubrows;
      crossings.clear();
      for (const auto& e : edges) {
        const double ymin = std::min(e.y0, e.y1);
        const double ymax = std::max(e.y0, e.y1);
        if (y < ymin || y >= ymax) continue;
        const double x = e.x0 + (y - e.y0) * (e.x1 - e.x0) / (e.y1 - e.y0);
        crossings.emplace_back(x, e.dir);
      }
      if (crossings.empty()) continue;
      std::sort(crossings.begin(), crossings.end());
      int winding = 0;
      double span_start = 0.0;
      for (const auto& [x, dir] : crossings) {
        const int prev = winding;
        winding += dir;
        if (prev == 0 && winding != 0) {
          span_start = x;
        } else if (prev != 0 && winding == 0) {
          // Clip [span_start, x) to pixel cells.
          const double a = std::max(span_start, 0.0);
          const double b = std::min(x, static_cast<double>(canvas));
          if (b > a) {
            const int px0 = static_cast<int>(std::floor(a));
            const int px1 = std::min(static_cast<int>(std::ceil(b)) - 1, canvas - 1);
            for (int px = px0; px <= px1; ++px) {
              const double lo = std::max(a, static_cast<double>(px));
              const double hi = std::min(b, static_cast<double>(px + 1));
              if (hi > lo) cov[px] += (hi - lo) / kSubrows;
            }
          }
        }
      }
    }
  }
}

}  // namespace

GlyphImage render_glyph(const TrueTypeFont& font, char32_t cp, int canvas, double margin_frac) {
  VQF_REQUIRE(canvas > 0, "canvas must be positive");
  VQF_REQUIRE(font.has_outline(cp), "codepoint U+" << std::hex << static_cast<uint32_t>(cp)
                                                   << " has no outline in " << font.id());
  const QuadPath path = font.outline(cp);
  const double tol = font.units_per_em() / 512.0;
  auto polys = flatten_path(path, tol);
  VQF_REQUIRE(!polys.empty(), "degenerate outline for U+" << std::hex
                                                          << static_cast<uint32_t>(cp));

  double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
  for (const auto& poly : polys) {
    for (const auto& [x, y] : poly) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  const double w = xmax - xmin;
  const double h = ymax - ymin;
  const double box = canvas * (1.0 - 2.0 * margin_frac);
  const double scale = box / std::max({w, h, 1e-9});
  const double cx = (xmin + xmax) / 2.0;
  const double cy = (ymin + ymax) / 2.0;
  const double half = canvas / 2.0;

  // Font units are y-up; device rows are y-down.
  std::vector<std::vector<std::pair<double, double>>> device(polys.size());
  for (size_t i = 0; i < polys.size(); ++i) {
    device[i].reserve(polys[i].size());
    for (const auto& [x, y] : polys[i]) {
      device[i].emplace_back(half + (x - cx) * scale, half - (y - cy) * scale);
    }
  }

  std::vector<double> coverage(static_cast<size_t>(canvas) * canvas, 0.0);
  rasterize(device, canvas, coverage);

  GlyphImage img(canvas, font.id(), cp);
  for (size_t i = 0; i < coverage.size(); ++i) {
    const double c = std::clamp(coverage[i], 0.0, 1.0);
    // Quantized to the stored byte and mapped back with the loader's exact
    // expression, so the PNG round trip is bit-identical.
    const double byte = 255.0 - std::round(c * 255.0);
    img.pixels[i] = byte / 255.0 * 2.0 - 1.0;
  }
  return img;
}

RenderResult render_font(const std::filesystem::path& font_file,
                         const std::vector<char32_t>& chars, int canvas, double margin_frac) {
  const TrueTypeFont font = TrueTypeFont::load(font_file);
  RenderResult result;
  for (char32_t cp : chars) {
    if (!font.has_outline(cp)) {
      result.skipped.push_back(cp);
      std::cerr << "warning: " << font.id() << " has no outline for U+" << codepoint_hex(cp)
                << ", skipped\n";
      continue;
    }
    result.images.push_back(render_glyph(font, cp, canvas, margin_frac));
  }
  return result;
}

}  // namespace vqfont::font
