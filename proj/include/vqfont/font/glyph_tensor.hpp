#pragma once

#include <algorithm>

#include "vqfont/font/glyph.hpp"
#include "vqfont/nn/tensor.hpp"

namespace vqfont::font {

// (B,1,H,W) batch from glyph images; all must share one canvas.
inline nn::Tensor batch_from_glyphs(const std::vector<const GlyphImage*>& glyphs) {
  VQF_REQUIRE(!glyphs.empty(), "empty glyph batch");
  const int canvas = glyphs.front()->canvas;
  nn::Tensor t({static_cast<int64_t>(glyphs.size()), 1, canvas, canvas});
  double* p = t.data();
  for (const GlyphImage* g : glyphs) {
    VQF_REQUIRE(g->canvas == canvas, "glyph batch mixes canvas sizes "
                << canvas << " and " << g->canvas);
    p = std::copy(g->pixels.begin(), g->pixels.end(), p);
  }
  return t;
}

inline nn::Tensor tensor_from_glyph(const GlyphImage& g) {
  return batch_from_glyphs({&g});
}

// One batch slice back to a glyph image, clamped into [-1, 1].
inline GlyphImage glyph_from_tensor(const nn::Tensor& t, int64_t index, std::string font_id,
                                    char32_t ch) {
  VQF_REQUIRE(t.ndim() == 4 && t.dim(1) == 1 && t.dim(2) == t.dim(3),
              "expected (B,1,H,H) tensor, got " << t.shape_str());
  const int canvas = static_cast<int>(t.dim(2));
  GlyphImage g(canvas, std::move(font_id), ch);
  const double* src = t.data() + index * canvas * canvas;
  for (size_t i = 0; i < g.pixels.size(); ++i) {
    g.pixels[i] = std::clamp(src[i], -1.0, 1.0);
  }
  return g;
}

}  // namespace vqfont::font
