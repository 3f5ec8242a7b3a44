#pragma once

#include <filesystem>
#include <vector>

#include "vqfont/font/glyph.hpp"
#include "vqfont/font/truetype.hpp"

namespace vqfont::font {

struct RenderResult {
  std::vector<GlyphImage> images;
  std::vector<char32_t> skipped;  // codepoints without an outline
};

// Renders each codepoint centered and uniformly scaled so the glyph's
// bounding box fits the canvas minus the margin fraction on every side.
// Codepoints without an outline are skipped and reported.
RenderResult render_font(const std::filesystem::path& font_file,
                         const std::vector<char32_t>& chars, int canvas,
                         double margin_frac = 0.08);

GlyphImage render_glyph(const TrueTypeFont& font, char32_t cp, int canvas,
                        double margin_frac = 0.08);

}  // namespace vqfont::font
