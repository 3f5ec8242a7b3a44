#pragma once

#include <string>
#include <vector>

#include "vqfont/common.hpp"

namespace vqfont::font {

// One rendered character: canvas x canvas pixels in [-1, +1],
// +1 = background (white), -1 = full ink.
struct GlyphImage {
  int canvas = 0;
  std::string font_id;
  char32_t ch = 0;
  std::vector<double> pixels;

  GlyphImage() = default;
  GlyphImage(int canvas_size, std::string font, char32_t cp)
      : canvas(canvas_size),
        font_id(std::move(font)),
        ch(cp),
        pixels(static_cast<size_t>(canvas_size) * canvas_size, 1.0) {}

  double& at(int r, int c) { return pixels[static_cast<size_t>(r) * canvas + c]; }
  double at(int r, int c) const { return pixels[static_cast<size_t>(r) * canvas + c]; }

  void validate() const {
    VQF_REQUIRE(static_cast<int>(pixels.size()) == canvas * canvas,
                "glyph pixel count " << pixels.size() << " != " << canvas << "^2");
    for (double p : pixels) {
      VQF_REQUIRE(p >= -1.0 && p <= 1.0, "glyph pixel " << p << " outside [-1,1]");
    }
  }

  double min_pixel() const {
    double m = 1.0;
    for (double p : pixels) m = std::min(m, p);
    return m;
  }
  double max_pixel() const {
    double m = -1.0;
    for (double p : pixels) m = std::max(m, p);
    return m;
  }
};

std::string codepoint_hex(char32_t cp);
char32_t codepoint_from_hex(const std::string& s);

// Unique non-whitespace codepoints of a UTF-8 string, in first-seen order.
std::vector<char32_t> utf8_codepoints(const std::string& text);

}  // namespace vqfont::font
