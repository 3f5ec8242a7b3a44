#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vqfont/font/glyph.hpp"

namespace vqfont::font {

// 8-bit grayscale PNG, 255 = white background. Non-grayscale inputs are
// converted on read.
void write_gray_png(const std::filesystem::path& path, const std::vector<uint8_t>& pixels,
                    int width, int height);
std::vector<uint8_t> read_gray_png(const std::filesystem::path& path, int* width, int* height);

// Glyph pixel p in [-1,1] maps to byte round((p+1)/2 * 255); rendering
// quantizes to the same 255ths so save/load round-trips bit-exactly.
void save_glyph_png(const std::filesystem::path& path, const GlyphImage& img);
GlyphImage load_glyph_png(const std::filesystem::path& path, std::string font_id, char32_t ch);

}  // namespace vqfont::font
