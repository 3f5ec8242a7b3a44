#include "vqfont/font/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>

namespace vqfont::font {

namespace {
struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;
}  // namespace

void write_gray_png(const std::filesystem::path& path, const std::vector<uint8_t>& pixels,
                    int width, int height) {
  VQF_REQUIRE(static_cast<int>(pixels.size()) == width * height,
              "png write: pixel count mismatch for " << path.string());
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  VQF_REQUIRE(fp != nullptr, "cannot open for writing: " << path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  VQF_REQUIRE(png, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    VQF_REQUIRE(false, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    VQF_REQUIRE(false, "libpng error while writing " << path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<size_t>(r) * width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<uint8_t> read_gray_png(const std::filesystem::path& path, int* width, int* height) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  VQF_REQUIRE(fp != nullptr, "cannot open image: " << path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  VQF_REQUIRE(png, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    VQF_REQUIRE(false, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    VQF_REQUIRE(false, "libpng error while reading " << path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_expand(png);
  const png_byte color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray(png, PNG_ERROR_ACTION_NONE, -1, -1);
  }
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  std::vector<uint8_t> out(static_cast<size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    png_read_row(png, out.data() + static_cast<size_t>(r) * w, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  *width = w;
  *height = h;
  return out;
}

void save_glyph_png(const std::filesystem::path& path, const GlyphImage& img) {
  std::vector<uint8_t> bytes(img.pixels.size());
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    const double p = img.pixels[i];
    bytes[i] = static_cast<uint8_t>(std::lround((p + 1.0) * 0.5 * 255.0));
  }
  write_gray_png(path, bytes, img.canvas, img.canvas);
}

GlyphImage load_glyph_png(const std::filesystem::path& path, std::string font_id, char32_t ch) {
  int w = 0, h = 0;
  const auto bytes = read_gray_png(path, &w, &h);
  VQF_REQUIRE(w == h, "glyph image must be square, got " << w << "x" << h << ": " << path.string());
  GlyphImage img(w, std::move(font_id), ch);
  for (size_t i = 0; i < bytes.size(); ++i) {
    img.pixels[i] = static_cast<double>(bytes[i]) / 255.0 * 2.0 - 1.0;
  }
  return img;
}

}  // namespace vqfont::font
