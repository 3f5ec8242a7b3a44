#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vqfont::font {

// Quadratic outline of one glyph in font units, y up, contours closed.
struct QuadPath {
  struct Seg {
    double x0, y0;  // start
    double cx, cy;  // control (ignored for lines)
    double x1, y1;  // end
    bool is_line;
  };
  std::vector<std::vector<Seg>> contours;
  bool empty() const { return contours.empty(); }
};

// Minimal TrueType reader: cmap (formats 4 and 12), loca, glyf with simple
// and composite glyphs. CFF-flavoured OpenType files are rejected at load.
class TrueTypeFont {
 public:
  static TrueTypeFont load(const std::filesystem::path& path);

  const std::string& id() const { return id_; }
  int units_per_em() const { return units_per_em_; }
  uint16_t glyph_index(char32_t cp) const;  // 0 = not mapped
  // True when the codepoint maps to a glyph that has at least one contour.
  bool has_outline(char32_t cp) const;
  QuadPath outline(char32_t cp) const;

 private:
  struct Table {
    uint32_t offset = 0;
    uint32_t length = 0;
  };
  uint32_t glyph_offset(uint16_t gid, uint32_t* length) const;
  void append_glyph(uint16_t gid, const double xform[6], int depth, QuadPath& out) const;

  std::string id_;
  std::string path_;
  std::vector<uint8_t> data_;
  int units_per_em_ = 0;
  bool long_loca_ = false;
  uint16_t num_glyphs_ = 0;
  Table cmap_, loca_, glyf_;
  uint32_t cmap_subtable_ = 0;  // absolute offset of the chosen subtable
  uint16_t cmap_format_ = 0;
};

// Flattens quadratics to polygons (closed point loops) with a deviation
// tolerance expressed in font units.
std::vector<std::vector<std::pair<double, double>>> flatten_path(const QuadPath& path,
                                                                 double tolerance_units);

}  // namespace vqfont::font
