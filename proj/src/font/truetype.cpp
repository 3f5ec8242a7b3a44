#include "vqfont/font/truetype.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "vqfont/common.hpp"

namespace vqfont::font {

namespace {

struct Reader {
  const std::vector<uint8_t>& d;
  const std::string& path;

  uint8_t u8(uint32_t off) const {
    VQF_REQUIRE(off < d.size(), "font read past end: " << path);
    return d[off];
  }
  uint16_t u16(uint32_t off) const {
    VQF_REQUIRE(off + 2 <= d.size(), "font read past end: " << path);
    return static_cast<uint16_t>((d[off] << 8) | d[off + 1]);
  }
  int16_t i16(uint32_t off) const { return static_cast<int16_t>(u16(off)); }
  uint32_t u32(uint32_t off) const {
    VQF_REQUIRE(off + 4 <= d.size(), "font read past end: " << path);
    return (static_cast<uint32_t>(d[off]) << 24) | (static_cast<uint32_t>(d[off + 1]) << 16) |
           (static_cast<uint32_t>(d[off + 2]) << 8) | d[off + 3];
  }
  double f2dot14(uint32_t off) const { return i16(off) / 16384.0; }
};

// Simple-glyph point flags.
constexpr uint8_t kOnCurve = 0x01;
constexpr uint8_t kXShort = 0x02;
constexpr uint8_t kYShort = 0x04;
constexpr uint8_t kRepeat = 0x08;
constexpr uint8_t kXSame = 0x10;
constexpr uint8_t kYSame = 0x20;

// Composite-glyph flags.
constexpr uint16_t kArgsAreWords = 0x0001;
constexpr uint16_t kArgsAreXY = 0x0002;
constexpr uint16_t kWeHaveScale = 0x0008;
constexpr uint16_t kMoreComponents = 0x0020;
constexpr uint16_t kXYScale = 0x0040;
constexpr uint16_t kTwoByTwo = 0x0080;

struct ContourPoint {
  double x, y;
  bool on;
};

void emit_contour(const std::vector<ContourPoint>& pts, const double xf[6],
                  std::vector<QuadPath::Seg>& segs) {
  const size_t n = pts.size();
  if (n < 2) return;

  auto apply = [&](const ContourPoint& p) -> std::pair<double, double> {
    return {xf[0] * p.x + xf[2] * p.y + xf[4], xf[1] * p.x + xf[3] * p.y + xf[5]};
  };

  // Rotate so the walk starts on-curve; synthesize a midpoint start if the
  // contour has no on-curve point at all.
  std::vector<ContourPoint> work;
  work.reserve(n + 1);
  size_t start = n;
  for (size_t i = 0; i < n; ++i) {
    if (pts[i].on) {
      start = i;
      break;
    }
  }
  if (start == n) {
    ContourPoint mid{(pts[n - 1].x + pts[0].x) / 2.0, (pts[n - 1].y + pts[0].y) / 2.0, true};
    work.push_back(mid);
    for (size_t i = 0; i < n; ++i) work.push_back(pts[i]);
  } else {
    for (size_t i = 0; i < n; ++i) work.push_back(pts[(start + i) % n]);
  }
  work.push_back(work.front());  // close

  size_t i = 0;
  while (i + 1 < work.size()) {
    const ContourPoint& a = work[i];
    const ContourPoint& b = work[i + 1];
    auto [ax, ay] = apply(a);
    if (b.on) {
      auto [bx, by] = apply(b);
      segs.push_back({ax, ay, 0, 0, bx, by, true});
      i += 1;
    } else {
      // Off-curve control; the segment ends at the next on-curve point or at
      // the implied midpoint between consecutive off-curve points.
      ContourPoint end{};
      size_t next = i + 2;
      if (next >= work.size()) {
        end = work.front();
      } else if (work[next].on) {
        end = work[next];
      } else {
        end = {(b.x + work[next].x) / 2.0, (b.y + work[next].y) / 2.0, true};
      }
      auto [cx, cy] = apply(b);
      auto ep = apply(end);
      segs.push_back({ax, ay, cx, cy, ep.first, ep.second, false});
      if (next < work.size() && work[next].on) {
        i += 2;
      } else {
        // Implied midpoint becomes the next start.
        work[i + 1] = end;
        i += 1;
      }
    }
  }
}

}  // namespace

TrueTypeFont TrueTypeFont::load(const std::filesystem::path& path) {
  TrueTypeFont f;
  f.path_ = path.string();
  f.id_ = path.stem().string();
  {
    std::ifstream in(path, std::ios::binary);
    VQF_REQUIRE(in.good(), "cannot open font file: " << path.string());
    f.data_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  Reader r{f.data_, f.path_};
  const uint32_t version = r.u32(0);
  VQF_REQUIRE(version == 0x00010000 || version == 0x74727565,
              "unparseable font (not TrueType-flavoured): " << f.path_);
  const uint16_t num_tables = r.u16(4);

  auto table = [&](const char tag[4]) -> Table {
    for (uint16_t i = 0; i < num_tables; ++i) {
      const uint32_t rec = 12 + 16u * i;
      if (std::memcmp(f.data_.data() + rec, tag, 4) == 0) {
        return {r.u32(rec + 8), r.u32(rec + 12)};
      }
    }
    return {};
  };

  const Table head = table("head");
  const Table maxp = table("maxp");
  f.cmap_ = table("cmap");
  f.loca_ = table("loca");
  f.glyf_ = table("glyf");
  VQF_REQUIRE(head.offset && maxp.offset && f.cmap_.offset,
              "unparseable font (missing required tables): " << f.path_);
  VQF_REQUIRE(f.glyf_.offset && f.loca_.offset,
              "unparseable font (no glyf outlines; CFF not supported): " << f.path_);

  f.units_per_em_ = r.u16(head.offset + 18);
  VQF_REQUIRE(f.units_per_em_ > 0, "unparseable font (bad unitsPerEm): " << f.path_);
  f.long_loca_ = r.i16(head.offset + 50) != 0;
  f.num_glyphs_ = r.u16(maxp.offset + 4);

  // Prefer a UCS-4 subtable, then Windows BMP, then anything Unicode.
  const uint16_t n_sub = r.u16(f.cmap_.offset + 2);
  uint32_t best = 0;
  int best_rank = -1;
  for (uint16_t i = 0; i < n_sub; ++i) {
    const uint32_t rec = f.cmap_.offset + 4 + 8u * i;
    const uint16_t plat = r.u16(rec);
    const uint16_t enc = r.u16(rec + 2);
    const uint32_t off = f.cmap_.offset + r.u32(rec + 4);
    const uint16_t format = r.u16(off);
    int rank = -1;
    if (plat == 3 && enc == 10 && format == 12) rank = 3;
    else if (plat == 0 && format == 12) rank = 3;
    else if (plat == 3 && enc == 1 && format == 4) rank = 2;
    else if (plat == 0 && format == 4) rank = 1;
    if (rank > best_rank) {
      best_rank = rank;
      best = off;
    }
  }
  VQF_REQUIRE(best_rank >= 0, "unparseable font (no usable cmap subtable): " << f.path_);
  f.cmap_subtable_ = best;
  f.cmap_format_ = r.u16(best);
  return f;
}

uint16_t TrueTypeFont::glyph_index(char32_t cp) const {
  Reader r{data_, path_};
  if (cmap_format_ == 4) {
    if (cp > 0xFFFF) return 0;
    const uint32_t base = cmap_subtable_;
    const uint16_t seg_x2 = r.u16(base + 6);
    const uint32_t ends = base + 14;
    const uint32_t starts = ends + seg_x2 + 2;
    const uint32_t deltas = starts + seg_x2;
    const uint32_t range_offsets = deltas + seg_x2;
    const uint16_t c = static_cast<uint16_t>(cp);
    for (uint16_t i = 0; i < seg_x2 / 2; ++i) {
      const uint16_t end = r.u16(ends + 2u * i);
      if (c > end) continue;
      const uint16_t start = r.u16(starts + 2u * i);
      if (c < start) return 0;
      const int16_t delta = r.i16(deltas + 2u * i);
      const uint16_t ro = r.u16(range_offsets + 2u * i);
      if (ro == 0) return static_cast<uint16_t>((c + delta) & 0xFFFF);
      const uint32_t addr = range_offsets + 2u * i + ro + 2u * (c - start);
      const uint16_t gid = r.u16(addr);
      if (gid == 0) return 0;
      return static_cast<uint16_t>((gid + delta) & 0xFFFF);
    }
    return 0;
  }
  if (cmap_format_ == 12) {
    const uint32_t base = cmap_subtable_;
    const uint32_t n_groups = r.u32(base + 12);
    for (uint32_t i = 0; i < n_groups; ++i) {
      const uint32_t g = base + 16 + 12u * i;
      const uint32_t start = r.u32(g);
      const uint32_t end = r.u32(g + 4);
      if (cp < start) return 0;
      if (cp <= end) {
        return static_cast<uint16_t>(r.u32(g + 8) + (cp - start));
      }
    }
    return 0;
  }
  return 0;
}

uint32_t TrueTypeFont::glyph_offset(uint16_t gid, uint32_t* length) const {
  Reader r{data_, path_};
  VQF_REQUIRE(gid < num_glyphs_, "glyph id " << gid << " out of range in " << path_);
  uint32_t o0, o1;
  if (long_loca_) {
    o0 = r.u32(loca_.offset + 4u * gid);
    o1 = r.u32(loca_.offset + 4u * gid + 4);
  } else {
    o0 = 2u * r.u16(loca_.offset + 2u * gid);
    o1 = 2u * r.u16(loca_.offset + 2u * gid + 2);
  }
  *length = o1 - o0;
  return glyf_.offset + o0;
}

bool TrueTypeFont::has_outline(char32_t cp) const {
  const uint16_t gid = glyph_index(cp);
  if (gid == 0) return false;
  uint32_t len = 0;
  glyph_offset(gid, &len);
  return len > 0;
}

void TrueTypeFont::append_glyph(uint16_t gid, const double xform[6], int depth,
                                QuadPath& out) const {
  VQF_REQUIRE(depth < 6, "composite glyph nesting too deep in " << path_);
  Reader r{data_, path_};
  uint32_t len = 0;
  const uint32_t off = glyph_offset(gid, &len);
  if (len == 0) return;  // empty glyph

  const int16_t n_contours = r.i16(off);
  if (n_contours >= 0) {
    // Simple glyph.
    const uint16_t n = static_cast<uint16_t>(n_contours);
    std::vector<uint16_t> end_pts(n);
    uint32_t p = off + 10;
    for (uint16_t i = 0; i < n; ++i) {
      end_pts[i] = r.u16(p);
      p += 2;
    }
    const uint16_t total_pts = n == 0 ? 0 : end_pts[n - 1] + 1;
    const uint16_t instr_len = r.u16(p);
    p += 2u + instr_len;

    std::vector<uint8_t> flags;
    flags.reserve(total_pts);
    while (flags.size() < total_pts) {
      const uint8_t fl = r.u8(p++);
      flags.push_back(fl);
      if (fl & kRepeat) {
        uint8_t reps = r.u8(p++);
        while (reps-- && flags.size() < total_pts) flags.push_back(fl);
      }
    }

    std::vector<double> xs(total_pts), ys(total_pts);
    double x = 0;
    for (uint16_t i = 0; i < total_pts; ++i) {
      const uint8_t fl = flags[i];
      if (fl & kXShort) {
        const uint8_t dx = r.u8(p++);
        x += (fl & kXSame) ? dx : -static_cast<double>(dx);
      } else if (!(fl & kXSame)) {
        x += r.i16(p);
        p += 2;
      }
      xs[i] = x;
    }
    double y = 0;
    for (uint16_t i = 0; i < total_pts; ++i) {
      const uint8_t fl = flags[i];
      if (fl & kYShort) {
        const uint8_t dy = r.u8(p++);
        y += (fl & kYSame) ? dy : -static_cast<double>(dy);
      } else if (!(fl & kYSame)) {
        y += r.i16(p);
        p += 2;
      }
      ys[i] = y;
    }

    uint16_t first = 0;
    for (uint16_t ci = 0; ci < n; ++ci) {
      std::vector<ContourPoint> pts;
      for (uint16_t i = first; i <= end_pts[ci]; ++i) {
        pts.push_back({xs[i], ys[i], (flags[i] & kOnCurve) != 0});
      }
      first = end_pts[ci] + 1;
      std::vector<QuadPath::Seg> segs;
      emit_contour(pts, xform, segs);
      if (!segs.empty()) out.contours.push_back(std::move(segs));
    }
    return;
  }

  // Composite glyph.
  uint32_t p = off + 10;
  while (true) {
    const uint16_t flags = r.u16(p);
    const uint16_t child = r.u16(p + 2);
    p += 4;
    double dx = 0, dy = 0;
    if (flags & kArgsAreWords) {
      VQF_REQUIRE(flags & kArgsAreXY, "point-matching composite unsupported in " << path_);
      dx = r.i16(p);
      dy = r.i16(p + 2);
      p += 4;
    } else {
      VQF_REQUIRE(flags & kArgsAreXY, "point-matching composite unsupported in " << path_);
      dx = static_cast<int8_t>(r.u8(p));
      dy = static_cast<int8_t>(r.u8(p + 1));
      p += 2;
    }
    double a = 1, b = 0, c = 0, d = 1;
    if (flags & kWeHaveScale) {
      a = d = r.f2dot14(p);
      p += 2;
    } else if (flags & kXYScale) {
      a = r.f2dot14(p);
      d = r.f2dot14(p + 2);
      p += 4;
    } else if (flags & kTwoByTwo) {
      a = r.f2dot14(p);
      b = r.f2dot14(p + 2);
      c = r.f2dot14(p + 4);
      d = r.f2dot14(p + 6);
      p += 8;
    }
    // Child transform composed with the parent's.
    const double local[6] = {a, b, c, d, dx, dy};
    double composed[6];
    composed[0] = xform[0] * local[0] + xform[2] * local[1];
    composed[1] = xform[1] * local[0] + xform[3] * local[1];
    composed[2] = xform[0] * local[2] + xform[2] * local[3];
    composed[3] = xform[1] * local[2] + xform[3] * local[3];
    composed[4] = xform[0] * local[4] + xform[2] * local[5] + xform[4];
    composed[5] = xform[1] * local[4] + xform[3] * local[5] + xform[5];
    append_glyph(child, composed, depth + 1, out);
    if (!(flags & kMoreComponents)) break;
  }
}

QuadPath TrueTypeFont::outline(char32_t cp) const {
  const uint16_t gid = glyph_index(cp);
  VQF_REQUIRE(gid != 0, "codepoint U+" << std::hex << static_cast<uint32_t>(cp)
                                       << " has no glyph in " << path_);
  QuadPath path;
  const double identity[6] = {1, 0, 0, 1, 0, 0};
  append_glyph(gid, identity, 0, path);
  return path;
}

std::vector<std::vector<std::pair<double, double>>> flatten_path(const QuadPath& path,
                                                                 double tolerance_units) {
  std::vector<std::vector<std::pair<double, double>>> polys;
  for (const auto& contour : path.contours) {
    std::vector<std::pair<double, double>> poly;
    for (const auto& s : contour) {
      poly.emplace_back(s.x0, s.y0);
      if (!s.is_line) {
        // Max deviation of a quadratic from its chord is |p0 - 2c + p1| / 4.
        const double devx = s.x0 - 2 * s.cx + s.x1;
        const double devy = s.y0 - 2 * s.cy + s.y1;
        const double dev = 0.25 * std::sqrt(devx * devx + devy * devy);
        int n = static_cast<int>(std::ceil(std::sqrt(dev / std::max(tolerance_units, 1e-9))));
        n = std::clamp(n, 1, 64);
        for (int i = 1; i < n; ++i) {
          const double t = static_cast<double>(i) / n;
          const double u = 1.0 - t;
          poly.emplace_back(u * u * s.x0 + 2 * u * t * s.cx + t * t * s.x1,
                            u * u * s.y0 + 2 * u * t * s.cy + t * t * s.y1);
        }
      }
    }
    if (poly.size() >= 3) polys.push_back(std::move(poly));
  }
  return polys;
}

}  // namespace vqfont::font
