#include <doctest.h>

#include <filesystem>
#include <set>

#include "testutil.hpp"
#include "vqfont/font/image_io.hpp"
#include "vqfont/font/manifest.hpp"
#include "vqfont/font/render.hpp"
#include "vqfont/font/sampler.hpp"

using namespace vqfont;
using namespace vqfont::font;
namespace fs = std::filesystem;

namespace {

std::vector<char32_t> ascii_chars(const std::string& s) {
  return {s.begin(), s.end()};
}

// Renders a small corpus into a temp dir and builds a manifest over it.
struct CorpusFixture {
  fs::path root;
  DatasetManifest manifest;

  CorpusFixture(int n_fonts, const std::string& chars, int canvas, int n_seen_fonts,
                int n_seen_chars, uint64_t seed = 42) {
    const auto fonts = testutil::find_system_fonts();
    REQUIRE(static_cast<int>(fonts.size()) >= n_fonts);
    root = fs::temp_directory_path() /
           ("vqfont_corpus_" + std::to_string(n_fonts) + "_" + std::to_string(canvas));
    fs::remove_all(root);
    fs::create_directories(root);
    for (int i = 0; i < n_fonts; ++i) {
      auto res = render_font(fonts[static_cast<size_t>(i)], ascii_chars(chars), canvas);
      REQUIRE(!res.images.empty());
      const fs::path dir = root / res.images.front().font_id;
      fs::create_directories(dir);
      for (const auto& img : res.images) {
        save_glyph_png(dir / (codepoint_hex(img.ch) + ".png"), img);
      }
    }
    manifest = build_manifest(root, n_seen_fonts, n_seen_chars, seed);
    manifest.save(root / "manifest.json");
  }
  ~CorpusFixture() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
};

}  // namespace

TEST_CASE("system fonts load and report glyph coverage") {
  const auto fonts = testutil::find_system_fonts();
  REQUIRE(!fonts.empty());
  for (const auto& path : fonts) {
    const auto font = TrueTypeFont::load(path);
    CHECK(font.units_per_em() > 0);
    CHECK(font.has_outline(U'A'));
  }
}

TEST_CASE("rendered glyph has ink, white background, and exact determinism") {
  const auto fonts = testutil::find_system_fonts();
  REQUIRE(!fonts.empty());
  const auto font = TrueTypeFont::load(fonts[0]);

  const GlyphImage a1 = render_glyph(font, U'A', 128);
  a1.validate();
  CHECK(a1.canvas == 128);
  CHECK(a1.min_pixel() < 0.0);       // ink present
  CHECK(a1.max_pixel() == 1.0);      // background untouched
  const GlyphImage a2 = render_glyph(font, U'A', 128);
  CHECK(a1.pixels == a2.pixels);     // bit-identical

  // Margin contract: an 8% border strip stays blank.
  const int m = static_cast<int>(128 * 0.08) - 1;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < 128; ++c) {
      CHECK(a1.at(r, c) == 1.0);
    }
  }
}

TEST_CASE("missing glyph is skipped with a report") {
  const auto fonts = testutil::find_system_fonts();
  REQUIRE(!fonts.empty());
  // U+4E00 is absent from the latin test fonts on this machine; fall back to
  // an unassigned plane-1 codepoint if a font surprisingly covers it.
  const auto font = TrueTypeFont::load(fonts[0]);
  char32_t missing = U'一';
  if (font.has_outline(missing)) missing = static_cast<char32_t>(0x3FFFF);
  REQUIRE(!font.has_outline(missing));

  auto res = render_font(fonts[0], {U'A', missing, U'B'}, 64);
  CHECK(res.images.size() == 2);
  REQUIRE(res.skipped.size() == 1);
  CHECK(res.skipped[0] == missing);
}

TEST_CASE("png round trip is lossless for rendered glyphs") {
  const auto fonts = testutil::find_system_fonts();
  REQUIRE(!fonts.empty());
  const auto font = TrueTypeFont::load(fonts[0]);
  const GlyphImage img = render_glyph(font, U'g', 96);

  const fs::path p = fs::temp_directory_path() / "vqfont_roundtrip.png";
  save_glyph_png(p, img);
  const GlyphImage back = load_glyph_png(p, img.font_id, img.ch);
  CHECK(back.canvas == img.canvas);
  CHECK(back.pixels == img.pixels);
  fs::remove(p);
}

TEST_CASE("manifest splits are disjoint and seed-deterministic") {
  CorpusFixture fx(4, "ABCDEFGHIJKLmnopqr0123", 32, 2, 12);
  const auto& m = fx.manifest;

  const auto& sfsc = m.split("SFSC");
  const auto& ufsc = m.split("UFSC");
  const auto& ufuc = m.split("UFUC");
  CHECK(sfsc.fonts.size() == 2);
  CHECK(ufsc.fonts.size() == 2);
  CHECK(sfsc.chars.size() == 12);
  CHECK(ufuc.chars.size() == 10);

  // (font, char) pair disjointness via set intersection.
  std::set<std::pair<std::string, char32_t>> seen_pairs, ufsc_pairs, ufuc_pairs;
  for (const auto& f : sfsc.fonts)
    for (char32_t c : sfsc.chars) seen_pairs.insert({f, c});
  for (const auto& f : ufsc.fonts)
    for (char32_t c : ufsc.chars) ufsc_pairs.insert({f, c});
  for (const auto& f : ufuc.fonts)
    for (char32_t c : ufuc.chars) ufuc_pairs.insert({f, c});
  for (const auto& p : ufsc_pairs) CHECK(seen_pairs.count(p) == 0);
  for (const auto& p : ufuc_pairs) {
    CHECK(seen_pairs.count(p) == 0);
    CHECK(ufsc_pairs.count(p) == 0);
  }
  // UFUC chars never appear in the training char set.
  for (char32_t c : ufuc.chars) {
    CHECK(std::find(sfsc.chars.begin(), sfsc.chars.end(), c) == sfsc.chars.end());
  }

  // Template font is seen and renders every split's chars.
  CHECK(std::find(sfsc.fonts.begin(), sfsc.fonts.end(), m.content_font_id) != sfsc.fonts.end());

  // Same seed reproduces the same split; another seed moves it.
  auto m2 = build_manifest(fx.root, 2, 12, 42);
  CHECK(m2.split("SFSC").fonts == sfsc.fonts);
  CHECK(m2.split("SFSC").chars == sfsc.chars);

  // Round trip through JSON.
  auto loaded = DatasetManifest::load(fx.root / "manifest.json");
  CHECK(loaded.split("SFSC").fonts == sfsc.fonts);
  CHECK(loaded.content_font_id == m.content_font_id);
}

TEST_CASE("degenerate splits fail with the shortfall named") {
  CorpusFixture fx(3, "ABCDEF", 32, 2, 3);
  CHECK_THROWS_WITH_AS(build_manifest(fx.root, 3, 3, 1), doctest::Contains("fonts"), Error);
  CHECK_THROWS_WITH_AS(build_manifest(fx.root, 2, 6, 1), doctest::Contains("chars"), Error);
}

TEST_CASE("triplet sampler respects invariants and determinism") {
  CorpusFixture fx(4, "ABCDEFGHIJKLMNOPQRSTuvwxyz", 32, 3, 20);
  GlyphStore store(fx.manifest);

  TripletSampler sampler(fx.manifest, "SFSC", 3, 7, /*with_aux=*/true);
  for (int i = 0; i < 20; ++i) {
    auto t = sampler.sample(store);  // validate() runs inside
    CHECK(t.references.size() == 3);
    CHECK(t.aux_references->size() == 3);
    CHECK(t.content.font_id == fx.manifest.content_font_id);
  }

  // k=1 without aux.
  TripletSampler s1(fx.manifest, "SFSC", 1, 7, false);
  auto t1 = s1.sample(store);
  CHECK(t1.references.size() == 1);
  CHECK(!t1.aux_references.has_value());

  // Same seed, same id sequence.
  TripletSampler a(fx.manifest, "SFSC", 3, 99, true);
  TripletSampler b(fx.manifest, "SFSC", 3, 99, true);
  for (int i = 0; i < 10; ++i) {
    auto ia = a.sample_ids();
    auto ib = b.sample_ids();
    CHECK(ia.font_id == ib.font_id);
    CHECK(ia.target_char == ib.target_char);
    CHECK(ia.ref_chars == ib.ref_chars);
    CHECK(ia.aux_chars == ib.aux_chars);
  }
}

TEST_CASE("sampler rejects fonts without enough characters") {
  CorpusFixture fx(3, "ABCDE", 32, 2, 4);
  // with_aux needs 2k+1 = 7 usable chars but the split has only 4.
  CHECK_THROWS_AS(TripletSampler(fx.manifest, "SFSC", 3, 1, true), Error);
}
