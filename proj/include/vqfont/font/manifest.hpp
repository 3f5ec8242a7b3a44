#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vqfont/font/glyph.hpp"

namespace vqfont::font {

// Evaluation split = a font set crossed with a char set. The three standard
// splits partition (font, char) space: SFSC = seen x seen, UFSC = unseen x
// seen, UFUC = unseen x unseen.
struct SplitDef {
  std::vector<std::string> fonts;  // sorted
  std::vector<char32_t> chars;     // sorted
};

struct DatasetManifest {
  struct Entry {
    std::string font_id;
    char32_t ch;
    std::string rel_path;
  };

  std::vector<Entry> entries;
  std::map<std::string, SplitDef> splits;
  std::string content_font_id;
  uint64_t seed = 0;
  int canvas = 0;
  std::filesystem::path root;  // directory holding the images; not serialized

  const SplitDef& split(const std::string& name) const;
  bool has(const std::string& font_id, char32_t ch) const;
  std::filesystem::path image_path(const std::string& font_id, char32_t ch) const;
  // Characters of `chars` that both `font_id` and the template font rendered.
  std::vector<char32_t> renderable_chars(const std::string& font_id,
                                         const std::vector<char32_t>& chars) const;

  void save(const std::filesystem::path& path) const;
  static DatasetManifest load(const std::filesystem::path& path);

  void validate() const;  // split disjointness + template availability

 private:
  mutable std::map<std::string, std::map<char32_t, const Entry*>> index_;
  void build_index() const;
};

// Scans `rendered_root` (one subdirectory per font of <hex>.png files) and
// assigns fonts/chars to seen/unseen sets with a seed-driven shuffle.
// The template font always lands in the seen set.
DatasetManifest build_manifest(const std::filesystem::path& rendered_root, int n_seen_fonts,
                               int n_seen_chars, uint64_t seed,
                               const std::string& content_font_id = "");

}  // namespace vqfont::font
