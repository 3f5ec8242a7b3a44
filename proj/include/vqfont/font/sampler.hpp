#pragma once

#include <optional>

#include "vqfont/font/manifest.hpp"

namespace vqfont::font {

struct TrainingTriplet {
  GlyphImage content;                     // template font, target char
  std::vector<GlyphImage> references;     // one font, k distinct chars
  GlyphImage target;                      // same font as references, content's char
  std::optional<std::vector<GlyphImage>> aux_references;  // disjoint k-set, same font

  void validate() const;
};

// Caches decoded glyph images behind the manifest.
class GlyphStore {
 public:
  explicit GlyphStore(const DatasetManifest& manifest) : manifest_(manifest) {}
  const GlyphImage& get(const std::string& font_id, char32_t ch);

 private:
  const DatasetManifest& manifest_;
  std::map<std::pair<std::string, char32_t>, GlyphImage> cache_;
};

// Seeded triplet sampler over one split. Not thread-safe; create one per
// worker with derived seeds.
class TripletSampler {
 public:
  struct Ids {
    std::string font_id;
    char32_t target_char;
    std::vector<char32_t> ref_chars;
    std::vector<char32_t> aux_chars;  // empty unless with_aux
  };

  TripletSampler(const DatasetManifest& manifest, std::string split_name, int k, uint64_t seed,
                 bool with_aux);

  Ids sample_ids();
  TrainingTriplet materialize(const Ids& ids, GlyphStore& store) const;
  TrainingTriplet sample(GlyphStore& store);

  const std::vector<std::string>& fonts() const { return fonts_; }

 private:
  const DatasetManifest& manifest_;
  std::string split_name_;
  int k_;
  bool with_aux_;
  Rng rng_;
  std::vector<std::string> fonts_;  // fonts of the split with enough chars
  std::map<std::string, std::vector<char32_t>> usable_chars_;
};

}  // namespace vqfont::font
