#include "vqfont/font/sampler.hpp"

#include <algorithm>

#include "vqfont/font/image_io.hpp"

namespace vqfont::font {

void TrainingTriplet::validate() const {
  VQF_REQUIRE(!references.empty(), "triplet has no references");
  const std::string& font = references.front().font_id;
  std::set<char32_t> ref_chars;
  for (const auto& r : references) {
    VQF_REQUIRE(r.font_id == font, "references span multiple fonts");
    VQF_REQUIRE(ref_chars.insert(r.ch).second, "duplicate reference char");
  }
  VQF_REQUIRE(target.font_id == font, "target font differs from references");
  VQF_REQUIRE(target.ch == content.ch, "target char differs from content char");
  VQF_REQUIRE(ref_chars.count(target.ch) == 0, "target char appears among references");
  if (aux_references) {
    VQF_REQUIRE(aux_references->size() == references.size(), "aux reference count mismatch");
    for (const auto& a : *aux_references) {
      VQF_REQUIRE(a.font_id == font, "aux references span multiple fonts");
      VQF_REQUIRE(ref_chars.count(a.ch) == 0, "aux references overlap references");
    }
  }
}

const GlyphImage& GlyphStore::get(const std::string& font_id, char32_t ch) {
  const auto key = std::make_pair(font_id, ch);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  GlyphImage img = load_glyph_png(manifest_.image_path(font_id, ch), font_id, ch);
  img.validate();
  return cache_.emplace(key, std::move(img)).first->second;
}

TripletSampler::TripletSampler(const DatasetManifest& manifest, std::string split_name, int k,
                               uint64_t seed, bool with_aux)
    : manifest_(manifest),
      split_name_(std::move(split_name)),
      k_(k),
      with_aux_(with_aux),
      rng_(seed) {
  VQF_REQUIRE(k_ >= 1, "k must be >= 1, got " << k_);
  const SplitDef& def = manifest_.split(split_name_);
  VQF_REQUIRE(!def.fonts.empty() && !def.chars.empty(), "split '" << split_name_ << "' is empty");

  const size_t need = static_cast<size_t>(with_aux_ ? 2 * k_ + 1 : k_ + 1);
  for (const auto& font : def.fonts) {
    auto chars = manifest_.renderable_chars(font, def.chars);
    if (chars.size() >= need) {
      usable_chars_[font] = std::move(chars);
      fonts_.push_back(font);
    }
  }
  VQF_REQUIRE(!fonts_.empty(), "no font in split '" << split_name_ << "' has the "
                               << need << " renderable chars required for k=" << k_
                               << (with_aux_ ? " with aux references" : ""));
}

TripletSampler::Ids TripletSampler::sample_ids() {
  std::uniform_int_distribution<size_t> font_pick(0, fonts_.size() - 1);
  Ids ids;
  ids.font_id = fonts_[font_pick(rng_)];
  const auto& chars = usable_chars_.at(ids.font_id);

  // Draw target + k refs (+ k aux) as a partial shuffle without replacement.
  std::vector<char32_t> pool = chars;
  const size_t need = static_cast<size_t>(with_aux_ ? 2 * k_ + 1 : k_ + 1);
  for (size_t i = 0; i < need; ++i) {
    std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng_)]);
  }
  ids.target_char = pool[0];
  ids.ref_chars.assign(pool.begin() + 1, pool.begin() + 1 + k_);
  if (with_aux_) {
    ids.aux_chars.assign(pool.begin() + 1 + k_, pool.begin() + 1 + 2 * k_);
  }
  return ids;
}

TrainingTriplet TripletSampler::materialize(const Ids& ids, GlyphStore& store) const {
  TrainingTriplet t;
  t.content = store.get(manifest_.content_font_id, ids.target_char);
  t.target = store.get(ids.font_id, ids.target_char);
  for (char32_t c : ids.ref_chars) t.references.push_back(store.get(ids.font_id, c));
  if (!ids.aux_chars.empty()) {
    t.aux_references.emplace();
    for (char32_t c : ids.aux_chars) t.aux_references->push_back(store.get(ids.font_id, c));
  }
  t.validate();
  return t;
}

TrainingTriplet TripletSampler::sample(GlyphStore& store) {
  return materialize(sample_ids(), store);
}

}  // namespace vqfont::font
