#include "vqfont/font/manifest.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vqfont/font/image_io.hpp"

namespace vqfont::font {

const SplitDef& DatasetManifest::split(const std::string& name) const {
  auto it = splits.find(name);
  VQF_REQUIRE(it != splits.end(), "manifest has no split '" << name << "'");
  return it->second;
}

void DatasetManifest::build_index() const {
  if (!index_.empty() || entries.empty()) return;
  for (const auto& e : entries) index_[e.font_id][e.ch] = &e;
}

bool DatasetManifest::has(const std::string& font_id, char32_t ch) const {
  build_index();
  auto f = index_.find(font_id);
  return f != index_.end() && f->second.count(ch) > 0;
}

std::filesystem::path DatasetManifest::image_path(const std::string& font_id, char32_t ch) const {
  build_index();
  auto f = index_.find(font_id);
  VQF_REQUIRE(f != index_.end(), "manifest has no font '" << font_id << "'");
  auto c = f->second.find(ch);
  VQF_REQUIRE(c != f->second.end(),
              "manifest has no image for " << font_id << " U+" << codepoint_hex(ch));
  return root / c->second->rel_path;
}

std::vector<char32_t> DatasetManifest::renderable_chars(
    const std::string& font_id, const std::vector<char32_t>& chars) const {
  std::vector<char32_t> out;
  for (char32_t c : chars) {
    if (has(font_id, c) && has(content_font_id, c)) out.push_back(c);
  }
  return out;
}

void DatasetManifest::validate() const {
  const auto sfsc = splits.find("SFSC");
  const auto ufsc = splits.find("UFSC");
  const auto ufuc = splits.find("UFUC");
  VQF_REQUIRE(sfsc != splits.end() && ufsc != splits.end() && ufuc != splits.end(),
              "manifest must define SFSC, UFSC and UFUC splits");

  auto disjoint = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    for (const auto& x : a) {
      if (std::find(b.begin(), b.end(), x) != b.end()) return false;
    }
    return true;
  };
  auto disjoint_chars = [](const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
    for (char32_t x : a) {
      if (std::find(b.begin(), b.end(), x) != b.end()) return false;
    }
    return true;
  };
  // Seen fonts never appear in the unseen splits; unseen chars never appear
  // in the seen-char splits. Pairwise (font,char) disjointness follows.
  VQF_REQUIRE(disjoint(sfsc->second.fonts, ufsc->second.fonts),
              "SFSC and UFSC font sets overlap");
  VQF_REQUIRE(disjoint(sfsc->second.fonts, ufuc->second.fonts),
              "SFSC and UFUC font sets overlap");
  VQF_REQUIRE(disjoint_chars(sfsc->second.chars, ufuc->second.chars),
              "seen and unseen char sets overlap");
  VQF_REQUIRE(disjoint_chars(ufsc->second.chars, ufuc->second.chars),
              "UFSC and UFUC char sets overlap");

  VQF_REQUIRE(!content_font_id.empty(), "manifest missing content_font_id");
  for (const auto& [name, def] : splits) {
    int usable = 0;
    for (char32_t c : def.chars) {
      if (has(content_font_id, c)) ++usable;
    }
    VQF_REQUIRE(usable > 0, "template font '" << content_font_id
                                              << "' renders no character of split " << name);
  }
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["canvas"] = canvas;
  j["seed"] = seed;
  j["content_font_id"] = content_font_id;
  nlohmann::json ents = nlohmann::json::array();
  for (const auto& e : entries) {
    ents.push_back({e.font_id, codepoint_hex(e.ch), e.rel_path});
  }
  j["entries"] = std::move(ents);
  nlohmann::json sp;
  for (const auto& [name, def] : splits) {
    nlohmann::json chars = nlohmann::json::array();
    for (char32_t c : def.chars) chars.push_back(codepoint_hex(c));
    sp[name] = {{"fonts", def.fonts}, {"chars", std::move(chars)}};
  }
  j["splits"] = std::move(sp);

  std::ofstream out(path);
  VQF_REQUIRE(out.good(), "cannot write manifest: " << path.string());
  out << j.dump(1) << "\n";
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  VQF_REQUIRE(in.good(), "cannot open manifest: " << path.string());
  nlohmann::json j;
  in >> j;

  DatasetManifest m;
  m.root = path.parent_path();
  m.canvas = j.at("canvas").get<int>();
  m.seed = j.at("seed").get<uint64_t>();
  m.content_font_id = j.at("content_font_id").get<std::string>();
  for (const auto& e : j.at("entries")) {
    m.entries.push_back(
        {e.at(0).get<std::string>(), codepoint_from_hex(e.at(1).get<std::string>()),
         e.at(2).get<std::string>()});
  }
  for (const auto& [name, def] : j.at("splits").items()) {
    SplitDef sd;
    sd.fonts = def.at("fonts").get<std::vector<std::string>>();
    for (const auto& c : def.at("chars")) sd.chars.push_back(codepoint_from_hex(c.get<std::string>()));
    m.splits[name] = std::move(sd);
  }
  m.validate();
  return m;
}

DatasetManifest build_manifest(const std::filesystem::path& rendered_root, int n_seen_fonts,
                               int n_seen_chars, uint64_t seed,
                               const std::string& content_font_id) {
  namespace fs = std::filesystem;
  VQF_REQUIRE(fs::is_directory(rendered_root),
              "rendered root is not a directory: " << rendered_root.string());

  DatasetManifest m;
  m.root = rendered_root;
  m.seed = seed;
  m.canvas = 0;

  std::vector<std::string> fonts;
  std::set<char32_t> char_union;
  for (const auto& dir : fs::directory_iterator(rendered_root)) {
    if (!dir.is_directory()) continue;
    const std::string font_id = dir.path().filename().string();
    bool any = false;
    for (const auto& file : fs::directory_iterator(dir.path())) {
      if (file.path().extension() != ".png") continue;
      const char32_t cp = codepoint_from_hex(file.path().stem().string());
      m.entries.push_back({font_id, cp, font_id + "/" + file.path().filename().string()});
      char_union.insert(cp);
      any = true;
    }
    if (any) fonts.push_back(font_id);
  }
  std::sort(fonts.begin(), fonts.end());
  std::sort(m.entries.begin(), m.entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.font_id, a.ch) < std::tie(b.font_id, b.ch);
  });
  std::vector<char32_t> chars(char_union.begin(), char_union.end());
  VQF_REQUIRE(!m.entries.empty(), "no rendered glyphs under " << rendered_root.string());
  {
    int w = 0, h = 0;
    read_gray_png(rendered_root / m.entries.front().rel_path, &w, &h);
    VQF_REQUIRE(w == h, "rendered glyphs must be square, found " << w << "x" << h);
    m.canvas = w;
  }

  const int nf = static_cast<int>(fonts.size());
  const int nc = static_cast<int>(chars.size());
  VQF_REQUIRE(n_seen_fonts >= 1 && n_seen_fonts < nf,
              "cannot split " << nf << " fonts into " << n_seen_fonts << " seen + "
                              << (nf - n_seen_fonts) << " unseen; need at least 1 of each");
  VQF_REQUIRE(n_seen_chars >= 1 && n_seen_chars < nc,
              "cannot split " << nc << " chars into " << n_seen_chars << " seen + "
                              << (nc - n_seen_chars) << " unseen; need at least 1 of each");

  Rng font_rng(derive_seed(seed, "font-split"));
  Rng char_rng(derive_seed(seed, "char-split"));
  std::shuffle(fonts.begin(), fonts.end(), font_rng);
  std::shuffle(chars.begin(), chars.end(), char_rng);

  // The template font stays in the seen set.
  if (!content_font_id.empty()) {
    auto it = std::find(fonts.begin(), fonts.end(), content_font_id);
    VQF_REQUIRE(it != fonts.end(), "content font '" << content_font_id << "' not rendered under "
                                                    << rendered_root.string());
    std::iter_swap(fonts.begin(), it);
  }
  m.content_font_id = fonts.front();

  std::vector<std::string> seen_fonts(fonts.begin(), fonts.begin() + n_seen_fonts);
  std::vector<std::string> unseen_fonts(fonts.begin() + n_seen_fonts, fonts.end());
  std::vector<char32_t> seen_chars(chars.begin(), chars.begin() + n_seen_chars);
  std::vector<char32_t> unseen_chars(chars.begin() + n_seen_chars, chars.end());
  std::sort(seen_fonts.begin(), seen_fonts.end());
  std::sort(unseen_fonts.begin(), unseen_fonts.end());
  std::sort(seen_chars.begin(), seen_chars.end());
  std::sort(unseen_chars.begin(), unseen_chars.end());

  m.splits["SFSC"] = {seen_fonts, seen_chars};
  m.splits["UFSC"] = {unseen_fonts, seen_chars};
  m.splits["UFUC"] = {unseen_fonts, unseen_chars};
  m.validate();
  return m;
}

}  // namespace vqfont::font
