#include "testutil.hpp"

#include <algorithm>
#include <cstdlib>

#include "vqfont/font/truetype.hpp"

namespace vqfont::testutil {

std::vector<std::filesystem::path> find_system_fonts(size_t max_count) {
  namespace fs = std::filesystem;
  std::vector<fs::path> roots;
  if (const char* env = std::getenv("VQFONT_TEST_FONT_DIR")) roots.emplace_back(env);
  roots.emplace_back("/usr/share/fonts");
  roots.emplace_back("/usr/local/share/fonts");
  roots.emplace_back("/usr/local/lib/python3.10/dist-packages/matplotlib/mpl-data/fonts/ttf");

  std::vector<fs::path> found;
  for (const auto& root : roots) {
    std::error_code ec;
    if (!fs::exists(root, ec)) continue;
    for (auto it = fs::recursive_directory_iterator(root, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (ec) break;
      if (it->is_regular_file(ec) && it->path().extension() == ".ttf") {
        found.push_back(it->path());
      }
    }
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());

  // Keep only fonts covering basic Latin letters and digits; symbol-only
  // fonts (math glyph sets etc.) are useless as a glyph corpus.
  std::vector<fs::path> usable;
  for (const auto& path : found) {
    if (usable.size() >= max_count) break;
    try {
      const auto font = font::TrueTypeFont::load(path);
      bool ok = true;
      for (char32_t cp : {U'A', U'Z', U'a', U'z', U'0', U'9'}) {
        if (!font.has_outline(cp)) {
          ok = false;
          break;
        }
      }
      if (ok) usable.push_back(path);
    } catch (const Error&) {
      // Unparseable (e.g. CFF-flavoured) fonts are skipped.
    }
  }
  return usable;
}

}  // namespace vqfont::testutil
