#include "vqfont/font/glyph.hpp"

#include <cstdio>

namespace vqfont::font {

std::string codepoint_hex(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04x", static_cast<uint32_t>(cp));
  return buf;
}

char32_t codepoint_from_hex(const std::string& s) {
  VQF_REQUIRE(!s.empty(), "empty codepoint string");
  char32_t cp = 0;
  for (char c : s) {
    cp <<= 4;
    if (c >= '0' && c <= '9') cp |= static_cast<char32_t>(c - '0');
    else if (c >= 'a' && c <= 'f') cp |= static_cast<char32_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') cp |= static_cast<char32_t>(c - 'A' + 10);
    else VQF_REQUIRE(false, "bad codepoint hex '" << s << "'");
  }
  return cp;
}

std::vector<char32_t> utf8_codepoints(const std::string& text) {
  std::vector<char32_t> out;
  auto add = [&](char32_t cp) {
    if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r') return;
    for (char32_t c : out) {
      if (c == cp) return;
    }
    out.push_back(cp);
  };
  size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    char32_t cp = 0;
    size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      VQF_REQUIRE(false, "invalid UTF-8 byte at offset " << i);
    }
    VQF_REQUIRE(i + len <= text.size(), "truncated UTF-8 sequence at offset " << i);
    for (size_t j = 1; j < len; ++j) {
      const auto b = static_cast<unsigned char>(text[i + j]);
      VQF_REQUIRE((b & 0xC0) == 0x80, "invalid UTF-8 continuation at offset " << i + j);
      cp = (cp << 6) | (b & 0x3F);
    }
    add(cp);
    i += len;
  }
  return out;
}

}  // namespace vqfont::font
