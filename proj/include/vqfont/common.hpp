#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace vqfont {

// Contract check. Throws with file:line context so shape/range violations
// surface the expected/actual values named in the message.
#define VQF_REQUIRE(cond, msg)                                        \
  do {                                                                \
    if (!(cond)) {                                                    \
      std::ostringstream oss_;                                        \
      oss_ << msg;                                                    \
      throw ::vqfont::Error(oss_.str(), __FILE__, __LINE__);          \
    }                                                                 \
  } while (0)

class Error : public std::runtime_error {
 public:
  Error(const std::string& msg, const char* file, int line)
      : std::runtime_error(format(msg, file, line)) {}
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}

 private:
  static std::string format(const std::string& msg, const char* file, int line) {
    std::ostringstream oss;
    oss << msg << " (" << file << ":" << line << ")";
    return oss.str();
  }
};

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), seed);
}

// Derives an independent stream seed from a base seed and a label, so each
// component (weight init, sampler, eval refs) gets its own deterministic rng.
inline uint64_t derive_seed(uint64_t base, const std::string& label) {
  return fnv1a64(label, base ^ 0x9e3779b97f4a7c15ull);
}

using Rng = std::mt19937_64;

}  // namespace vqfont
