#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "vqfont/nn/modules.hpp"

namespace vqfont::nn {

// Versioned container: JSON metadata (config echo, step, kind) plus named
// raw double tensors. Writes are atomic (temp file then rename).
struct Checkpoint {
  std::string kind;             // "vq" | "gan"
  int64_t step = 0;
  std::string config_json;      // resolved run config echoed verbatim
  std::string model_json;       // architecture parameters needed to rebuild
  std::map<std::string, Tensor> tensors;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  void put_module(const std::string& prefix, const Module& m);
  // Copies stored values into the module's existing parameters; every
  // parameter must be present with a matching shape.
  void load_module(const std::string& prefix, Module& m) const;
  bool has_prefix(const std::string& prefix) const;
};

}  // namespace vqfont::nn
