#include "vqfont/nn/serialize.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace vqfont::nn {

namespace {
constexpr char kMagic[8] = {'V', 'Q', 'F', 'C', 'K', 'P', 'T', '1'};
}

void Checkpoint::save(const std::filesystem::path& path) const {
  nlohmann::json index = nlohmann::json::array();
  for (const auto& [name, t] : tensors) {
    index.push_back({{"name", name}, {"shape", t.shape()}});
  }
  nlohmann::json header = {{"kind", kind},
                           {"step", step},
                           {"config", config_json},
                           {"model", model_json},
                           {"tensors", index}};
  const std::string hdr = header.dump();

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    VQF_REQUIRE(out.good(), "cannot open checkpoint for writing: " << tmp);
    out.write(kMagic, sizeof(kMagic));
    const uint64_t hlen = hdr.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    for (const auto& [name, t] : tensors) {
      out.write(reinterpret_cast<const char*>(t.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    VQF_REQUIRE(out.good(), "short write to checkpoint: " << tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  VQF_REQUIRE(in.good(), "cannot open checkpoint: " << path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  VQF_REQUIRE(in.good() && std::equal(magic, magic + 8, kMagic),
              "not a vqfont checkpoint: " << path.string());
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hdr(hlen, '\0');
  in.read(hdr.data(), static_cast<std::streamsize>(hlen));
  VQF_REQUIRE(in.good(), "truncated checkpoint header: " << path.string());
  const nlohmann::json header = nlohmann::json::parse(hdr);

  Checkpoint ck;
  ck.kind = header.at("kind").get<std::string>();
  ck.step = header.at("step").get<int64_t>();
  ck.config_json = header.at("config").get<std::string>();
  ck.model_json = header.value("model", std::string{});
  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<int64_t>>();
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(double)));
    VQF_REQUIRE(in.good(), "truncated tensor '" << name << "' in " << path.string());
    ck.tensors.emplace(name, std::move(t));
  }
  return ck;
}

void Checkpoint::put_module(const std::string& prefix, const Module& m) {
  for (const auto& [name, p] : m.named_parameters()) {
    tensors[prefix + "." + name] = p->value.clone();
  }
}

void Checkpoint::load_module(const std::string& prefix, Module& m) const {
  for (const auto& [name, p] : m.named_parameters()) {
    const std::string key = prefix + "." + name;
    auto it = tensors.find(key);
    VQF_REQUIRE(it != tensors.end(), "checkpoint missing tensor '" << key << "'");
    VQF_REQUIRE(it->second.same_shape(p->value),
                "checkpoint tensor '" << key << "' shape " << it->second.shape_str()
                                      << " != expected " << p->value.shape_str());
    std::copy(it->second.data(), it->second.data() + it->second.numel(), p->value.data());
  }
}

bool Checkpoint::has_prefix(const std::string& prefix) const {
  const std::string key = prefix + ".";
  auto it = tensors.lower_bound(key);
  return it != tensors.end() && it->first.compare(0, key.size(), key) == 0;
}

}  // namespace vqfont::nn
