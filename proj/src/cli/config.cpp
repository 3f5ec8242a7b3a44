#include "vqfont/cli/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace vqfont::cli {

namespace {

// One table drives serialization, parsing, and unknown-key rejection.
template <class F>
void for_each_field(RunConfig& c, F&& f) {
  f("seed", c.seed);
  f("canvas", c.canvas);
  f("codebook_size", c.codebook_size);
  f("dim", c.dim);
  f("downsamples", c.downsamples);
  f("res_blocks", c.res_blocks);
  f("heads", c.heads);
  f("attn_layers", c.attn_layers);
  f("gsa_temperature", c.gsa_temperature);
  f("alpha", c.alpha);
  f("beta", c.beta);
  f("lambda_img", c.lambda_img);
  f("lambda_feat", c.lambda_feat);
  f("lambda_cst", c.lambda_cst);
  f("tau", c.tau);
  f("k", c.k);
  f("vq_steps", c.vq_steps);
  f("vq_batch", c.vq_batch);
  f("vq_lr", c.vq_lr);
  f("vq_glyph_limit", c.vq_glyph_limit);
  f("reseed_dead_codes", c.reseed_dead_codes);
  f("train_iterations", c.train_iterations);
  f("train_batch", c.train_batch);
  f("lr_g", c.lr_g);
  f("lr_d", c.lr_d);
  f("adam_beta1", c.adam_beta1);
  f("adam_beta2", c.adam_beta2);
  f("d_base_channels", c.d_base_channels);
  f("d_blocks", c.d_blocks);
  f("checkpoint_every", c.checkpoint_every);
  f("use_lsa", c.use_lsa);
  f("use_gsa", c.use_gsa);
  f("margin", c.margin);
  f("n_seen_fonts", c.n_seen_fonts);
  f("n_seen_chars", c.n_seen_chars);
  f("eval_split", c.eval_split);
  f("ref_mode", c.ref_mode);
  f("ref_seed", c.ref_seed);
}

}  // namespace

void RunConfig::validate() const {
  VQF_REQUIRE(canvas > 0 && canvas % (1 << downsamples) == 0,
              "canvas " << canvas << " must be divisible by 2^downsamples = "
                        << (1 << downsamples));
  VQF_REQUIRE(codebook_size >= 2, "codebook_size must be >= 2, got " << codebook_size);
  VQF_REQUIRE(dim > 0, "dim must be positive");
  VQF_REQUIRE(heads >= 1 && dim % heads == 0,
              "heads (" << heads << ") must divide dim (" << dim << ")");
  VQF_REQUIRE(attn_layers >= 1, "attn_layers must be >= 1");
  VQF_REQUIRE(k >= 1, "k must be >= 1");
  VQF_REQUIRE(tau > 0.0, "tau must be positive");
  VQF_REQUIRE(alpha >= 0.0 && beta >= 0.0, "alpha/beta must be non-negative");
  VQF_REQUIRE(margin >= 0.0 && margin < 0.5, "margin must be in [0, 0.5)");
  VQF_REQUIRE(use_lsa || use_gsa, "at least one of use_lsa/use_gsa must stay enabled");
  VQF_REQUIRE(canvas % (1 << d_blocks) == 0,
              "canvas " << canvas << " must be divisible by 2^d_blocks = " << (1 << d_blocks));
  VQF_REQUIRE(eval_split == "SFSC" || eval_split == "UFSC" || eval_split == "UFUC",
              "eval_split must be SFSC|UFSC|UFUC, got '" << eval_split << "'");
  VQF_REQUIRE(ref_mode == "fixed" || ref_mode == "random",
              "ref_mode must be fixed|random, got '" << ref_mode << "'");
}

std::string RunConfig::to_json() const {
  nlohmann::ordered_json j;
  for_each_field(const_cast<RunConfig&>(*this),
                 [&j](const char* name, auto& value) { j[name] = value; });
  return j.dump(1);
}

void RunConfig::apply_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  VQF_REQUIRE(j.is_object(), "config must be a JSON object");
  std::set<std::string> known;
  for_each_field(*this, [&](const char* name, auto& value) {
    known.insert(name);
    auto it = j.find(name);
    if (it == j.end()) return;
    using T = std::decay_t<decltype(value)>;
    try {
      value = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      VQF_REQUIRE(false, "config key '" << name << "' has an invalid value: " << it->dump());
    }
  });
  for (const auto& [key, unused] : j.items()) {
    VQF_REQUIRE(known.count(key), "unknown config key '" << key << "'");
  }
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  VQF_REQUIRE(in.good(), "cannot open config file: " << path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto first = text.find_first_not_of(" \t\r\n");
  RunConfig c;
  if (first != std::string::npos) {
    c.apply_json(text);
  }
  return c;
}

}  // namespace vqfont::cli
