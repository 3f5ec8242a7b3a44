#include "vqfont/gan/discriminator.hpp"

#include <nlohmann/json.hpp>

namespace vqfont::gan {

using nn::Var;

namespace {
constexpr double kSlope = 0.2;

std::vector<int64_t> block_channels(const DiscriminatorConfig& cfg) {
  std::vector<int64_t> ch;
  for (int i = 0; i < cfg.blocks; ++i) {
    ch.push_back(cfg.base_channels * std::min<int64_t>(4, int64_t{1} << i));
  }
  return ch;
}
}  // namespace

std::string DiscriminatorConfig::to_json() const {
  nlohmann::json j = {{"canvas", canvas},
                      {"base_channels", base_channels},
                      {"blocks", blocks},
                      {"num_fonts", num_fonts},
                      {"num_chars", num_chars}};
  return j.dump();
}

DiscriminatorConfig DiscriminatorConfig::from_json(const std::string& s) {
  const auto j = nlohmann::json::parse(s);
  DiscriminatorConfig c;
  c.canvas = j.at("canvas").get<int>();
  c.base_channels = j.at("base_channels").get<int64_t>();
  c.blocks = j.at("blocks").get<int>();
  c.num_fonts = j.at("num_fonts").get<int64_t>();
  c.num_chars = j.at("num_chars").get<int64_t>();
  return c;
}

ResBlockDown::ResBlockDown(Rng& rng, int64_t in_ch, int64_t out_ch)
    : main1_(rng, in_ch, out_ch, 3, 1, 1),
      main2_(rng, out_ch, out_ch, 4, 2, 1),
      skip_(rng, in_ch, out_ch, 1, 1, 0) {
  add_child("main1", &main1_);
  add_child("main2", &main2_);
  add_child("skip", &skip_);
}

Var ResBlockDown::operator()(Var x) const {
  Var main = main2_(nn::leaky_relu(main1_(x), kSlope));
  Var skip = skip_(nn::avg_pool2d(x));
  return nn::leaky_relu(nn::add(std::move(main), std::move(skip)), kSlope);
}

Discriminator::Discriminator(Rng& rng, DiscriminatorConfig cfg)
    : cfg_(cfg),
      head_(rng, block_channels(cfg).back(), 1),
      font_emb_(rng, cfg.num_fonts, block_channels(cfg).back()),
      char_emb_(rng, cfg.num_chars, block_channels(cfg).back()) {
  VQF_REQUIRE(cfg.blocks >= 1, "discriminator needs at least one block");
  VQF_REQUIRE(cfg.canvas % (1 << cfg.blocks) == 0,
              "canvas " << cfg.canvas << " not divisible by 2^" << cfg.blocks);
  const auto ch = block_channels(cfg);
  int64_t prev = 1;
  for (int i = 0; i < cfg.blocks; ++i) {
    blocks_.push_back(std::make_unique<ResBlockDown>(rng, prev, ch[static_cast<size_t>(i)]));
    add_child("block" + std::to_string(i), blocks_.back().get());
    prev = ch[static_cast<size_t>(i)];
  }
  add_child("head", &head_);
  add_child("font_emb", &font_emb_);
  add_child("char_emb", &char_emb_);
}

DiscriminatorOutput Discriminator::operator()(Var images,
                                              const std::vector<int32_t>& font_labels,
                                              const std::vector<int32_t>& char_labels) const {
  const int64_t B = images->value.dim(0);
  VQF_REQUIRE(static_cast<int64_t>(font_labels.size()) == B &&
                  static_cast<int64_t>(char_labels.size()) == B,
              "label count mismatch: batch " << B << ", fonts " << font_labels.size()
                                             << ", chars " << char_labels.size());
  for (int32_t s : font_labels) {
    VQF_REQUIRE(s >= 0 && s < cfg_.num_fonts,
                "style label " << s << " outside [0," << cfg_.num_fonts << ")");
  }
  for (int32_t c : char_labels) {
    VQF_REQUIRE(c >= 0 && c < cfg_.num_chars,
                "char label " << c << " outside [0," << cfg_.num_chars << ")");
  }

  DiscriminatorOutput out;
  Var x = std::move(images);
  for (const auto& block : blocks_) {
    x = (*block)(x);
    out.features.push_back(x);
  }
  Var phi = nn::global_mean_pool(x);  // (B,C)
  Var uncond = head_(phi);
  Var style_proj = nn::rows_dot(font_emb_(font_labels), phi);
  Var char_proj = nn::rows_dot(char_emb_(char_labels), phi);
  out.logits = nn::add(std::move(uncond), nn::add(std::move(style_proj), std::move(char_proj)));
  return out;
}

}  // namespace vqfont::gan
