#include "vqfont/eval/evaluator.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

namespace vqfont::eval {

RefMode ref_mode_from_string(const std::string& s) {
  if (s == "fixed") return RefMode::Fixed;
  if (s == "random") return RefMode::Random;
  VQF_REQUIRE(false, "unknown reference mode '" << s << "' (use fixed|random)");
}

std::string to_string(RefMode m) { return m == RefMode::Fixed ? "fixed" : "random"; }

double MetricReport::aggregate(const std::string& metric) const {
  auto it = aggregates.find(metric);
  VQF_REQUIRE(it != aggregates.end(), "report has no aggregate '" << metric << "'");
  return it->second;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["split"] = split;
  j["k"] = k;
  j["ref_seed"] = ref_seed;
  j["ref_mode"] = to_string(ref_mode);
  j["pixel_domain"] = "[0,1]";
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json rec = {{"font", r.font_id}, {"char", font::codepoint_hex(r.ch)}};
    for (const auto& [name, value] : r.metrics) rec[name] = value;
    recs.push_back(std::move(rec));
  }
  j["records"] = std::move(recs);
  j["aggregates"] = aggregates;
  j["skipped"] = skipped;
  j["config"] = config_echo;
  return j.dump(1);
}

void MetricReport::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  VQF_REQUIRE(out.good(), "cannot write report: " << path.string());
  out << to_json() << "\n";
}

namespace {

std::vector<char32_t> pick_refs(const std::vector<char32_t>& pool, int k, Rng& rng) {
  VQF_REQUIRE(static_cast<int>(pool.size()) >= k,
              "font offers " << pool.size() << " reference chars, need " << k);
  std::vector<char32_t> shuffled = pool;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<size_t> pick(static_cast<size_t>(i), shuffled.size() - 1);
    std::swap(shuffled[static_cast<size_t>(i)], shuffled[pick(rng)]);
  }
  shuffled.resize(static_cast<size_t>(k));
  return shuffled;
}

}  // namespace

MetricReport evaluate_split(const gen::GeneratorModel& model,
                            const font::DatasetManifest& manifest, const EvalOptions& opt) {
  const auto& def = manifest.split(opt.split);
  font::GlyphStore store(manifest);

  MetricReport report;
  report.split = opt.split;
  report.k = opt.k;
  report.ref_seed = opt.ref_seed;
  report.ref_mode = opt.ref_mode;
  report.config_echo = opt.config_echo;

  RmseMetric rmse_metric;
  SsimMetric ssim_metric;
  std::vector<const PairMetric*> metrics{&rmse_metric, &ssim_metric};
  metrics.insert(metrics.end(), opt.extra_metrics.begin(), opt.extra_metrics.end());

  for (const auto& font_id : def.fonts) {
    // Reference pool: the split's chars this font renders.
    std::vector<char32_t> pool;
    for (char32_t c : def.chars) {
      if (manifest.has(font_id, c)) pool.push_back(c);
    }
    if (pool.empty()) {
      report.skipped += static_cast<int64_t>(def.chars.size());
      continue;
    }

    gen::GeneratorModel::StyleContext ctx;
    if (opt.ref_mode == RefMode::Fixed) {
      Rng rng(derive_seed(opt.ref_seed, "refs:" + font_id));
      std::vector<font::GlyphImage> refs;
      for (char32_t c : pick_refs(pool, opt.k, rng)) refs.push_back(store.get(font_id, c));
      ctx = model.prepare_style(refs);
    }

    for (char32_t ch : def.chars) {
      if (!manifest.has(font_id, ch) || !manifest.has(manifest.content_font_id, ch)) {
        ++report.skipped;
        continue;
      }
      if (opt.ref_mode == RefMode::Random) {
        Rng rng(derive_seed(opt.ref_seed, "refs:" + font_id + ":" + font::codepoint_hex(ch)));
        std::vector<font::GlyphImage> refs;
        for (char32_t c : pick_refs(pool, opt.k, rng)) refs.push_back(store.get(font_id, c));
        ctx = model.prepare_style(refs);
      }
      const auto& content = store.get(manifest.content_font_id, ch);
      const auto& truth = store.get(font_id, ch);
      const auto generated = model.generate_with(ctx, content);

      PairRecord rec;
      rec.font_id = font_id;
      rec.ch = ch;
      for (const PairMetric* m : metrics) rec.metrics[m->name()] = (*m)(generated, truth);
      report.records.push_back(std::move(rec));
    }
  }

  VQF_REQUIRE(!report.records.empty(), "split '" << opt.split << "' produced no records");
  for (const PairMetric* m : metrics) {
    double sum = 0.0;
    for (const auto& r : report.records) sum += r.metrics.at(m->name());
    report.aggregates[m->name()] = sum / static_cast<double>(report.records.size());
  }
  return report;
}

}  // namespace vqfont::eval
