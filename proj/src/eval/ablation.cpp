#include "vqfont/eval/ablation.hpp"

#include <fstream>
#include <iostream>

namespace vqfont::eval {

AblationAxis axis_from_string(const std::string& s) {
  if (s == "codebook_size") return AblationAxis::CodebookSize;
  if (s == "modules") return AblationAxis::Modules;
  if (s == "ref_count") return AblationAxis::RefCount;
  VQF_REQUIRE(false, "unknown ablation axis '" << s
                     << "' (use codebook_size|modules|ref_count)");
}

namespace {

int64_t parse_positive(const std::string& s, const char* what) {
  int64_t v = 0;
  try {
    size_t pos = 0;
    v = std::stoll(s, &pos);
    VQF_REQUIRE(pos == s.size(), "invalid " << what << " '" << s << "'");
  } catch (const std::logic_error&) {
    VQF_REQUIRE(false, "invalid " << what << " '" << s << "'");
  }
  VQF_REQUIRE(v >= 1, what << " must be >= 1, got " << v);
  return v;
}

void validate(AblationAxis axis, const std::vector<std::string>& values) {
  VQF_REQUIRE(!values.empty(), "ablation sweep needs at least one value");
  for (const auto& v : values) {
    switch (axis) {
      case AblationAxis::CodebookSize:
        VQF_REQUIRE(parse_positive(v, "codebook size") >= 2, "codebook size must be >= 2: " << v);
        break;
      case AblationAxis::Modules:
        VQF_REQUIRE(v == "full" || v == "no-LSA" || v == "no-GSA",
                    "module axis value must be full|no-LSA|no-GSA, got '" << v << "'");
        break;
      case AblationAxis::RefCount:
        parse_positive(v, "reference count");
        break;
    }
  }
}

std::filesystem::path ensure_vq(const font::DatasetManifest& manifest, const AblationConfig& cfg,
                                const std::filesystem::path& dir) {
  if (!cfg.vq_checkpoint.empty()) return cfg.vq_checkpoint;
  const auto path = dir / "vq.ckpt";
  std::cerr << "[ablate] pretraining codebook -> " << path.string() << "\n";
  auto res = vq::pretrain_codebook(manifest, cfg.vq_cfg, cfg.pretrain, path);
  VQF_REQUIRE(!res.diverged, "ablation pretraining diverged");
  return path;
}

MetricReport train_and_eval(const font::DatasetManifest& manifest, const AblationConfig& cfg,
                            const vq::VQModel& pretrained, gen::GeneratorConfig gcfg,
                            const std::filesystem::path& run_dir, const std::string& label) {
  std::cerr << "[ablate] training variant '" << label << "'\n";
  gan::GanTrainer trainer(manifest, pretrained, gcfg, cfg.train, run_dir);
  auto result = trainer.run();
  VQF_REQUIRE(!result.diverged, "ablation training diverged for '" << label << "'");
  return evaluate_split(trainer.generator(), manifest, cfg.eval);
}

}  // namespace

std::vector<AblationRun> ablation_sweep(const font::DatasetManifest& manifest, AblationAxis axis,
                                        const std::vector<std::string>& values,
                                        const AblationConfig& cfg,
                                        const std::filesystem::path& work_dir) {
  validate(axis, values);
  std::filesystem::create_directories(work_dir);
  std::vector<AblationRun> runs;

  switch (axis) {
    case AblationAxis::CodebookSize: {
      for (const auto& v : values) {
        const auto dir = work_dir / ("codebook_" + v);
        std::filesystem::create_directories(dir);
        vq::VQModelConfig vcfg = cfg.vq_cfg;
        vcfg.codebook_size = parse_positive(v, "codebook size");
        std::cerr << "[ablate] pretraining with N=" << v << "\n";
        auto pre = vq::pretrain_codebook(manifest, vcfg, cfg.pretrain, dir / "vq.ckpt");
        VQF_REQUIRE(!pre.diverged, "pretraining diverged at N=" << v);
        auto vq_model = vq::load_vq_model(nn::Checkpoint::load(dir / "vq.ckpt"));
        runs.push_back({v, train_and_eval(manifest, cfg, *vq_model, cfg.gen_cfg, dir, "N=" + v)});
      }
      break;
    }
    case AblationAxis::Modules: {
      const auto vq_path = ensure_vq(manifest, cfg, work_dir);
      auto vq_model = vq::load_vq_model(nn::Checkpoint::load(vq_path));
      for (const auto& v : values) {
        gen::GeneratorConfig gcfg = cfg.gen_cfg;
        gcfg.use_lsa = v != "no-LSA";
        gcfg.use_gsa = v != "no-GSA";
        if (v == "full" && !cfg.full_checkpoint.empty()) {
          auto model = gen::load_generator(nn::Checkpoint::load(cfg.full_checkpoint));
          runs.push_back({v, evaluate_split(*model, manifest, cfg.eval)});
        } else {
          const auto dir = work_dir / ("modules_" + v);
          runs.push_back({v, train_and_eval(manifest, cfg, *vq_model, gcfg, dir, v)});
        }
      }
      break;
    }
    case AblationAxis::RefCount: {
      std::unique_ptr<gen::GeneratorModel> model;
      if (!cfg.full_checkpoint.empty()) {
        model = gen::load_generator(nn::Checkpoint::load(cfg.full_checkpoint));
      } else {
        const auto vq_path = ensure_vq(manifest, cfg, work_dir);
        auto vq_model = vq::load_vq_model(nn::Checkpoint::load(vq_path));
        gan::GanTrainer trainer(manifest, *vq_model, cfg.gen_cfg, cfg.train,
                                work_dir / "ref_count_base");
        auto result = trainer.run();
        VQF_REQUIRE(!result.diverged, "ref-count base training diverged");
        model = gen::load_generator(nn::Checkpoint::load(result.checkpoint));
      }
      for (const auto& v : values) {
        EvalOptions eopt = cfg.eval;
        eopt.k = static_cast<int>(parse_positive(v, "reference count"));
        runs.push_back({v, evaluate_split(*model, manifest, eopt)});
      }
      break;
    }
  }
  return runs;
}

void write_sweep_csv(const std::vector<AblationRun>& runs, const std::filesystem::path& path) {
  std::ofstream out(path);
  VQF_REQUIRE(out.good(), "cannot write sweep csv: " << path.string());
  out << "value,ssim,rmse\n";
  for (const auto& run : runs) {
    out << run.value << "," << run.report.aggregate("ssim") << ","
        << run.report.aggregate("rmse") << "\n";
  }
}

}  // namespace vqfont::eval
