#include "vqfont/cli/commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "vqfont/cli/config.hpp"
#include "vqfont/eval/ablation.hpp"
#include "vqfont/font/image_io.hpp"
#include "vqfont/font/render.hpp"
#include "vqfont/gan/trainer.hpp"
#include "vqfont/vq/pretrain.hpp"

namespace vqfont::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string timestamp_dir() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::gmtime(&t));
  return buf;
}

// runs/<timestamp>/{config, checkpoints, samples, reports}
fs::path make_run_dir(const std::string& explicit_out) {
  fs::path dir = explicit_out.empty() ? fs::path("runs") / timestamp_dir() : fs::path(explicit_out);
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "samples");
  fs::create_directories(dir / "reports");
  return dir;
}

void write_config_echo(const RunConfig& cfg, const fs::path& dir) {
  std::ofstream out(dir / "config.json");
  out << cfg.to_json() << "\n";
}

// The first 120 codepoints DejaVu-style Latin fonts reliably cover:
// printable ASCII, then Latin-1 letters.
std::vector<char32_t> default_charset() {
  std::vector<char32_t> cs;
  for (char32_t c = 0x21; c <= 0x7E && cs.size() < 120; ++c) cs.push_back(c);
  for (char32_t c = 0xC0; c <= 0xFF && cs.size() < 120; ++c) {
    if (c == 0xD7 || c == 0xF7) continue;  // multiplication/division signs
    cs.push_back(c);
  }
  return cs;
}

std::vector<char32_t> charset_from_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  VQF_REQUIRE(in.good(), "cannot open charset file: " << path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto cs = font::utf8_codepoints(text);
  VQF_REQUIRE(!cs.empty(), "charset file has no characters: " << path.string());
  return cs;
}

vq::VQModelConfig vq_config_of(const RunConfig& cfg, int canvas) {
  vq::VQModelConfig v;
  v.codebook_size = cfg.codebook_size;
  v.dim = cfg.dim;
  v.canvas = canvas;
  v.downsamples = cfg.downsamples;
  v.res_blocks = cfg.res_blocks;
  return v;
}

gen::GeneratorConfig gen_config_of(const RunConfig& cfg, const vq::VQModelConfig& vq_cfg) {
  gen::GeneratorConfig g;
  g.vq = vq_cfg;
  g.heads = cfg.heads;
  g.attn_layers = cfg.attn_layers;
  g.gsa_temperature = cfg.gsa_temperature;
  g.use_lsa = cfg.use_lsa;
  g.use_gsa = cfg.use_gsa;
  return g;
}

gan::TrainOptions train_options_of(const RunConfig& cfg) {
  gan::TrainOptions t;
  t.iterations = cfg.train_iterations;
  t.batch = cfg.train_batch;
  t.k = cfg.k;
  t.lr_g = cfg.lr_g;
  t.lr_d = cfg.lr_d;
  t.adam_beta1 = cfg.adam_beta1;
  t.adam_beta2 = cfg.adam_beta2;
  t.lambda_img = cfg.lambda_img;
  t.lambda_feat = cfg.lambda_feat;
  t.lambda_cst = cfg.lambda_cst;
  t.tau = cfg.tau;
  t.d_base_channels = cfg.d_base_channels;
  t.d_blocks = cfg.d_blocks;
  t.seed = cfg.seed;
  t.checkpoint_every = cfg.checkpoint_every;
  t.config_echo = cfg.to_json();
  return t;
}

vq::PretrainOptions pretrain_options_of(const RunConfig& cfg) {
  vq::PretrainOptions p;
  p.steps = cfg.vq_steps;
  p.batch = cfg.vq_batch;
  p.lr = cfg.vq_lr;
  p.alpha = cfg.alpha;
  p.beta = cfg.beta;
  p.glyph_limit = cfg.vq_glyph_limit;
  p.seed = cfg.seed;
  p.reseed_dead_codes = cfg.reseed_dead_codes;
  p.config_echo = cfg.to_json();
  return p;
}

eval::EvalOptions eval_options_of(const RunConfig& cfg) {
  eval::EvalOptions e;
  e.split = cfg.eval_split;
  e.k = cfg.k;
  e.ref_seed = cfg.ref_seed;
  e.ref_mode = eval::ref_mode_from_string(cfg.ref_mode);
  e.config_echo = cfg.to_json();
  return e;
}

// Shared wiring: a --config file is applied below defaults, explicit flags
// above it. CLI11 only writes bound fields for flags that actually appear.
void preload_config(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option_function<std::string>(
         "--config",
         [&cfg](const std::string& path) {
           RunConfig base = RunConfig::from_file(path);
           cfg = base;
         },
         "JSON config file; explicit flags override its values")
      ->trigger_on_parse()
      ->check(CLI::ExistingFile);
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "global seed")->envname("VQFONT_SEED")
      ->capture_default_str();
  cmd->add_option("--codebook-size", cfg.codebook_size, "component codebook size N")
      ->capture_default_str();
  cmd->add_option("--dim", cfg.dim, "embedding dimension d")->capture_default_str();
  cmd->add_option("--downsamples", cfg.downsamples, "stride-2 encoder stages")
      ->capture_default_str();
  cmd->add_option("--res-blocks", cfg.res_blocks, "residual blocks per codec")
      ->capture_default_str();
}

void add_attention_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--heads", cfg.heads, "attention heads m (must divide dim)")
      ->capture_default_str();
  cmd->add_option("--attn-layers", cfg.attn_layers, "stacked transformer layers")
      ->capture_default_str();
  cmd->add_option("--gsa-temperature", cfg.gsa_temperature,
                  "temperature of the global style softmax")
      ->capture_default_str();
}

struct CommandState {
  RunConfig cfg;

  // render
  std::string fonts_arg, font_dir, chars_file, out, content_font_id;

  // pretrain / train
  std::string manifest_path, vq_ckpt, trace_csv;

  // generate
  std::string gan_ckpt, refs_arg, content_font_file, contact_sheet;

  // eval
  std::string report_out;

  // inspect-codebook
  std::string image_path, codes_arg;

  // ablate
  std::string axis, values_arg, full_ckpt;
};

int cmd_render(CommandState& st) {
  st.cfg.validate();
  std::vector<fs::path> files;
  for (const auto& f : split_commas(st.fonts_arg)) files.emplace_back(f);
  if (!st.font_dir.empty()) {
    for (const auto& e : fs::directory_iterator(st.font_dir)) {
      if (e.path().extension() == ".ttf") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  }
  VQF_REQUIRE(!files.empty(), "no font files given (use --fonts or --font-dir)");

  const auto charset =
      st.chars_file.empty() ? default_charset() : charset_from_file(st.chars_file);
  const fs::path root(st.out);
  fs::create_directories(root);

  int64_t rendered = 0, skipped = 0;
  for (const auto& file : files) {
    auto res = font::render_font(file, charset, st.cfg.canvas, st.cfg.margin);
    skipped += static_cast<int64_t>(res.skipped.size());
    VQF_REQUIRE(!res.images.empty(), "font renders none of the charset: " << file.string());
    const fs::path dir = root / res.images.front().font_id;
    fs::create_directories(dir);
    for (const auto& img : res.images) {
      font::save_glyph_png(dir / (font::codepoint_hex(img.ch) + ".png"), img);
      ++rendered;
    }
  }

  auto manifest = font::build_manifest(root, st.cfg.n_seen_fonts, st.cfg.n_seen_chars,
                                       st.cfg.seed, st.content_font_id);
  manifest.save(root / "manifest.json");
  write_config_echo(st.cfg, root);
  std::cout << "rendered " << rendered << " glyphs from " << files.size() << " fonts ("
            << skipped << " skipped), template font " << manifest.content_font_id
            << ", manifest " << (root / "manifest.json").string() << "\n";
  return 0;
}

int cmd_pretrain(CommandState& st) {
  st.cfg.validate();
  auto manifest = font::DatasetManifest::load(st.manifest_path);
  fs::path out = st.out.empty()
                     ? make_run_dir("") / "checkpoints" / "vq.ckpt"
                     : fs::path(st.out);
  fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());

  auto opts = pretrain_options_of(st.cfg);
  const fs::path trace = st.trace_csv.empty() ? out.parent_path() / "pretrain_trace.csv"
                                              : fs::path(st.trace_csv);
  auto result = vq::pretrain_codebook(manifest, vq_config_of(st.cfg, manifest.canvas), opts, out,
                                      trace);
  if (result.diverged) {
    std::cerr << "error: pretraining diverged at step " << result.steps_completed
              << "; last finite checkpoint kept at " << result.checkpoint.string() << "\n";
    return 1;
  }
  std::cout << "pretrained " << result.steps_completed << " steps, final L1 "
            << result.final_l1 << ", checkpoint " << result.checkpoint.string() << "\n";
  return 0;
}

int cmd_train(CommandState& st) {
  st.cfg.validate();
  auto manifest = font::DatasetManifest::load(st.manifest_path);
  auto vq_model = vq::load_vq_model(nn::Checkpoint::load(st.vq_ckpt));
  const fs::path run_dir = make_run_dir(st.out);
  write_config_echo(st.cfg, run_dir);

  gan::GanTrainer trainer(manifest, *vq_model, gen_config_of(st.cfg, vq_model->config()),
                          train_options_of(st.cfg), run_dir / "checkpoints");
  auto result = trainer.run();
  if (result.diverged) {
    std::cerr << "error: training diverged at step " << result.steps_completed
              << "; last finite checkpoint kept at " << result.checkpoint.string() << "\n";
    return 1;
  }
  std::cout << "trained " << result.steps_completed << " iterations, checkpoint "
            << result.checkpoint.string() << ", trace " << result.trace_csv.string() << "\n";
  return 0;
}

int cmd_generate(CommandState& st) {
  auto ck = nn::Checkpoint::load(st.gan_ckpt);
  auto model = gen::load_generator(ck);
  const int canvas = model->config().vq.canvas;

  std::vector<font::GlyphImage> refs;
  for (const auto& p : split_commas(st.refs_arg)) {
    refs.push_back(font::load_glyph_png(p, "reference", static_cast<char32_t>(refs.size())));
    VQF_REQUIRE(refs.back().canvas == canvas, "reference " << p << " canvas "
                << refs.back().canvas << " != model canvas " << canvas);
  }
  VQF_REQUIRE(!refs.empty(), "no reference images given");

  const auto chars = charset_from_file(st.chars_file);
  VQF_REQUIRE(!st.content_font_file.empty(),
              "--content-font <file.ttf> is required to render content glyphs");
  const auto content_font = font::TrueTypeFont::load(st.content_font_file);

  const fs::path out(st.out);
  fs::create_directories(out);

  const auto ctx = model->prepare_style(refs);  // one stylization per reference set
  std::vector<font::GlyphImage> generated;
  int64_t skipped = 0;
  for (char32_t c : chars) {
    if (!content_font.has_outline(c)) {
      std::cerr << "warning: content font has no outline for U+" << font::codepoint_hex(c)
                << ", skipped\n";
      ++skipped;
      continue;
    }
    const auto content = font::render_glyph(content_font, c, canvas);
    auto img = model->generate_with(ctx, content);
    font::save_glyph_png(out / (font::codepoint_hex(c) + ".png"), img);
    generated.push_back(std::move(img));
  }
  VQF_REQUIRE(!generated.empty(), "no character was generated");

  if (!st.contact_sheet.empty()) {
    // Reference row on top, generated glyphs below, eight per row.
    const int per_row = 8;
    const int pad = 2;
    const int cols = std::max<int>(per_row, static_cast<int>(refs.size()));
    const int gen_rows = (static_cast<int>(generated.size()) + per_row - 1) / per_row;
    const int rows = 1 + gen_rows;
    const int W = cols * (canvas + pad) + pad;
    const int H = rows * (canvas + pad) + pad;
    std::vector<uint8_t> sheet(static_cast<size_t>(W) * H, 255);
    auto blit = [&](const font::GlyphImage& g, int row, int col) {
      const int y0 = pad + row * (canvas + pad);
      const int x0 = pad + col * (canvas + pad);
      for (int y = 0; y < canvas; ++y) {
        for (int x = 0; x < canvas; ++x) {
          sheet[static_cast<size_t>(y0 + y) * W + x0 + x] =
              static_cast<uint8_t>(std::lround((g.at(y, x) + 1.0) * 0.5 * 255.0));
        }
      }
    };
    for (size_t i = 0; i < refs.size(); ++i) blit(refs[i], 0, static_cast<int>(i));
    for (size_t i = 0; i < generated.size(); ++i) {
      blit(generated[i], 1 + static_cast<int>(i) / per_row, static_cast<int>(i) % per_row);
    }
    font::write_gray_png(st.contact_sheet, sheet, W, H);
  }
  std::cout << "generated " << generated.size() << " glyphs (" << skipped << " skipped) into "
            << out.string() << "\n";
  return 0;
}

int cmd_eval(CommandState& st) {
  auto manifest = font::DatasetManifest::load(st.manifest_path);
  auto model = gen::load_generator(nn::Checkpoint::load(st.gan_ckpt));
  auto opts = eval_options_of(st.cfg);
  auto report = eval::evaluate_split(*model, manifest, opts);
  report.save(st.report_out);
  std::cout << "split " << report.split << ": ssim " << report.aggregate("ssim") << ", rmse "
            << report.aggregate("rmse") << ", " << report.records.size() << " pairs ("
            << report.skipped << " skipped) -> " << st.report_out << "\n";
  return 0;
}

int cmd_inspect_codebook(CommandState& st) {
  auto model = vq::load_vq_model(nn::Checkpoint::load(st.vq_ckpt));
  const int canvas = model->config().canvas;
  auto img = font::load_glyph_png(st.image_path, "probe", U'?');
  VQF_REQUIRE(img.canvas == canvas,
              "image canvas " << img.canvas << " != model canvas " << canvas);

  std::vector<int> codes;
  if (st.codes_arg == "all") {
    for (int i = 0; i < model->config().codebook_size; ++i) codes.push_back(i);
  } else {
    for (const auto& s : split_commas(st.codes_arg)) codes.push_back(std::stoi(s));
  }
  const fs::path out(st.out);
  fs::create_directories(out);

  for (int code : codes) {
    const auto heat = model->code_activation_map(img, code);
    const int gh = static_cast<int>(heat.dim(0)), gw = static_cast<int>(heat.dim(1));
    const int cell = canvas / gh;
    std::vector<uint8_t> png(static_cast<size_t>(canvas) * canvas);
    for (int y = 0; y < canvas; ++y) {
      for (int x = 0; x < canvas; ++x) {
        const double v = heat[(y / cell) * gw + (x / cell)];
        png[static_cast<size_t>(y) * canvas + x] =
            static_cast<uint8_t>(std::lround(255.0 * (1.0 - v)));  // selected = dark
      }
    }
    font::write_gray_png(out / ("code_" + std::to_string(code) + ".png"), png, canvas, canvas);
  }
  std::cout << "wrote " << codes.size() << " activation maps to " << out.string() << "\n";
  return 0;
}

int cmd_ablate(CommandState& st) {
  st.cfg.validate();
  auto manifest = font::DatasetManifest::load(st.manifest_path);
  const auto axis = eval::axis_from_string(st.axis);
  const auto values = split_commas(st.values_arg);

  eval::AblationConfig acfg;
  acfg.vq_cfg = vq_config_of(st.cfg, manifest.canvas);
  acfg.pretrain = pretrain_options_of(st.cfg);
  acfg.gen_cfg = gen_config_of(st.cfg, acfg.vq_cfg);
  acfg.train = train_options_of(st.cfg);
  acfg.eval = eval_options_of(st.cfg);
  if (!st.vq_ckpt.empty()) acfg.vq_checkpoint = st.vq_ckpt;
  if (!st.full_ckpt.empty()) acfg.full_checkpoint = st.full_ckpt;

  const fs::path run_dir = make_run_dir(st.out);
  write_config_echo(st.cfg, run_dir);
  auto runs = eval::ablation_sweep(manifest, axis, values, acfg, run_dir);

  for (const auto& run : runs) {
    run.report.save(run_dir / "reports" / (st.axis + "_" + run.value + ".json"));
  }
  eval::write_sweep_csv(runs, run_dir / "reports" / (st.axis + "_sweep.csv"));

  std::cout << "axis " << st.axis << ":\n";
  for (const auto& run : runs) {
    std::cout << "  " << run.value << ": ssim " << run.report.aggregate("ssim") << ", rmse "
              << run.report.aggregate("rmse") << "\n";
  }
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"vqfont: few-shot font generation with a learned component codebook"};
  app.require_subcommand(1);
  CommandState st;
  int rc = 0;

  auto* render = app.add_subcommand("render", "rasterize fonts into a glyph corpus + manifest");
  preload_config(render, st.cfg);
  render->add_option("--fonts", st.fonts_arg, "comma-separated font files");
  render->add_option("--font-dir", st.font_dir, "directory of .ttf files");
  render->add_option("--chars", st.chars_file, "charset file (UTF-8); default: Latin letters+digits");
  render->add_option("--out", st.out, "output corpus root")->required();
  render->add_option("--canvas", st.cfg.canvas, "canvas size in pixels")->capture_default_str();
  render->add_option("--margin", st.cfg.margin, "margin fraction per side")->capture_default_str();
  render->add_option("--n-seen-fonts", st.cfg.n_seen_fonts, "fonts in the seen split")
      ->capture_default_str();
  render->add_option("--n-seen-chars", st.cfg.n_seen_chars, "chars in the seen split")
      ->capture_default_str();
  render->add_option("--seed", st.cfg.seed, "split seed")->envname("VQFONT_SEED")
      ->capture_default_str();
  render->add_option("--content-font", st.content_font_id,
                     "font id to pin as the content template (default: seed pick)");
  render->callback([&] { rc = cmd_render(st); });

  auto* pretrain = app.add_subcommand("pretrain", "train the component codebook (VQ stage)");
  preload_config(pretrain, st.cfg);
  pretrain->add_option("--manifest", st.manifest_path, "dataset manifest")->required();
  pretrain->add_option("--out", st.out, "output checkpoint path (default runs/<ts>/...)");
  add_model_options(pretrain, st.cfg);
  pretrain->add_option("--steps", st.cfg.vq_steps, "optimization steps")->capture_default_str();
  pretrain->add_option("--batch", st.cfg.vq_batch, "batch size")->capture_default_str();
  pretrain->add_option("--lr", st.cfg.vq_lr, "learning rate")->capture_default_str();
  pretrain->add_option("--alpha", st.cfg.alpha, "codebook loss weight")->capture_default_str();
  pretrain->add_option("--beta", st.cfg.beta, "commitment loss weight")->capture_default_str();
  pretrain->add_option("--glyph-limit", st.cfg.vq_glyph_limit,
                       "cap on template glyphs (0 = all seen chars)")->capture_default_str();
  pretrain->add_flag("--reseed-dead-codes", st.cfg.reseed_dead_codes,
                     "reseed codes unused for 1000 steps");
  pretrain->add_option("--trace", st.trace_csv, "loss trace CSV path");
  pretrain->callback([&] { rc = cmd_pretrain(st); });

  auto* train = app.add_subcommand("train", "adversarial font-generation training");
  preload_config(train, st.cfg);
  train->add_option("--manifest", st.manifest_path, "dataset manifest")->required();
  train->add_option("--vq-ckpt", st.vq_ckpt, "pretrained codebook checkpoint")->required();
  train->add_option("--out", st.out, "run directory (default runs/<ts>)");
  add_model_options(train, st.cfg);
  add_attention_options(train, st.cfg);
  train->add_option("--iterations", st.cfg.train_iterations, "training iterations")
      ->capture_default_str();
  train->add_option("--batch", st.cfg.train_batch, "batch size")->capture_default_str();
  train->add_option("--k", st.cfg.k, "reference glyphs per style")->capture_default_str();
  train->add_option("--lr-g", st.cfg.lr_g, "generator learning rate")->capture_default_str();
  train->add_option("--lr-d", st.cfg.lr_d, "discriminator learning rate")->capture_default_str();
  train->add_option("--lambda-img", st.cfg.lambda_img, "pixel matching weight")
      ->capture_default_str();
  train->add_option("--lambda-feat", st.cfg.lambda_feat, "feature matching weight")
      ->capture_default_str();
  train->add_option("--lambda-cst", st.cfg.lambda_cst, "style contrastive weight")
      ->capture_default_str();
  train->add_option("--tau", st.cfg.tau, "contrastive temperature")->capture_default_str();
  train->add_option("--d-base-channels", st.cfg.d_base_channels, "discriminator width")
      ->capture_default_str();
  train->add_option("--d-blocks", st.cfg.d_blocks, "discriminator depth")->capture_default_str();
  train->add_option("--checkpoint-every", st.cfg.checkpoint_every, "checkpoint interval")
      ->capture_default_str();
  train->add_flag("--lsa,!--no-lsa", st.cfg.use_lsa, "local style aggregator on/off");
  train->add_flag("--gsa,!--no-gsa", st.cfg.use_gsa, "global style aggregator on/off");
  train->callback([&] { rc = cmd_train(st); });

  auto* generate = app.add_subcommand("generate", "generate a glyph library from references");
  generate->add_option("--ckpt", st.gan_ckpt, "trained checkpoint")->required();
  generate->add_option("--refs", st.refs_arg, "comma-separated reference PNGs")->required();
  generate->add_option("--chars", st.chars_file, "text file of characters to generate")
      ->required();
  generate->add_option("--content-font", st.content_font_file,
                       "font file rendering the content glyphs (any script it covers)")
      ->required();
  generate->add_option("--out", st.out, "output directory")->required();
  generate->add_option("--contact-sheet", st.contact_sheet, "optional grid image path");
  generate->callback([&] { rc = cmd_generate(st); });

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  preload_config(eval_cmd, st.cfg);
  eval_cmd->add_option("--ckpt", st.gan_ckpt, "trained checkpoint")->required();
  eval_cmd->add_option("--manifest", st.manifest_path, "dataset manifest")->required();
  eval_cmd->add_option("--split", st.cfg.eval_split, "SFSC|UFSC|UFUC")->capture_default_str();
  eval_cmd->add_option("--out", st.report_out, "report JSON path")->required();
  eval_cmd->add_option("--k", st.cfg.k, "references per font")->capture_default_str();
  eval_cmd->add_option("--ref-seed", st.cfg.ref_seed, "reference selection seed")
      ->capture_default_str();
  eval_cmd->add_option("--ref-mode", st.cfg.ref_mode, "fixed|random reference selection")
      ->capture_default_str();
  eval_cmd->callback([&] { rc = cmd_eval(st); });

  auto* inspect = app.add_subcommand("inspect-codebook", "visualize code activation maps");
  inspect->add_option("--ckpt", st.vq_ckpt, "vq checkpoint")->required();
  inspect->add_option("--image", st.image_path, "glyph PNG to probe")->required();
  inspect->add_option("--codes", st.codes_arg, "comma list of code indices, or 'all'")
      ->default_val("all");
  inspect->add_option("--out", st.out, "output directory")->required();
  inspect->callback([&] { rc = cmd_inspect_codebook(st); });

  auto* ablate = app.add_subcommand("ablate", "train/evaluate along an ablation axis");
  preload_config(ablate, st.cfg);
  ablate->add_option("--axis", st.axis, "codebook_size|modules|ref_count")->required();
  ablate->add_option("--values", st.values_arg, "comma-separated axis values")->required();
  ablate->add_option("--manifest", st.manifest_path, "dataset manifest")->required();
  ablate->add_option("--vq-ckpt", st.vq_ckpt, "reuse a pretrained codebook checkpoint");
  ablate->add_option("--full-ckpt", st.full_ckpt, "reuse a trained full-model checkpoint");
  ablate->add_option("--out", st.out, "run directory (default runs/<ts>)");
  add_model_options(ablate, st.cfg);
  add_attention_options(ablate, st.cfg);
  ablate->add_option("--iterations", st.cfg.train_iterations, "training iterations per value")
      ->capture_default_str();
  ablate->add_option("--batch", st.cfg.train_batch, "batch size")->capture_default_str();
  ablate->add_option("--k", st.cfg.k, "references per style")->capture_default_str();
  ablate->add_option("--steps", st.cfg.vq_steps, "pretraining steps per value")
      ->capture_default_str();
  ablate->add_option("--vq-batch", st.cfg.vq_batch, "pretraining batch size")
      ->capture_default_str();
  ablate->add_option("--split", st.cfg.eval_split, "evaluation split")->capture_default_str();
  ablate->callback([&] { rc = cmd_ablate(st); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, returns 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

}  // namespace vqfont::cli
