#include "vqfont/gan/trainer.hpp"

#include <cmath>
#include <iostream>
#include <set>

#include "vqfont/gan/losses.hpp"

namespace vqfont::gan {

using nn::Tensor;
using nn::Var;

bool GanTrainer::StepLosses::finite() const {
  return std::isfinite(d_adv) && std::isfinite(g_adv) && std::isfinite(img) &&
         std::isfinite(feat) && std::isfinite(cst);
}

GanTrainer::GanTrainer(const font::DatasetManifest& manifest, const vq::VQModel& pretrained,
                       gen::GeneratorConfig gen_cfg, TrainOptions opt,
                       const std::filesystem::path& out_dir)
    : manifest_(manifest),
      gen_cfg_(gen_cfg),
      opt_(opt),
      out_dir_(out_dir),
      store_(manifest),
      batch_rng_(derive_seed(opt.seed, "batch-fonts")) {
  gen_cfg_.vq = pretrained.config();
  VQF_REQUIRE(gen_cfg_.vq.canvas == manifest.canvas,
              "pretrained canvas " << gen_cfg_.vq.canvas << " != manifest canvas "
                                   << manifest.canvas);

  const auto& seen = manifest.split("SFSC");
  for (size_t i = 0; i < seen.fonts.size(); ++i) {
    font_label_of_[seen.fonts[i]] = static_cast<int32_t>(i);
  }
  for (size_t i = 0; i < seen.chars.size(); ++i) {
    char_label_of_[seen.chars[i]] = static_cast<int32_t>(i);
  }

  gen_ = std::make_unique<gen::GeneratorModel>(derive_seed(opt.seed, "generator"), gen_cfg_);
  gen_->adopt_frontend(pretrained);
  frontend_hash0_ = gen_->frontend_hash();

  DiscriminatorConfig dcfg;
  dcfg.canvas = gen_cfg_.vq.canvas;
  dcfg.base_channels = opt.d_base_channels;
  dcfg.blocks = opt.d_blocks;
  dcfg.num_fonts = static_cast<int64_t>(seen.fonts.size());
  dcfg.num_chars = static_cast<int64_t>(seen.chars.size());
  Rng drng(derive_seed(opt.seed, "discriminator"));
  disc_ = std::make_unique<Discriminator>(drng, dcfg);

  g_opt_ = std::make_unique<nn::Adam>(gen_->trainable_parameters(), opt.lr_g, opt.adam_beta1,
                                      opt.adam_beta2);
  d_opt_ = std::make_unique<nn::Adam>(disc_->parameters(), opt.lr_d, opt.adam_beta1,
                                      opt.adam_beta2);

  sampler_ = std::make_unique<font::TripletSampler>(
      manifest, "SFSC", opt.k, derive_seed(opt.seed, "triplets"), gen_cfg_.use_lsa);
  if (gen_cfg_.use_lsa) {
    VQF_REQUIRE(sampler_->fonts().size() >= 2,
                "style contrastive loss needs >= 2 usable training fonts, found "
                    << sampler_->fonts().size());
  }
  std::filesystem::create_directories(out_dir_);
}

GanTrainer::Batch GanTrainer::draw_batch() {
  const int64_t B = opt_.batch;
  std::vector<font::TripletSampler::Ids> ids;
  for (int attempt = 0; attempt < 100; ++attempt) {
    ids.clear();
    std::set<std::string> fonts;
    for (int64_t i = 0; i < B; ++i) {
      ids.push_back(sampler_->sample_ids());
      fonts.insert(ids.back().font_id);
    }
    if (!gen_cfg_.use_lsa || fonts.size() >= 2 || sampler_->fonts().size() < 2) break;
  }

  Batch b;
  std::vector<const font::GlyphImage*> contents, refs, targets;
  std::map<std::string, size_t> first_of_font;
  for (size_t i = 0; i < ids.size(); ++i) {
    const auto& id = ids[i];
    contents.push_back(&store_.get(manifest_.content_font_id, id.target_char));
    targets.push_back(&store_.get(id.font_id, id.target_char));
    for (char32_t c : id.ref_chars) refs.push_back(&store_.get(id.font_id, c));
    b.font_labels.push_back(font_label_of_.at(id.font_id));
    b.char_labels.push_back(char_label_of_.at(id.target_char));
    if (gen_cfg_.use_lsa && !first_of_font.count(id.font_id)) {
      first_of_font[id.font_id] = i;
      b.group_representative.push_back(i);
      std::vector<const font::GlyphImage*> aux;
      for (char32_t c : id.aux_chars) aux.push_back(&store_.get(id.font_id, c));
      b.rep_aux_refs.push_back(std::move(aux));
    }
  }
  b.tensors.content = font::batch_from_glyphs(contents);
  b.tensors.refs = font::batch_from_glyphs(refs);
  b.tensors.batch = B;
  b.tensors.k = opt_.k;
  b.targets = font::batch_from_glyphs(targets);
  return b;
}

double GanTrainer::step_discriminator() {
  Batch b = draw_batch();
  Tensor fake_value;
  {
    nn::NoGradGuard no_grad;
    fake_value = gen_->forward_train(b.tensors).fake->value;
  }
  auto real_out = (*disc_)(nn::make_constant(b.targets), b.font_labels, b.char_labels);
  auto fake_out = (*disc_)(nn::make_constant(fake_value), b.font_labels, b.char_labels);
  Var loss = hinge_d_loss(real_out.logits, fake_out.logits);
  const double v = loss->value[0];
  d_opt_->zero_grad();
  nn::backward(loss);
  d_opt_->step();
  return v;
}

Var GanTrainer::generator_objective(const Batch& b, StepLosses* losses) {
  auto fwd = gen_->forward_train(b.tensors);

  auto fake_out = (*disc_)(fwd.fake, b.font_labels, b.char_labels);
  std::vector<Var> real_features;
  {
    nn::NoGradGuard no_grad;  // real-pass features are constants
    auto real_out = (*disc_)(nn::make_constant(b.targets), b.font_labels, b.char_labels);
    real_features = std::move(real_out.features);
  }

  Var g_adv = hinge_g_loss(fake_out.logits);
  Var img = image_matching_loss(fwd.fake, nn::make_constant(b.targets));
  Var feat = feature_matching_loss(fake_out.features, real_features);
  Var total = nn::add(g_adv, nn::add(nn::mul_scalar(img, opt_.lambda_img),
                                     nn::mul_scalar(feat, opt_.lambda_feat)));

  Var cst;
  if (gen_cfg_.use_lsa && b.group_representative.size() >= 2) {
    std::vector<Var> group_terms;
    std::vector<Var> rep_anchor(b.group_representative.size());
    for (size_t g = 0; g < b.group_representative.size(); ++g) {
      rep_anchor[g] = fwd.stylized[b.group_representative[g]];
    }
    for (size_t g = 0; g < b.group_representative.size(); ++g) {
      Var aux_maps =
          gen_->encode_style(nn::make_constant(font::batch_from_glyphs(b.rep_aux_refs[g])));
      Var positive = gen_->stylize(nn::to_tokens(aux_maps));
      std::vector<Var> negatives;
      for (size_t o = 0; o < rep_anchor.size(); ++o) {
        if (o != g) negatives.push_back(rep_anchor[o]);
      }
      group_terms.push_back(style_contrastive_loss(rep_anchor[g], positive, negatives, opt_.tau));
    }
    cst = group_terms.front();
    for (size_t g = 1; g < group_terms.size(); ++g) cst = nn::add(cst, group_terms[g]);
    cst = nn::mul_scalar(cst, 1.0 / static_cast<double>(group_terms.size()));
    total = nn::add(total, nn::mul_scalar(cst, opt_.lambda_cst));
  }

  if (losses) {
    losses->g_adv = g_adv->value[0];
    losses->img = img->value[0];
    losses->feat = feat->value[0];
    losses->cst = cst ? cst->value[0] : 0.0;
  }
  return total;
}

void GanTrainer::step_generator(StepLosses& losses) {
  Batch b = draw_batch();
  Var total = generator_objective(b, &losses);
  if (!losses.finite()) return;  // caller halts; no parameter update

  g_opt_->zero_grad();
  nn::backward(total);
  g_opt_->step();
  // The generator objective backpropagates through D as a function; clear
  // those gradients so the next D step starts clean.
  d_opt_->zero_grad();
}

GanTrainer::StepLosses GanTrainer::step() {
  StepLosses losses;
  losses.d_adv = step_discriminator();
  step_generator(losses);
  ++steps_done_;
  return losses;
}

void GanTrainer::save_checkpoint() {
  VQF_REQUIRE(gen_->frontend_hash() == frontend_hash0_,
              "frozen content encoder or codebook drifted during training");
  gen::save_gan_checkpoint(out_dir_ / "gan.ckpt", *gen_, disc_.get(), steps_done_,
                           opt_.config_echo);
}

TrainResult GanTrainer::run() {
  TrainResult result;
  result.checkpoint = out_dir_ / "gan.ckpt";
  result.trace_csv = out_dir_ / "train_trace.csv";

  std::ofstream trace(result.trace_csv);
  trace << "step,adv_d,adv_g,img,feat,cst\n";

  bool wrote = false;
  for (int64_t it = 1; it <= opt_.iterations; ++it) {
    StepLosses losses = step();
    trace << it << "," << losses.d_adv << "," << losses.g_adv << "," << losses.img << ","
          << losses.feat << "," << losses.cst << "\n";
    if (!losses.finite()) {
      std::cerr << "train: loss diverged at step " << it << "; halting at last checkpoint\n";
      result.diverged = true;
      bool finite_params = true;
      for (const auto& p : gen_->trainable_parameters()) finite_params &= p->value.all_finite();
      for (const auto& p : disc_->parameters()) finite_params &= p->value.all_finite();
      if (finite_params) {
        save_checkpoint();
        wrote = true;
      }
      break;
    }
    if (it % opt_.checkpoint_every == 0) {
      save_checkpoint();
      wrote = true;
    }
  }
  if (!result.diverged) {
    save_checkpoint();
    wrote = true;
  }
  VQF_REQUIRE(wrote, "training diverged with no finite checkpoint to keep");
  result.steps_completed = steps_done_;
  result.frontend_hash = gen_->frontend_hash();
  return result;
}

}  // namespace vqfont::gan
