#pragma once

#include "vqfont/nn/ops.hpp"

namespace vqfont::gan {

// Hinge GAN objectives over per-sample logits (B,1):
//   d_loss = E[max(0, 1 - real)] + E[max(0, 1 + fake)]
//   g_loss = -E[fake]
nn::Var hinge_d_loss(nn::Var real_logits, nn::Var fake_logits);
nn::Var hinge_g_loss(nn::Var fake_logits);

// Pixel matching: mean absolute difference.
nn::Var image_matching_loss(nn::Var generated, nn::Var target);
// Feature matching: sum over layers of mean absolute feature differences.
// Pass the real-pass features detached so the discriminator is not trained
// through this term.
nn::Var feature_matching_loss(const std::vector<nn::Var>& generated_features,
                              const std::vector<nn::Var>& target_features);

// InfoNCE over stylized codebooks. Each codebook is (N,d); similarity of two
// codebooks is the mean cosine of row pairs divided by tau. Requires at
// least one negative.
nn::Var style_contrastive_loss(nn::Var anchor, nn::Var positive,
                               const std::vector<nn::Var>& negatives, double tau);

}  // namespace vqfont::gan
