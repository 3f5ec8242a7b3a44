#include "vqfont/gan/losses.hpp"

namespace vqfont::gan {

using nn::Var;

Var hinge_d_loss(Var real_logits, Var fake_logits) {
  Var real_term = nn::mean_all(nn::relu(nn::add_scalar(nn::mul_scalar(real_logits, -1.0), 1.0)));
  Var fake_term = nn::mean_all(nn::relu(nn::add_scalar(fake_logits, 1.0)));
  return nn::add(std::move(real_term), std::move(fake_term));
}

Var hinge_g_loss(Var fake_logits) {
  return nn::mul_scalar(nn::mean_all(std::move(fake_logits)), -1.0);
}

Var image_matching_loss(Var generated, Var target) {
  return nn::l1_loss(std::move(generated), std::move(target));
}

Var feature_matching_loss(const std::vector<Var>& generated_features,
                          const std::vector<Var>& target_features) {
  VQF_REQUIRE(!generated_features.empty() &&
                  generated_features.size() == target_features.size(),
              "feature matching: layer count mismatch " << generated_features.size() << " vs "
                                                        << target_features.size());
  Var total;
  for (size_t l = 0; l < generated_features.size(); ++l) {
    Var term = nn::l1_loss(generated_features[l], target_features[l]);
    total = total ? nn::add(std::move(total), std::move(term)) : term;
  }
  return total;
}

namespace {
// Mean row-cosine similarity scaled by 1/tau.
Var codebook_similarity(Var a_normalized, Var b, double tau) {
  const int64_t n = b->value.dim(0);
  Var b_normalized = nn::row_l2_normalize(std::move(b));
  Var dots = nn::rows_dot(std::move(a_normalized), std::move(b_normalized));  // (N,1)
  return nn::mul_scalar(nn::sum_all(std::move(dots)), 1.0 / (static_cast<double>(n) * tau));
}
}  // namespace

Var style_contrastive_loss(Var anchor, Var positive, const std::vector<Var>& negatives,
                           double tau) {
  VQF_REQUIRE(!negatives.empty(), "style contrastive loss undefined without negatives");
  VQF_REQUIRE(anchor->value.same_shape(positive->value),
              "anchor/positive codebook shapes differ: " << anchor->value.shape_str() << " vs "
                                                         << positive->value.shape_str());
  VQF_REQUIRE(tau > 0.0, "temperature must be positive");

  Var anchor_normalized = nn::row_l2_normalize(anchor);
  Var s_pos = codebook_similarity(anchor_normalized, positive, tau);
  std::vector<Var> scores{s_pos};
  for (const auto& neg : negatives) {
    VQF_REQUIRE(neg->value.same_shape(anchor->value), "negative codebook shape mismatch");
    scores.push_back(codebook_similarity(anchor_normalized, neg, tau));
  }
  // -log( exp(s+) / sum(exp(s)) ) = logsumexp(s) - s+
  return nn::sub(nn::logsumexp_vec(nn::stack_scalars(scores)), s_pos);
}

}  // namespace vqfont::gan
