#include "vqfont/nn/optim.hpp"

#include <cmath>

namespace vqfont::nn {

Adam::Adam(std::vector<Var> params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (auto& p : params) {
    VQF_REQUIRE(p->requires_grad, "Adam over a frozen/constant parameter '" << p->name << "'");
    slots_.push_back({p, Tensor::zeros(p->value.shape()), Tensor::zeros(p->value.shape())});
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& s : slots_) {
    if (!s.param->grad.defined()) continue;
    const double* g = s.param->grad.data();
    double* m = s.m.data();
    double* v = s.v.data();
    double* w = s.param->value.data();
    const int64_t n = s.param->value.numel();
    for (int64_t i = 0; i < n; ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::zero_grad() {
  for (auto& s : slots_) {
    if (s.param->grad.defined()) s.param->grad.zero();
  }
}

}  // namespace vqfont::nn
