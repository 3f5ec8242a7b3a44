#include "vqfont/nn/modules.hpp"

#include <cmath>

namespace vqfont::nn {

std::vector<std::pair<std::string, Var>> Module::named_parameters() const {
  std::vector<std::pair<std::string, Var>> out;
  collect("", out);
  return out;
}

std::vector<Var> Module::parameters() const {
  std::vector<Var> out;
  for (auto& [name, p] : named_parameters()) out.push_back(p);
  return out;
}

void Module::freeze() {
  for (auto& p : parameters()) p->requires_grad = false;
}

uint64_t Module::parameters_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (auto& [name, p] : named_parameters()) {
    h = fnv1a64(name, h);
    h = p->value.bytes_hash(h);
  }
  return h;
}

int64_t Module::parameter_count() const {
  int64_t n = 0;
  for (auto& [name, p] : named_parameters()) n += p->value.numel();
  return n;
}

Var Module::add_param(const std::string& name, Tensor init) {
  auto p = make_param(std::move(init), name);
  own_.emplace_back(name, p);
  return p;
}

void Module::add_child(const std::string& name, Module* m) {
  children_.emplace_back(name, m);
}

void Module::collect(const std::string& prefix,
                     std::vector<std::pair<std::string, Var>>& out) const {
  for (const auto& [name, p] : own_) out.emplace_back(prefix + name, p);
  for (const auto& [name, m] : children_) m->collect(prefix + name + ".", out);
}

Conv2d::Conv2d(Rng& rng, int64_t in_ch, int64_t out_ch, int kernel, int stride, int pad)
    : stride_(stride), pad_(pad) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(in_ch * kernel * kernel));
  w_ = add_param("weight", Tensor::randn(rng, {out_ch, in_ch, kernel, kernel}, stddev));
  b_ = add_param("bias", Tensor::zeros({out_ch}));
}

ConvTranspose2d::ConvTranspose2d(Rng& rng, int64_t in_ch, int64_t out_ch, int kernel, int stride,
                                 int pad, int out_pad)
    : stride_(stride), pad_(pad), out_pad_(out_pad) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(in_ch * kernel * kernel));
  w_ = add_param("weight", Tensor::randn(rng, {in_ch, out_ch, kernel, kernel}, stddev));
  b_ = add_param("bias", Tensor::zeros({out_ch}));
}

Linear::Linear(Rng& rng, int64_t in_dim, int64_t out_dim) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(in_dim + out_dim));
  w_ = add_param("weight", Tensor::randn(rng, {out_dim, in_dim}, stddev));
  b_ = add_param("bias", Tensor::zeros({out_dim}));
}

LayerNorm::LayerNorm(int64_t dim) {
  gain_ = add_param("gain", Tensor::full({dim}, 1.0));
  bias_ = add_param("bias", Tensor::zeros({dim}));
}

Embedding::Embedding(Rng& rng, int64_t count, int64_t dim, double stddev) {
  table_ = add_param("table", Tensor::randn(rng, {count, dim}, stddev));
}

}  // namespace vqfont::nn
