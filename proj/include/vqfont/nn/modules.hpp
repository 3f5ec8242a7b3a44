#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vqfont/nn/ops.hpp"

namespace vqfont::nn {

// Base for anything owning trainable parameters. Children register
// themselves so named_parameters() yields dotted paths for checkpoints.
class Module {
 public:
  virtual ~Module() = default;
  Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;

  std::vector<std::pair<std::string, Var>> named_parameters() const;
  std::vector<Var> parameters() const;

  // Marks every parameter as a constant for the tape; optimizer construction
  // from parameters() of a frozen module is rejected.
  void freeze();
  uint64_t parameters_hash() const;
  int64_t parameter_count() const;

 protected:
  Var add_param(const std::string& name, Tensor init);
  void add_child(const std::string& name, Module* m);

 private:
  void collect(const std::string& prefix,
               std::vector<std::pair<std::string, Var>>& out) const;

  std::vector<std::pair<std::string, Var>> own_;
  std::vector<std::pair<std::string, Module*>> children_;
};

class Conv2d : public Module {
 public:
  Conv2d(Rng& rng, int64_t in_ch, int64_t out_ch, int kernel, int stride, int pad);
  Var operator()(Var x) const { return conv2d(std::move(x), w_, b_, stride_, pad_); }

 private:
  Var w_, b_;
  int stride_, pad_;
};

class ConvTranspose2d : public Module {
 public:
  ConvTranspose2d(Rng& rng, int64_t in_ch, int64_t out_ch, int kernel, int stride, int pad,
                  int out_pad = 0);
  Var operator()(Var x) const {
    return conv_transpose2d(std::move(x), w_, b_, stride_, pad_, out_pad_);
  }

 private:
  Var w_, b_;
  int stride_, pad_, out_pad_;
};

class Linear : public Module {
 public:
  Linear(Rng& rng, int64_t in_dim, int64_t out_dim);
  Var operator()(Var x) const { return linear(std::move(x), w_, b_); }

 private:
  Var w_, b_;
};

class LayerNorm : public Module {
 public:
  explicit LayerNorm(int64_t dim);
  Var operator()(Var x) const { return layer_norm_rows(std::move(x), gain_, bias_); }

 private:
  Var gain_, bias_;
};

class Embedding : public Module {
 public:
  Embedding(Rng& rng, int64_t count, int64_t dim, double stddev = 0.02);
  Var operator()(std::vector<int32_t> idx) const { return gather_rows(table_, std::move(idx)); }
  Var table() const { return table_; }
  int64_t count() const { return table_->value.dim(0); }

 private:
  Var table_;
};

}  // namespace vqfont::nn
