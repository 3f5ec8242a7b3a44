#pragma once

#include <vector>

#include "vqfont/nn/autograd.hpp"

namespace vqfont::nn {

class Adam {
 public:
  Adam(std::vector<Var> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step();
  void zero_grad();
  double lr() const { return lr_; }

 private:
  struct Slot {
    Var param;
    Tensor m, v;
  };
  std::vector<Slot> slots_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

}  // namespace vqfont::nn
