#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <vector>

#include "vqfont/nn/ops.hpp"

namespace vqfont::testutil {

// Central-difference gradient of a scalar-valued graph builder with respect
// to one leaf, compared against the recorded analytic gradient. The builder
// must rebuild the full forward pass from current leaf values on every call.
struct GradCheckResult {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int64_t checked = 0;
  nn::Tensor analytic;  // the recorded gradient the FD probes were compared to
};

inline GradCheckResult grad_check(const std::function<nn::Var()>& build, const nn::Var& leaf,
                                  double h = 1e-5, int64_t max_entries = 64) {
  using nn::backward;

  if (leaf->grad.defined()) leaf->grad.zero();
  nn::Var loss = build();
  backward(loss);
  nn::Tensor analytic =
      leaf->grad.defined() ? leaf->grad.clone() : nn::Tensor::zeros(leaf->value.shape());

  GradCheckResult res;
  res.analytic = analytic;
  const int64_t n = leaf->value.numel();
  const int64_t step = std::max<int64_t>(1, n / max_entries);
  for (int64_t i = 0; i < n; i += step) {
    const double orig = leaf->value[i];
    leaf->value[i] = orig + h;
    const double fp = build()->value[0];
    leaf->value[i] = orig - h;
    const double fm = build()->value[0];
    leaf->value[i] = orig;
    const double fd = (fp - fm) / (2.0 * h);
    const double a = analytic[i];
    const double abs_err = std::abs(fd - a);
    const double rel = abs_err / std::max({std::abs(fd), std::abs(a), 1e-8});
    res.max_abs_err = std::max(res.max_abs_err, abs_err);
    res.max_rel_err = std::max(res.max_rel_err, rel);
    ++res.checked;
  }
  if (leaf->grad.defined()) leaf->grad.zero();
  return res;
}

// TrueType font files on this machine that cover basic Latin letters and
// digits, sorted for determinism. Empty if the host has none.
std::vector<std::filesystem::path> find_system_fonts(size_t max_count = 16);

}  // namespace vqfont::testutil
