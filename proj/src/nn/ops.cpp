#include "vqfont/nn/ops.hpp"

#include <Eigen/Core>

#include <cmath>

namespace vqfont::nn {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using CMatMap = Eigen::Map<const Mat>;

MatMap as_mat(Tensor& t, int64_t rows, int64_t cols) {
  return MatMap(t.data(), rows, cols);
}
CMatMap as_mat(const Tensor& t, int64_t rows, int64_t cols) {
  return CMatMap(t.data(), rows, cols);
}

bool any_requires_grad(const std::vector<Var>& parents) {
  for (const auto& p : parents) {
    if (p && p->requires_grad) return true;
  }
  return false;
}

// Output columns whose input x stays inside [0, W): ox in [lo, hi).
inline void valid_ox_range(int kx, int stride, int pad, int64_t W, int wo, int* lo, int* hi) {
  int l = 0;
  while (l < wo && l * stride + kx - pad < 0) ++l;
  int h = wo;
  while (h > l && (h - 1) * stride + kx - pad >= W) --h;
  *lo = l;
  *hi = h;
}

// im2col for x:(B,C,H,W) -> col:(C*kh*kw, B*Ho*Wo), row-major.
void im2col(const Tensor& x, int kh, int kw, int stride, int pad, int ho, int wo, Tensor& col) {
  const int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t cols = B * ho * wo;
  const double* xp = x.data();
  double* cp = col.data();
  for (int64_t c = 0; c < C; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        double* row = cp + ((c * kh + ky) * kw + kx) * cols;
        int lo, hi;
        valid_ox_range(kx, stride, pad, W, wo, &lo, &hi);
        for (int64_t b = 0; b < B; ++b) {
          const double* xb = xp + (b * C + c) * H * W;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride + ky - pad;
            double* dst = row + (b * ho + oy) * wo;
            if (iy < 0 || iy >= H) {
              std::fill(dst, dst + wo, 0.0);
              continue;
            }
            const double* src = xb + iy * W + (int64_t{lo} * stride + kx - pad);
            std::fill(dst, dst + lo, 0.0);
            if (stride == 1) {
              std::copy(src, src + (hi - lo), dst + lo);
            } else {
              for (int ox = lo; ox < hi; ++ox, src += stride) dst[ox] = *src;
            }
            std::fill(dst + hi, dst + wo, 0.0);
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter col:(C*kh*kw, B*Ho*Wo) back into dx:(B,C,H,W).
void col2im_accum(const Tensor& col, int kh, int kw, int stride, int pad, int ho, int wo,
                  Tensor& dx) {
  const int64_t B = dx.dim(0), C = dx.dim(1), H = dx.dim(2), W = dx.dim(3);
  const int64_t cols = B * ho * wo;
  const double* cp = col.data();
  double* xp = dx.data();
  for (int64_t c = 0; c < C; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const double* row = cp + ((c * kh + ky) * kw + kx) * cols;
        int lo, hi;
        valid_ox_range(kx, stride, pad, W, wo, &lo, &hi);
        for (int64_t b = 0; b < B; ++b) {
          double* xb = xp + (b * C + c) * H * W;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= H) continue;
            const double* src = row + (b * ho + oy) * wo;
            double* dst = xb + iy * W + (int64_t{lo} * stride + kx - pad);
            if (stride == 1) {
              for (int ox = lo; ox < hi; ++ox) dst[ox - lo] += src[ox];
            } else {
              for (int ox = lo; ox < hi; ++ox, dst += stride) *dst += src[ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (grad_enabled() && any_requires_grad(parents)) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
  }
  return n;
}

Var add(Var a, Var b) {
  VQF_REQUIRE(a->value.same_shape(b->value),
              "add: shape mismatch " << a->value.shape_str() << " vs " << b->value.shape_str());
  Tensor out = a->value.clone();
  out.add_(b->value);
  return make_op(std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->accumulate_grad(n.grad);
    if (n.parents[1]->requires_grad) n.parents[1]->accumulate_grad(n.grad);
  });
}

Var sub(Var a, Var b) {
  VQF_REQUIRE(a->value.same_shape(b->value),
              "sub: shape mismatch " << a->value.shape_str() << " vs " << b->value.shape_str());
  Tensor out = a->value.clone();
  out.add_scaled_(b->value, -1.0);
  return make_op(std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->accumulate_grad(n.grad);
    if (n.parents[1]->requires_grad) n.parents[1]->ensure_grad().add_scaled_(n.grad, -1.0);
  });
}

Var mul(Var a, Var b) {
  VQF_REQUIRE(a->value.same_shape(b->value),
              "mul: shape mismatch " << a->value.shape_str() << " vs " << b->value.shape_str());
  Tensor out(a->value.shape());
  const double* ap = a->value.data();
  const double* bp = b->value.data();
  double* op = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) op[i] = ap[i] * bp[i];
  return make_op(std::move(out), {a, b}, [](Node& n) {
    const int64_t m = n.value.numel();
    const double* g = n.grad.data();
    if (n.parents[0]->requires_grad) {
      double* da = n.parents[0]->ensure_grad().data();
      const double* bv = n.parents[1]->value.data();
      for (int64_t i = 0; i < m; ++i) da[i] += g[i] * bv[i];
    }
    if (n.parents[1]->requires_grad) {
      double* db = n.parents[1]->ensure_grad().data();
      const double* av = n.parents[0]->value.data();
      for (int64_t i = 0; i < m; ++i) db[i] += g[i] * av[i];
    }
  });
}

Var add_scalar(Var a, double s) {
  Tensor out = a->value.clone();
  double* p = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) p[i] += s;
  return make_op(std::move(out), {a}, [](Node& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->accumulate_grad(n.grad);
  });
}

Var mul_scalar(Var a, double s) {
  Tensor out = a->value.clone();
  double* p = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) p[i] *= s;
  return make_op(std::move(out), {a}, [s](Node& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->ensure_grad().add_scaled_(n.grad, s);
  });
}

Var relu(Var a) {
  Tensor out = a->value.clone();
  double* p = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
  return make_op(std::move(out), {a}, [](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    const double* x = n.parents[0]->value.data();
    const double* g = n.grad.data();
    double* dx = n.parents[0]->ensure_grad().data();
    for (int64_t i = 0; i < n.value.numel(); ++i) {
      if (x[i] > 0.0) dx[i] += g[i];
    }
  });
}

Var leaky_relu(Var a, double slope) {
  Tensor out = a->value.clone();
  double* p = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) {
    if (p[i] < 0.0) p[i] *= slope;
  }
  return make_op(std::move(out), {a}, [slope](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    const double* x = n.parents[0]->value.data();
    const double* g = n.grad.data();
    double* dx = n.parents[0]->ensure_grad().data();
    for (int64_t i = 0; i < n.value.numel(); ++i) {
      dx[i] += x[i] > 0.0 ? g[i] : slope * g[i];
    }
  });
}

Var tanh_op(Var a) {
  Tensor out = a->value.clone();
  double* p = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) p[i] = std::tanh(p[i]);
  return make_op(std::move(out), {a}, [](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    const double* y = n.value.data();
    const double* g = n.grad.data();
    double* dx = n.parents[0]->ensure_grad().data();
    for (int64_t i = 0; i < n.value.numel(); ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var sum_all(Var a) {
  double s = 0.0;
  const double* p = a->value.data();
  for (int64_t i = 0; i < a->value.numel(); ++i) s += p[i];
  return make_op(Tensor::from({s}, {1}), {a}, [](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    n.parents[0]->ensure_grad().add_scaled_(Tensor::full(n.parents[0]->value.shape(), 1.0),
                                            n.grad[0]);
  });
}

Var mean_all(Var a) {
  const double inv = 1.0 / static_cast<double>(a->value.numel());
  return mul_scalar(sum_all(a), inv);
}

Var mse_loss(Var a, Var b) {
  VQF_REQUIRE(a->value.same_shape(b->value), "mse_loss: shape mismatch "
              << a->value.shape_str() << " vs " << b->value.shape_str());
  const int64_t m = a->value.numel();
  const double* ap = a->value.data();
  const double* bp = b->value.data();
  double s = 0.0;
  for (int64_t i = 0; i < m; ++i) {
    const double d = ap[i] - bp[i];
    s += d * d;
  }
  s /= static_cast<double>(m);
  return make_op(Tensor::from({s}, {1}), {a, b}, [m](Node& n) {
    const double g = n.grad[0] * 2.0 / static_cast<double>(m);
    const double* ap = n.parents[0]->value.data();
    const double* bp = n.parents[1]->value.data();
    if (n.parents[0]->requires_grad) {
      double* da = n.parents[0]->ensure_grad().data();
      for (int64_t i = 0; i < m; ++i) da[i] += g * (ap[i] - bp[i]);
    }
    if (n.parents[1]->requires_grad) {
      double* db = n.parents[1]->ensure_grad().data();
      for (int64_t i = 0; i < m; ++i) db[i] -= g * (ap[i] - bp[i]);
    }
  });
}

Var l1_loss(Var a, Var b) {
  VQF_REQUIRE(a->value.same_shape(b->value), "l1_loss: shape mismatch "
              << a->value.shape_str() << " vs " << b->value.shape_str());
  const int64_t m = a->value.numel();
  const double* ap = a->value.data();
  const double* bp = b->value.data();
  double s = 0.0;
  for (int64_t i = 0; i < m; ++i) s += std::abs(ap[i] - bp[i]);
  s /= static_cast<double>(m);
  return make_op(Tensor::from({s}, {1}), {a, b}, [m](Node& n) {
    const double g = n.grad[0] / static_cast<double>(m);
    const double* ap = n.parents[0]->value.data();
    const double* bp = n.parents[1]->value.data();
    if (n.parents[0]->requires_grad) {
      double* da = n.parents[0]->ensure_grad().data();
      for (int64_t i = 0; i < m; ++i) {
        const double d = ap[i] - bp[i];
        da[i] += d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
      }
    }
    if (n.parents[1]->requires_grad) {
      double* db = n.parents[1]->ensure_grad().data();
      for (int64_t i = 0; i < m; ++i) {
        const double d = ap[i] - bp[i];
        db[i] -= d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
      }
    }
  });
}

Var matmul(Var a, Var b) {
  VQF_REQUIRE(a->value.ndim() == 2 && b->value.ndim() == 2 && a->value.dim(1) == b->value.dim(0),
              "matmul: bad shapes " << a->value.shape_str() << " x " << b->value.shape_str());
  const int64_t n = a->value.dim(0), k = a->value.dim(1), m = b->value.dim(1);
  Tensor out = Tensor::uninit({n, m});
  as_mat(out, n, m).noalias() = as_mat(a->value, n, k) * as_mat(b->value, k, m);
  return make_op(std::move(out), {a, b}, [n, k, m](Node& nd) {
    CMatMap g(nd.grad.data(), n, m);
    if (nd.parents[0]->requires_grad) {
      MatMap da(nd.parents[0]->ensure_grad().data(), n, k);
      da.noalias() += g * as_mat(nd.parents[1]->value, k, m).transpose();
    }
    if (nd.parents[1]->requires_grad) {
      MatMap db(nd.parents[1]->ensure_grad().data(), k, m);
      db.noalias() += as_mat(nd.parents[0]->value, n, k).transpose() * g;
    }
  });
}

Var matmul_nt(Var a, Var b) {
  VQF_REQUIRE(a->value.ndim() == 2 && b->value.ndim() == 2 && a->value.dim(1) == b->value.dim(1),
              "matmul_nt: bad shapes " << a->value.shape_str() << " x " << b->value.shape_str());
  const int64_t n = a->value.dim(0), k = a->value.dim(1), m = b->value.dim(0);
  Tensor out = Tensor::uninit({n, m});
  as_mat(out, n, m).noalias() = as_mat(a->value, n, k) * as_mat(b->value, m, k).transpose();
  return make_op(std::move(out), {a, b}, [n, k, m](Node& nd) {
    CMatMap g(nd.grad.data(), n, m);
    if (nd.parents[0]->requires_grad) {
      MatMap da(nd.parents[0]->ensure_grad().data(), n, k);
      da.noalias() += g * as_mat(nd.parents[1]->value, m, k);
    }
    if (nd.parents[1]->requires_grad) {
      MatMap db(nd.parents[1]->ensure_grad().data(), m, k);
      db.noalias() += g.transpose() * as_mat(nd.parents[0]->value, n, k);
    }
  });
}

Var linear(Var x, Var w, Var b) {
  VQF_REQUIRE(x->value.ndim() == 2 && w->value.ndim() == 2 && x->value.dim(1) == w->value.dim(1),
              "linear: bad shapes x" << x->value.shape_str() << " w" << w->value.shape_str());
  VQF_REQUIRE(b->value.numel() == w->value.dim(0), "linear: bias size mismatch");
  const int64_t n = x->value.dim(0), din = x->value.dim(1), dout = w->value.dim(0);
  Tensor out = Tensor::uninit({n, dout});
  as_mat(out, n, dout).noalias() =
      as_mat(x->value, n, din) * as_mat(w->value, dout, din).transpose();
  {
    double* op = out.data();
    const double* bp = b->value.data();
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < dout; ++j) op[i * dout + j] += bp[j];
    }
  }
  return make_op(std::move(out), {x, w, b}, [n, din, dout](Node& nd) {
    CMatMap g(nd.grad.data(), n, dout);
    if (nd.parents[0]->requires_grad) {
      MatMap dx(nd.parents[0]->ensure_grad().data(), n, din);
      dx.noalias() += g * as_mat(nd.parents[1]->value, dout, din);
    }
    if (nd.parents[1]->requires_grad) {
      MatMap dw(nd.parents[1]->ensure_grad().data(), dout, din);
      dw.noalias() += g.transpose() * as_mat(nd.parents[0]->value, n, din);
    }
    if (nd.parents[2]->requires_grad) {
      double* db = nd.parents[2]->ensure_grad().data();
      for (int64_t i = 0; i < n; ++i) {
        const double* gp = nd.grad.data() + i * dout;
        for (int64_t j = 0; j < dout; ++j) db[j] += gp[j];
      }
    }
  });
}

Var softmax_rows(Var x) {
  VQF_REQUIRE(x->value.ndim() == 2, "softmax_rows expects 2-D, got " << x->value.shape_str());
  const int64_t n = x->value.dim(0), m = x->value.dim(1);
  Tensor out = Tensor::uninit({n, m});
  const double* xp = x->value.data();
  double* op = out.data();
  for (int64_t i = 0; i < n; ++i) {
    const double* row = xp + i * m;
    double mx = row[0];
    for (int64_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    double* orow = op + i * m;
    for (int64_t j = 0; j < m; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    const double inv = 1.0 / sum;
    for (int64_t j = 0; j < m; ++j) orow[j] *= inv;
  }
  return make_op(std::move(out), {x}, [n, m](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    const double* y = nd.value.data();
    const double* g = nd.grad.data();
    double* dx = nd.parents[0]->ensure_grad().data();
    for (int64_t i = 0; i < n; ++i) {
      const double* yr = y + i * m;
      const double* gr = g + i * m;
      double dot = 0.0;
      for (int64_t j = 0; j < m; ++j) dot += yr[j] * gr[j];
      double* dr = dx + i * m;
      for (int64_t j = 0; j < m; ++j) dr[j] += yr[j] * (gr[j] - dot);
    }
  });
}

Var layer_norm_rows(Var x, Var gain, Var bias, double eps) {
  VQF_REQUIRE(x->value.ndim() == 2, "layer_norm_rows expects 2-D");
  const int64_t n = x->value.dim(0), d = x->value.dim(1);
  VQF_REQUIRE(gain->value.numel() == d && bias->value.numel() == d,
              "layer_norm_rows: gain/bias size mismatch");
  Tensor out = Tensor::uninit({n, d});
  Tensor xhat = Tensor::uninit({n, d});
  Tensor inv_std = Tensor::uninit({n});
  const double* xp = x->value.data();
  const double* gp = gain->value.data();
  const double* bp = bias->value.data();
  double* op = out.data();
  double* hp = xhat.data();
  for (int64_t i = 0; i < n; ++i) {
    const double* row = xp + i * d;
    double mean = 0.0;
    for (int64_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t j = 0; j < d; ++j) {
      const double c = row[j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double istd = 1.0 / std::sqrt(var + eps);
    inv_std[i] = istd;
    for (int64_t j = 0; j < d; ++j) {
      const double h = (row[j] - mean) * istd;
      hp[i * d + j] = h;
      op[i * d + j] = h * gp[j] + bp[j];
    }
  }
  return make_op(std::move(out), {x, gain, bias}, [n, d, xhat, inv_std](Node& nd) {
    const double* g = nd.grad.data();
    const double* hp = xhat.data();
    const double* gainp = nd.parents[1]->value.data();
    if (nd.parents[0]->requires_grad) {
      double* dx = nd.parents[0]->ensure_grad().data();
      for (int64_t i = 0; i < n; ++i) {
        const double* gr = g + i * d;
        const double* hr = hp + i * d;
        double sum_dh = 0.0, sum_dh_h = 0.0;
        for (int64_t j = 0; j < d; ++j) {
          const double dh = gr[j] * gainp[j];
          sum_dh += dh;
          sum_dh_h += dh * hr[j];
        }
        const double istd = inv_std[i];
        const double invd = 1.0 / static_cast<double>(d);
        double* dr = dx + i * d;
        for (int64_t j = 0; j < d; ++j) {
          const double dh = gr[j] * gainp[j];
          dr[j] += istd * (dh - invd * sum_dh - hr[j] * invd * sum_dh_h);
        }
      }
    }
    if (nd.parents[1]->requires_grad) {
      double* dg = nd.parents[1]->ensure_grad().data();
      for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < d; ++j) dg[j] += g[i * d + j] * hp[i * d + j];
      }
    }
    if (nd.parents[2]->requires_grad) {
      double* db = nd.parents[2]->ensure_grad().data();
      for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < d; ++j) db[j] += g[i * d + j];
      }
    }
  });
}

Var row_l2_normalize(Var x, double eps) {
  VQF_REQUIRE(x->value.ndim() == 2, "row_l2_normalize expects 2-D");
  const int64_t n = x->value.dim(0), d = x->value.dim(1);
  Tensor out = Tensor::uninit({n, d});
  Tensor norms = Tensor::uninit({n});
  const double* xp = x->value.data();
  double* op = out.data();
  for (int64_t i = 0; i < n; ++i) {
    const double* row = xp + i * d;
    double ss = eps;
    for (int64_t j = 0; j < d; ++j) ss += row[j] * row[j];
    const double nm = std::sqrt(ss);
    norms[i] = nm;
    const double inv = 1.0 / nm;
    for (int64_t j = 0; j < d; ++j) op[i * d + j] = row[j] * inv;
  }
  return make_op(std::move(out), {x}, [n, d, norms](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    const double* y = nd.value.data();
    const double* g = nd.grad.data();
    double* dx = nd.parents[0]->ensure_grad().data();
    for (int64_t i = 0; i < n; ++i) {
      const double* yr = y + i * d;
      const double* gr = g + i * d;
      double dot = 0.0;
      for (int64_t j = 0; j < d; ++j) dot += yr[j] * gr[j];
      const double inv = 1.0 / norms[i];
      double* dr = dx + i * d;
      for (int64_t j = 0; j < d; ++j) dr[j] += (gr[j] - yr[j] * dot) * inv;
    }
  });
}

Var slice_cols(Var x, int64_t c0, int64_t c1) {
  VQF_REQUIRE(x->value.ndim() == 2 && c0 >= 0 && c1 <= x->value.dim(1) && c0 < c1,
              "slice_cols: bad range [" << c0 << "," << c1 << ") on " << x->value.shape_str());
  const int64_t n = x->value.dim(0), m = x->value.dim(1), w = c1 - c0;
  Tensor out = Tensor::uninit({n, w});
  const double* xp = x->value.data();
  double* op = out.data();
  for (int64_t i = 0; i < n; ++i) {
    std::copy(xp + i * m + c0, xp + i * m + c1, op + i * w);
  }
  return make_op(std::move(out), {x}, [n, m, c0, w](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    double* dx = nd.parents[0]->ensure_grad().data();
    const double* g = nd.grad.data();
    for (int64_t i = 0; i < n; ++i) {
      double* dst = dx + i * m + c0;
      const double* src = g + i * w;
      for (int64_t j = 0; j < w; ++j) dst[j] += src[j];
    }
  });
}

Var concat_cols(const std::vector<Var>& xs) {
  VQF_REQUIRE(!xs.empty(), "concat_cols: empty input");
  const int64_t n = xs[0]->value.dim(0);
  int64_t total = 0;
  for (const auto& x : xs) {
    VQF_REQUIRE(x->value.ndim() == 2 && x->value.dim(0) == n, "concat_cols: row mismatch");
    total += x->value.dim(1);
  }
  Tensor out = Tensor::uninit({n, total});
  double* op = out.data();
  int64_t off = 0;
  std::vector<int64_t> widths;
  for (const auto& x : xs) {
    const int64_t w = x->value.dim(1);
    widths.push_back(w);
    const double* xp = x->value.data();
    for (int64_t i = 0; i < n; ++i) {
      std::copy(xp + i * w, xp + (i + 1) * w, op + i * total + off);
    }
    off += w;
  }
  return make_op(std::move(out), xs, [n, total, widths](Node& nd) {
    const double* g = nd.grad.data();
    int64_t off = 0;
    for (size_t k = 0; k < nd.parents.size(); ++k) {
      const int64_t w = widths[k];
      if (nd.parents[k]->requires_grad) {
        double* dx = nd.parents[k]->ensure_grad().data();
        for (int64_t i = 0; i < n; ++i) {
          const double* src = g + i * total + off;
          double* dst = dx + i * w;
          for (int64_t j = 0; j < w; ++j) dst[j] += src[j];
        }
      }
      off += w;
    }
  });
}

Var gather_rows(Var m, std::vector<int32_t> idx) {
  VQF_REQUIRE(m->value.ndim() == 2, "gather_rows expects 2-D");
  const int64_t rows = m->value.dim(0), d = m->value.dim(1);
  const int64_t n = static_cast<int64_t>(idx.size());
  Tensor out = Tensor::uninit({n, d});
  const double* mp = m->value.data();
  double* op = out.data();
  for (int64_t i = 0; i < n; ++i) {
    const int32_t r = idx[static_cast<size_t>(i)];
    VQF_REQUIRE(r >= 0 && r < rows, "gather_rows: index " << r << " out of range [0," << rows << ")");
    std::copy(mp + r * d, mp + (r + 1) * d, op + i * d);
  }
  return make_op(std::move(out), {m}, [idx = std::move(idx), d](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    double* dm = nd.parents[0]->ensure_grad().data();
    const double* g = nd.grad.data();
    for (size_t i = 0; i < idx.size(); ++i) {
      double* dst = dm + static_cast<int64_t>(idx[i]) * d;
      const double* src = g + static_cast<int64_t>(i) * d;
      for (int64_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

Var rows_dot(Var a, Var b) {
  VQF_REQUIRE(a->value.same_shape(b->value) && a->value.ndim() == 2, "rows_dot: shape mismatch");
  const int64_t n = a->value.dim(0), m = a->value.dim(1);
  Tensor out = Tensor::uninit({n, 1});
  const double* ap = a->value.data();
  const double* bp = b->value.data();
  for (int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int64_t j = 0; j < m; ++j) s += ap[i * m + j] * bp[i * m + j];
    out[i] = s;
  }
  return make_op(std::move(out), {a, b}, [n, m](Node& nd) {
    const double* g = nd.grad.data();
    const double* ap = nd.parents[0]->value.data();
    const double* bp = nd.parents[1]->value.data();
    if (nd.parents[0]->requires_grad) {
      double* da = nd.parents[0]->ensure_grad().data();
      for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < m; ++j) da[i * m + j] += g[i] * bp[i * m + j];
      }
    }
    if (nd.parents[1]->requires_grad) {
      double* db = nd.parents[1]->ensure_grad().data();
      for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < m; ++j) db[i * m + j] += g[i] * ap[i * m + j];
      }
    }
  });
}

Var stack_scalars(const std::vector<Var>& xs) {
  VQF_REQUIRE(!xs.empty(), "stack_scalars: empty input");
  Tensor out = Tensor::uninit({static_cast<int64_t>(xs.size())});
  for (size_t i = 0; i < xs.size(); ++i) {
    VQF_REQUIRE(xs[i]->value.numel() == 1, "stack_scalars: non-scalar element");
    out[static_cast<int64_t>(i)] = xs[i]->value[0];
  }
  return make_op(std::move(out), xs, [](Node& nd) {
    for (size_t i = 0; i < nd.parents.size(); ++i) {
      if (nd.parents[i]->requires_grad) {
        nd.parents[i]->ensure_grad()[0] += nd.grad[static_cast<int64_t>(i)];
      }
    }
  });
}

Var logsumexp_vec(Var x) {
  VQF_REQUIRE(x->value.ndim() == 1, "logsumexp_vec expects 1-D");
  const int64_t n = x->value.dim(0);
  const double* p = x->value.data();
  double mx = p[0];
  for (int64_t i = 1; i < n; ++i) mx = std::max(mx, p[i]);
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) s += std::exp(p[i] - mx);
  const double lse = mx + std::log(s);
  return make_op(Tensor::from({lse}, {1}), {x}, [n, lse](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    const double g = nd.grad[0];
    const double* p = nd.parents[0]->value.data();
    double* dx = nd.parents[0]->ensure_grad().data();
    for (int64_t i = 0; i < n; ++i) dx[i] += g * std::exp(p[i] - lse);
  });
}

Var conv2d(Var x, Var w, Var b, int stride, int pad) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  VQF_REQUIRE(xv.ndim() == 4 && wv.ndim() == 4 && xv.dim(1) == wv.dim(1),
              "conv2d: bad shapes x" << xv.shape_str() << " w" << wv.shape_str());
  const int64_t B = xv.dim(0), Ci = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  const int64_t Co = wv.dim(0);
  const int kh = static_cast<int>(wv.dim(2)), kw = static_cast<int>(wv.dim(3));
  const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
  const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
  VQF_REQUIRE(Ho > 0 && Wo > 0, "conv2d: non-positive output size");
  VQF_REQUIRE(b->value.numel() == Co, "conv2d: bias size mismatch");

  const int64_t K = Ci * kh * kw;
  const int64_t cols = B * Ho * Wo;
  Tensor col = Tensor::uninit({K, cols});
  im2col(xv, kh, kw, stride, pad, static_cast<int>(Ho), static_cast<int>(Wo), col);

  Tensor out = Tensor::uninit({B, Co, Ho, Wo});
  // One GEMM over the whole batch, then per-image block copy.
  Tensor prod = Tensor::uninit({Co, cols});
  as_mat(prod, Co, cols).noalias() = as_mat(wv, Co, K) * as_mat(col, K, cols);
  {
    const int64_t hw = Ho * Wo;
    const double* pp = prod.data();
    const double* bp = b->value.data();
    double* op = out.data();
    for (int64_t bi = 0; bi < B; ++bi) {
      for (int64_t co = 0; co < Co; ++co) {
        const double* src = pp + co * cols + bi * hw;
        double* dst = op + (bi * Co + co) * hw;
        const double bias = bp[co];
        for (int64_t i = 0; i < hw; ++i) dst[i] = src[i] + bias;
      }
    }
  }

  return make_op(std::move(out), {x, w, b},
                 [B, Ci, H, W, Co, kh, kw, Ho, Wo, stride, pad, K, cols, col](Node& nd) {
    const int64_t hw = Ho * Wo;
    Tensor gmat = Tensor::uninit({Co, cols});
    {
      const double* gp = nd.grad.data();
      double* mp = gmat.data();
      for (int64_t bi = 0; bi < B; ++bi) {
        for (int64_t co = 0; co < Co; ++co) {
          std::copy(gp + (bi * Co + co) * hw, gp + (bi * Co + co + 1) * hw,
                    mp + co * cols + bi * hw);
        }
      }
    }
    if (nd.parents[1]->requires_grad) {
      MatMap dw(nd.parents[1]->ensure_grad().data(), Co, K);
      dw.noalias() += as_mat(gmat, Co, cols) * as_mat(col, K, cols).transpose();
    }
    if (nd.parents[2]->requires_grad) {
      double* db = nd.parents[2]->ensure_grad().data();
      const double* mp = gmat.data();
      for (int64_t co = 0; co < Co; ++co) {
        double s = 0.0;
        const double* row = mp + co * cols;
        for (int64_t i = 0; i < cols; ++i) s += row[i];
        db[co] += s;
      }
    }
    if (nd.parents[0]->requires_grad) {
      Tensor dcol = Tensor::uninit({K, cols});
      as_mat(dcol, K, cols).noalias() =
          as_mat(nd.parents[1]->value, Co, K).transpose() * as_mat(gmat, Co, cols);
      col2im_accum(dcol, kh, kw, stride, pad, static_cast<int>(Ho), static_cast<int>(Wo),
                   nd.parents[0]->ensure_grad());
    }
  });
}

Var conv_transpose2d(Var x, Var w, Var b, int stride, int pad, int out_pad) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  VQF_REQUIRE(xv.ndim() == 4 && wv.ndim() == 4 && xv.dim(1) == wv.dim(0),
              "conv_transpose2d: bad shapes x" << xv.shape_str() << " w" << wv.shape_str());
  const int64_t B = xv.dim(0), Ci = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  const int64_t Co = wv.dim(1);
  const int kh = static_cast<int>(wv.dim(2)), kw = static_cast<int>(wv.dim(3));
  const int64_t Ho = (H - 1) * stride - 2 * pad + kh + out_pad;
  const int64_t Wo = (W - 1) * stride - 2 * pad + kw + out_pad;
  VQF_REQUIRE(Ho > 0 && Wo > 0, "conv_transpose2d: non-positive output size");
  VQF_REQUIRE(b->value.numel() == Co, "conv_transpose2d: bias size mismatch");

  const int64_t K = Co * kh * kw;
  const int64_t hw = H * W;
  const int64_t cols = B * hw;

  // x rearranged to (Ci, B*H*W).
  Tensor xmat = Tensor::uninit({Ci, cols});
  {
    const double* xp = xv.data();
    double* mp = xmat.data();
    for (int64_t bi = 0; bi < B; ++bi) {
      for (int64_t ci = 0; ci < Ci; ++ci) {
        std::copy(xp + (bi * Ci + ci) * hw, xp + (bi * Ci + ci + 1) * hw,
                  mp + ci * cols + bi * hw);
      }
    }
  }
  Tensor colOut = Tensor::uninit({K, cols});
  as_mat(colOut, K, cols).noalias() =
      as_mat(wv, Ci, K).transpose() * as_mat(xmat, Ci, cols);

  Tensor out({B, Co, Ho, Wo});
  {
    // Scatter the output-side column matrix, as the transpose of im2col on
    // the output grid: position (iy,ix) with kernel (ky,kx) lands at
    // (iy*stride - pad + ky, ix*stride - pad + kx).
    double* op = out.data();
    const double* cp = colOut.data();
    for (int64_t co = 0; co < Co; ++co) {
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const double* row = cp + ((co * kh + ky) * kw + kx) * cols;
          for (int64_t bi = 0; bi < B; ++bi) {
            double* ob = op + (bi * Co + co) * Ho * Wo;
            for (int64_t iy = 0; iy < H; ++iy) {
              const int64_t oy = iy * stride - pad + ky;
              if (oy < 0 || oy >= Ho) continue;
              const double* src = row + bi * hw + iy * W;
              double* dst = ob + oy * Wo;
              for (int64_t ix = 0; ix < W; ++ix) {
                const int64_t ox = ix * stride - pad + kx;
                if (ox >= 0 && ox < Wo) dst[ox] += src[ix];
              }
            }
          }
        }
      }
    }
    const double* bp = b->value.data();
    for (int64_t bi = 0; bi < B; ++bi) {
      for (int64_t co = 0; co < Co; ++co) {
        double* dst = op + (bi * Co + co) * Ho * Wo;
        const double bias = bp[co];
        for (int64_t i = 0; i < Ho * Wo; ++i) dst[i] += bias;
      }
    }
  }

  return make_op(std::move(out), {x, w, b},
                 [B, Ci, H, W, Co, kh, kw, Ho, Wo, stride, pad, K, cols, hw, xmat](Node& nd) {
    // im2col of the output gradient over the conv geometry that convT inverts.
    Tensor gcol = Tensor::uninit({K, cols});
    im2col(nd.grad, kh, kw, stride, pad, static_cast<int>(H), static_cast<int>(W), gcol);
    if (nd.parents[0]->requires_grad) {
      Tensor dxmat = Tensor::uninit({Ci, cols});
      as_mat(dxmat, Ci, cols).noalias() =
          as_mat(nd.parents[1]->value, Ci, K) * as_mat(gcol, K, cols);
      double* dxp = nd.parents[0]->ensure_grad().data();
      const double* mp = dxmat.data();
      for (int64_t bi = 0; bi < B; ++bi) {
        for (int64_t ci = 0; ci < Ci; ++ci) {
          const double* src = mp + ci * cols + bi * hw;
          double* dst = dxp + (bi * Ci + ci) * hw;
          for (int64_t i = 0; i < hw; ++i) dst[i] += src[i];
        }
      }
    }
    if (nd.parents[1]->requires_grad) {
      MatMap dw(nd.parents[1]->ensure_grad().data(), Ci, K);
      dw.noalias() += as_mat(xmat, Ci, cols) * as_mat(gcol, K, cols).transpose();
    }
    if (nd.parents[2]->requires_grad) {
      double* db = nd.parents[2]->ensure_grad().data();
      const double* gp = nd.grad.data();
      for (int64_t bi = 0; bi < B; ++bi) {
        for (int64_t co = 0; co < Co; ++co) {
          double s = 0.0;
          const double* row = gp + (bi * Co + co) * Ho * Wo;
          for (int64_t i = 0; i < Ho * Wo; ++i) s += row[i];
          db[co] += s;
        }
      }
    }
  });
}

Var avg_pool2d(Var x) {
  const Tensor& xv = x->value;
  VQF_REQUIRE(xv.ndim() == 4 && xv.dim(2) % 2 == 0 && xv.dim(3) % 2 == 0,
              "avg_pool2d expects even spatial dims, got " << xv.shape_str());
  const int64_t B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  const int64_t Ho = H / 2, Wo = W / 2;
  Tensor out = Tensor::uninit({B, C, Ho, Wo});
  const double* xp = xv.data();
  double* op = out.data();
  for (int64_t bc = 0; bc < B * C; ++bc) {
    const double* src = xp + bc * H * W;
    double* dst = op + bc * Ho * Wo;
    for (int64_t oy = 0; oy < Ho; ++oy) {
      for (int64_t ox = 0; ox < Wo; ++ox) {
        const double* p = src + 2 * oy * W + 2 * ox;
        dst[oy * Wo + ox] = 0.25 * (p[0] + p[1] + p[W] + p[W + 1]);
      }
    }
  }
  return make_op(std::move(out), {x}, [B, C, H, W, Ho, Wo](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    double* dx = nd.parents[0]->ensure_grad().data();
    const double* g = nd.grad.data();
    for (int64_t bc = 0; bc < B * C; ++bc) {
      double* dst = dx + bc * H * W;
      const double* src = g + bc * Ho * Wo;
      for (int64_t oy = 0; oy < Ho; ++oy) {
        for (int64_t ox = 0; ox < Wo; ++ox) {
          const double v = 0.25 * src[oy * Wo + ox];
          double* p = dst + 2 * oy * W + 2 * ox;
          p[0] += v;
          p[1] += v;
          p[W] += v;
          p[W + 1] += v;
        }
      }
    }
  });
}

Var global_mean_pool(Var x) {
  const Tensor& xv = x->value;
  VQF_REQUIRE(xv.ndim() == 4, "global_mean_pool expects 4-D");
  const int64_t B = xv.dim(0), C = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
  Tensor out = Tensor::uninit({B, C});
  const double* xp = xv.data();
  for (int64_t bc = 0; bc < B * C; ++bc) {
    double s = 0.0;
    const double* src = xp + bc * hw;
    for (int64_t i = 0; i < hw; ++i) s += src[i];
    out[bc] = s / static_cast<double>(hw);
  }
  return make_op(std::move(out), {x}, [B, C, hw](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    double* dx = nd.parents[0]->ensure_grad().data();
    const double* g = nd.grad.data();
    const double inv = 1.0 / static_cast<double>(hw);
    for (int64_t bc = 0; bc < B * C; ++bc) {
      const double v = g[bc] * inv;
      double* dst = dx + bc * hw;
      for (int64_t i = 0; i < hw; ++i) dst[i] += v;
    }
  });
}

Var concat_channels(const std::vector<Var>& xs) {
  VQF_REQUIRE(!xs.empty(), "concat_channels: empty input");
  const Tensor& first = xs[0]->value;
  VQF_REQUIRE(first.ndim() == 4, "concat_channels expects 4-D");
  const int64_t B = first.dim(0), H = first.dim(2), W = first.dim(3);
  int64_t Ctot = 0;
  for (const auto& x : xs) {
    VQF_REQUIRE(x->value.ndim() == 4 && x->value.dim(0) == B && x->value.dim(2) == H &&
                    x->value.dim(3) == W,
                "concat_channels: spatial/batch mismatch");
    Ctot += x->value.dim(1);
  }
  Tensor out = Tensor::uninit({B, Ctot, H, W});
  const int64_t hw = H * W;
  double* op = out.data();
  std::vector<int64_t> chans;
  int64_t coff = 0;
  for (const auto& x : xs) {
    const int64_t C = x->value.dim(1);
    chans.push_back(C);
    const double* xp = x->value.data();
    for (int64_t bi = 0; bi < B; ++bi) {
      std::copy(xp + bi * C * hw, xp + (bi + 1) * C * hw, op + (bi * Ctot + coff) * hw);
    }
    coff += C;
  }
  return make_op(std::move(out), xs, [B, Ctot, hw, chans](Node& nd) {
    const double* g = nd.grad.data();
    int64_t coff = 0;
    for (size_t k = 0; k < nd.parents.size(); ++k) {
      const int64_t C = chans[k];
      if (nd.parents[k]->requires_grad) {
        double* dx = nd.parents[k]->ensure_grad().data();
        for (int64_t bi = 0; bi < B; ++bi) {
          const double* src = g + (bi * Ctot + coff) * hw;
          double* dst = dx + bi * C * hw;
          for (int64_t i = 0; i < C * hw; ++i) dst[i] += src[i];
        }
      }
      coff += C;
    }
  });
}

Var slice_batch(Var x, int64_t b0, int64_t b1) {
  const Tensor& xv = x->value;
  VQF_REQUIRE(xv.ndim() == 4 && b0 >= 0 && b1 <= xv.dim(0) && b0 < b1,
              "slice_batch: bad range [" << b0 << "," << b1 << ") on " << xv.shape_str());
  const int64_t C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  const int64_t stride = C * H * W;
  Tensor out = Tensor::uninit({b1 - b0, C, H, W});
  std::copy(xv.data() + b0 * stride, xv.data() + b1 * stride, out.data());
  return make_op(std::move(out), {x}, [b0, stride](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    double* dx = nd.parents[0]->ensure_grad().data() + b0 * stride;
    const double* g = nd.grad.data();
    for (int64_t i = 0; i < nd.grad.numel(); ++i) dx[i] += g[i];
  });
}

Var stack_batch(const std::vector<Var>& xs) {
  VQF_REQUIRE(!xs.empty(), "stack_batch: empty input");
  const Tensor& first = xs[0]->value;
  VQF_REQUIRE(first.ndim() == 3, "stack_batch expects 3-D elements");
  const int64_t C = first.dim(0), H = first.dim(1), W = first.dim(2);
  const int64_t stride = C * H * W;
  Tensor out = Tensor::uninit({static_cast<int64_t>(xs.size()), C, H, W});
  double* op = out.data();
  for (size_t i = 0; i < xs.size(); ++i) {
    VQF_REQUIRE(xs[i]->value.same_shape(first), "stack_batch: element shape mismatch");
    std::copy(xs[i]->value.data(), xs[i]->value.data() + stride, op + i * stride);
  }
  return make_op(std::move(out), xs, [stride](Node& nd) {
    const double* g = nd.grad.data();
    for (size_t i = 0; i < nd.parents.size(); ++i) {
      if (!nd.parents[i]->requires_grad) continue;
      double* dx = nd.parents[i]->ensure_grad().data();
      const double* src = g + i * stride;
      for (int64_t j = 0; j < stride; ++j) dx[j] += src[j];
    }
  });
}

Var to_tokens(Var x) {
  const Tensor& xv = x->value;
  VQF_REQUIRE(xv.ndim() == 4, "to_tokens expects 4-D");
  const int64_t B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  const int64_t hw = H * W;
  Tensor out = Tensor::uninit({B * hw, C});
  const double* xp = xv.data();
  double* op = out.data();
  for (int64_t bi = 0; bi < B; ++bi) {
    const double* xb = xp + bi * C * hw;
    double* ob = op + bi * hw * C;
    for (int64_t c = 0; c < C; ++c) {
      const double* src = xb + c * hw;
      for (int64_t p = 0; p < hw; ++p) ob[p * C + c] = src[p];
    }
  }
  return make_op(std::move(out), {x}, [B, C, hw](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    double* dx = nd.parents[0]->ensure_grad().data();
    const double* g = nd.grad.data();
    for (int64_t bi = 0; bi < B; ++bi) {
      double* db = dx + bi * C * hw;
      const double* gb = g + bi * hw * C;
      for (int64_t c = 0; c < C; ++c) {
        double* dst = db + c * hw;
        for (int64_t p = 0; p < hw; ++p) dst[p] += gb[p * C + c];
      }
    }
  });
}

Var tokens_to_bchw(Var t, int64_t batch, int64_t h, int64_t w) {
  const Tensor& tv = t->value;
  VQF_REQUIRE(tv.ndim() == 2 && tv.dim(0) == batch * h * w,
              "tokens_to_bchw: token count " << tv.dim(0) << " != " << batch * h * w);
  const int64_t C = tv.dim(1), hw = h * w;
  Tensor out = Tensor::uninit({batch, C, h, w});
  const double* tp = tv.data();
  double* op = out.data();
  for (int64_t bi = 0; bi < batch; ++bi) {
    const double* tb = tp + bi * hw * C;
    double* ob = op + bi * C * hw;
    for (int64_t c = 0; c < C; ++c) {
      double* dst = ob + c * hw;
      for (int64_t p = 0; p < hw; ++p) dst[p] = tb[p * C + c];
    }
  }
  return make_op(std::move(out), {t}, [batch, C, hw](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    double* dt = nd.parents[0]->ensure_grad().data();
    const double* g = nd.grad.data();
    for (int64_t bi = 0; bi < batch; ++bi) {
      double* db = dt + bi * hw * C;
      const double* gb = g + bi * C * hw;
      for (int64_t c = 0; c < C; ++c) {
        const double* src = gb + c * hw;
        for (int64_t p = 0; p < hw; ++p) db[p * C + c] += src[p];
      }
    }
  });
}

Var weighted_channel_sum(Var maps, const Tensor& weights) {
  const Tensor& mv = maps->value;
  VQF_REQUIRE(mv.ndim() == 4, "weighted_channel_sum expects 4-D maps");
  const int64_t K = mv.dim(0), d = mv.dim(1), hw = mv.dim(2) * mv.dim(3);
  VQF_REQUIRE(weights.ndim() == 2 && weights.dim(0) == K && weights.dim(1) == d,
              "weighted_channel_sum: weights shape " << weights.shape_str());
  Tensor out({d, mv.dim(2), mv.dim(3)});
  out.zero();
  const double* mp = mv.data();
  const double* wp = weights.data();
  double* op = out.data();
  for (int64_t k = 0; k < K; ++k) {
    for (int64_t j = 0; j < d; ++j) {
      const double wkj = wp[k * d + j];
      const double* src = mp + (k * d + j) * hw;
      double* dst = op + j * hw;
      for (int64_t p = 0; p < hw; ++p) dst[p] += wkj * src[p];
    }
  }
  return make_op(std::move(out), {maps}, [K, d, hw, weights](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    double* dm = nd.parents[0]->ensure_grad().data();
    const double* g = nd.grad.data();
    const double* wp = weights.data();
    for (int64_t k = 0; k < K; ++k) {
      for (int64_t j = 0; j < d; ++j) {
        const double wkj = wp[k * d + j];
        const double* src = g + j * hw;
        double* dst = dm + (k * d + j) * hw;
        for (int64_t p = 0; p < hw; ++p) dst[p] += wkj * src[p];
      }
    }
  });
}

Var detach(Var x) {
  return make_constant(x->value);
}

Var reshape(Var x, std::vector<int64_t> shape) {
  Tensor out = x->value.clone().reshaped(std::move(shape));
  return make_op(std::move(out), {x}, [](Node& nd) {
    if (!nd.parents[0]->requires_grad) return;
    nd.parents[0]->ensure_grad().add_(nd.grad.reshaped(nd.parents[0]->value.shape()));
  });
}

}  // namespace vqfont::nn
