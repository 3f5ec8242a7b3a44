#include <doctest.h>

#include <filesystem>

#include "testutil.hpp"
#include "vqfont/nn/modules.hpp"
#include "vqfont/nn/optim.hpp"
#include "vqfont/nn/serialize.hpp"

using namespace vqfont;
using namespace vqfont::nn;
using vqfont::testutil::grad_check;

namespace {

Var randn_leaf(Rng& rng, std::vector<int64_t> shape, double stddev = 1.0) {
  return make_param(Tensor::randn(rng, std::move(shape), stddev));
}

}  // namespace

TEST_CASE("elementwise ops match finite differences") {
  Rng rng(7);
  auto a = randn_leaf(rng, {3, 5});
  auto b = randn_leaf(rng, {3, 5});

  auto check = [&](const std::function<Var()>& f, const Var& leaf) {
    auto r = grad_check(f, leaf);
    CHECK(r.max_rel_err < 1e-6);
  };

  check([&] { return mean_all(mul(a, b)); }, a);
  check([&] { return mean_all(mul(a, b)); }, b);
  check([&] { return sum_all(sub(a, b)); }, b);
  check([&] { return mean_all(tanh_op(a)); }, a);
  check([&] { return mse_loss(a, b); }, a);
  check([&] { return mse_loss(a, b); }, b);
  check([&] { return mean_all(mul_scalar(add_scalar(a, 0.7), -1.3)); }, a);
}

TEST_CASE("activations avoid kinks and match finite differences") {
  Rng rng(11);
  // Keep inputs away from 0 so central differences stay on one linear piece.
  Tensor t = Tensor::randn(rng, {4, 6});
  for (int64_t i = 0; i < t.numel(); ++i) {
    t[i] += t[i] >= 0.0 ? 0.2 : -0.2;
  }
  auto x = make_param(t);
  auto r1 = grad_check([&] { return mean_all(leaky_relu(x, 0.2)); }, x);
  CHECK(r1.max_rel_err < 1e-6);
  auto r2 = grad_check([&] { return mean_all(relu(x)); }, x);
  CHECK(r2.max_rel_err < 1e-6);

  auto y = make_param(t.clone());
  // |a-b| with the gap bounded away from zero.
  auto c = make_constant(Tensor::zeros({4, 6}));
  auto r3 = grad_check([&] { return l1_loss(y, c); }, y);
  CHECK(r3.max_rel_err < 1e-6);
}

TEST_CASE("matmul family matches finite differences") {
  Rng rng(13);
  auto a = randn_leaf(rng, {4, 3});
  auto b = randn_leaf(rng, {3, 5});
  auto bt = randn_leaf(rng, {5, 3});
  auto w = randn_leaf(rng, {6, 3});
  auto bias = randn_leaf(rng, {6});

  CHECK(grad_check([&] { return mean_all(matmul(a, b)); }, a).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(matmul(a, b)); }, b).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mse_loss(matmul_nt(a, bt), make_constant(Tensor::zeros({4, 5}))); },
                   bt).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(linear(a, w, bias)); }, w).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(linear(a, w, bias)); }, bias).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(linear(a, w, bias)); }, a).max_rel_err < 1e-6);
}

TEST_CASE("softmax, layer norm, row normalize match finite differences") {
  Rng rng(17);
  auto x = randn_leaf(rng, {5, 7});
  auto gain = randn_leaf(rng, {7}, 0.5);
  auto bias = randn_leaf(rng, {7}, 0.5);
  auto target = make_constant(Tensor::randn(rng, {5, 7}));

  CHECK(grad_check([&] { return mse_loss(softmax_rows(x), target); }, x).max_rel_err < 1e-5);
  CHECK(grad_check([&] { return mse_loss(layer_norm_rows(x, gain, bias), target); }, x)
            .max_rel_err < 1e-5);
  CHECK(grad_check([&] { return mse_loss(layer_norm_rows(x, gain, bias), target); }, gain)
            .max_rel_err < 1e-5);
  CHECK(grad_check([&] { return mse_loss(layer_norm_rows(x, gain, bias), target); }, bias)
            .max_rel_err < 1e-5);
  CHECK(grad_check([&] { return mse_loss(row_l2_normalize(x), target); }, x).max_rel_err < 1e-5);

  // Softmax rows sum to one.
  auto s = softmax_rows(x);
  for (int64_t i = 0; i < 5; ++i) {
    double sum = 0.0;
    for (int64_t j = 0; j < 7; ++j) sum += s->value.at(i, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("slicing, gather, stacking match finite differences") {
  Rng rng(19);
  auto x = randn_leaf(rng, {4, 8});
  auto m = randn_leaf(rng, {6, 3});

  CHECK(grad_check([&] { return mean_all(slice_cols(x, 2, 6)); }, x).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(concat_cols({slice_cols(x, 0, 3), slice_cols(x, 3, 8)})); },
                   x).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(gather_rows(m, {0, 2, 2, 5})); }, m).max_rel_err < 1e-6);

  auto a = randn_leaf(rng, {4, 8});
  CHECK(grad_check([&] { return mean_all(rows_dot(x, a)); }, x).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(rows_dot(x, a)); }, a).max_rel_err < 1e-6);

  auto s1 = randn_leaf(rng, {1});
  auto s2 = randn_leaf(rng, {1});
  auto s3 = randn_leaf(rng, {1});
  CHECK(grad_check([&] { return logsumexp_vec(stack_scalars({s1, s2, s3})); }, s2).max_rel_err <
        1e-6);
}

TEST_CASE("conv2d and conv_transpose2d match finite differences") {
  Rng rng(23);
  auto x = randn_leaf(rng, {2, 3, 6, 6});
  auto w = randn_leaf(rng, {4, 3, 3, 3}, 0.4);
  auto b = randn_leaf(rng, {4}, 0.2);

  CHECK(grad_check([&] { return mean_all(conv2d(x, w, b, 1, 1)); }, x).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(conv2d(x, w, b, 1, 1)); }, w).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(conv2d(x, w, b, 1, 1)); }, b).max_rel_err < 1e-6);

  auto t = make_constant(Tensor::randn(rng, {2, 4, 3, 3}));
  CHECK(grad_check([&] { return mse_loss(conv2d(x, w, b, 2, 1), t); }, x).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mse_loss(conv2d(x, w, b, 2, 1), t); }, w).max_rel_err < 1e-6);

  auto wt = randn_leaf(rng, {3, 2, 4, 4}, 0.4);
  auto bt = randn_leaf(rng, {2}, 0.2);
  auto tt = make_constant(Tensor::randn(rng, {2, 2, 12, 12}));
  CHECK(grad_check([&] { return mse_loss(conv_transpose2d(x, wt, bt, 2, 1, 0), tt); }, x)
            .max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mse_loss(conv_transpose2d(x, wt, bt, 2, 1, 0), tt); }, wt)
            .max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mse_loss(conv_transpose2d(x, wt, bt, 2, 1, 0), tt); }, bt)
            .max_rel_err < 1e-6);

  // Shape contract: k=4, s=2, p=1 doubles the spatial size.
  auto up = conv_transpose2d(x, wt, bt, 2, 1, 0);
  CHECK(up->value.dim(2) == 12);
  CHECK(up->value.dim(3) == 12);
}

TEST_CASE("pooling and layout ops match finite differences") {
  Rng rng(29);
  auto x = randn_leaf(rng, {2, 3, 4, 4});

  CHECK(grad_check([&] { return mean_all(avg_pool2d(x)); }, x).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(global_mean_pool(x)); }, x).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(to_tokens(x)); }, x).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(tokens_to_bchw(to_tokens(x), 2, 4, 4)); }, x)
            .max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(slice_batch(x, 1, 2)); }, x).max_rel_err < 1e-6);

  // Token round trip is the identity.
  auto rt = tokens_to_bchw(to_tokens(x), 2, 4, 4);
  for (int64_t i = 0; i < x->value.numel(); ++i) {
    CHECK(rt->value[i] == x->value[i]);
  }

  auto m1 = randn_leaf(rng, {3, 4, 4});
  auto m2 = randn_leaf(rng, {3, 4, 4});
  CHECK(grad_check([&] { return mean_all(stack_batch({m1, m2})); }, m1).max_rel_err < 1e-6);
  CHECK(grad_check([&] { return mean_all(concat_channels({x, x})); }, x).max_rel_err < 1e-6);

  auto maps = randn_leaf(rng, {3, 5, 4, 4});
  Tensor wts = Tensor::randn(rng, {3, 5});
  CHECK(grad_check([&] { return mean_all(weighted_channel_sum(maps, wts)); }, maps).max_rel_err <
        1e-6);
}

TEST_CASE("detach blocks gradient flow exactly") {
  Rng rng(31);
  auto x = randn_leaf(rng, {3, 3});
  auto loss = mse_loss(detach(x), make_constant(Tensor::zeros({3, 3})));
  backward(loss);
  CHECK(!x->grad.defined());

  // Mixed path: only the non-detached branch contributes.
  auto y = randn_leaf(rng, {3, 3});
  auto loss2 = mean_all(mul(detach(y), y));
  backward(loss2);
  REQUIRE(y->grad.defined());
  for (int64_t i = 0; i < y->value.numel(); ++i) {
    CHECK(y->grad[i] == doctest::Approx(y->value[i] / 9.0).epsilon(1e-12));
  }
}

TEST_CASE("multiple uses of a node accumulate gradients") {
  auto x = make_param(Tensor::from({2.0}, {1}));
  auto loss = add(mul(x, x), x);  // x^2 + x, d/dx = 2x + 1 = 5
  backward(loss);
  CHECK(x->grad[0] == doctest::Approx(5.0));
}

TEST_CASE("NoGradGuard builds a constant graph") {
  Rng rng(37);
  auto x = randn_leaf(rng, {2, 2});
  NoGradGuard guard;
  auto y = mul(x, x);
  CHECK(!y->requires_grad);
  CHECK(y->parents.empty());
}

TEST_CASE("Adam minimizes a quadratic") {
  auto x = make_param(Tensor::from({4.0, -3.0}, {2}));
  Adam opt({x}, 0.1);
  for (int i = 0; i < 300; ++i) {
    opt.zero_grad();
    auto loss = mse_loss(x, make_constant(Tensor::from({1.0, 2.0}, {2})));
    backward(loss);
    opt.step();
  }
  CHECK(x->value[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(x->value[1] == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("checkpoint round trip preserves module parameters and metadata") {
  Rng rng(41);
  Linear lin(rng, 5, 3);

  Checkpoint ck;
  ck.kind = "vq";
  ck.step = 1234;
  ck.config_json = "{\"canvas\":64}";
  ck.put_module("lin", lin);

  const auto path = std::filesystem::temp_directory_path() / "vqfont_ck_test.bin";
  ck.save(path);
  auto loaded = Checkpoint::load(path);
  CHECK(loaded.kind == "vq");
  CHECK(loaded.step == 1234);
  CHECK(loaded.config_json == ck.config_json);

  Rng rng2(999);
  Linear lin2(rng2, 5, 3);
  CHECK(lin2.parameters_hash() != lin.parameters_hash());
  loaded.load_module("lin", lin2);
  CHECK(lin2.parameters_hash() == lin.parameters_hash());
  std::filesystem::remove(path);
}

TEST_CASE("module freeze makes parameters constants") {
  Rng rng(43);
  Linear lin(rng, 4, 4);
  lin.freeze();
  auto x = make_constant(Tensor::randn(rng, {2, 4}));
  auto y = lin(x);
  CHECK(!y->requires_grad);
  CHECK_THROWS(Adam(lin.parameters(), 0.1));
}

TEST_CASE("same seed gives identical initialization") {
  Rng a(77), b(77);
  Conv2d c1(a, 3, 8, 3, 1, 1);
  Conv2d c2(b, 3, 8, 3, 1, 1);
  CHECK(c1.parameters_hash() == c2.parameters_hash());
}
