#include "doctest.h"

#include <cmath>
#include <functional>

#include "ganbench/core/autodiff.hpp"
#include "ganbench/core/rng.hpp"

using namespace ganbench;
namespace ad = autodiff;
using core::Rng;
using core::Tensor;
using V = ad::Var<double>;

namespace {

Tensor<double> random_tensor(std::vector<int64_t> shape, Rng& rng, double lo = -2, double hi = 2) {
  Tensor<double> t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// central finite differences of scalar_fn w.r.t. the entries of x
double max_grad_rel_err(const std::function<V(const V&)>& f, Tensor<double> x0,
                        double h = 1e-6) {
  auto x = ad::parameter(x0.clone());
  auto loss = f(x);
  auto grads = ad::backward(loss, {x});
  const auto& g = grads.at(x.get())->value;
  double worst = 0.0;
  for (int64_t i = 0; i < x0.size(); ++i) {
    const double orig = x->value[i];
    x->value[i] = orig + h;
    const double lp = f(x)->scalar();
    x->value[i] = orig - h;
    const double lm = f(x)->scalar();
    x->value[i] = orig;
    const double fd = (lp - lm) / (2 * h);
    const double scale = std::max({1e-6, std::abs(fd), std::abs(g[i])});
    worst = std::max(worst, std::abs(fd - g[i]) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("elementwise op gradients match finite differences") {
  Rng rng(1);
  auto x0 = random_tensor({3, 4}, rng, 0.2, 2.0);  // positive for log/sqrt
  CHECK(max_grad_rel_err([](const V& x) { return ad::mean_all(ad::tanh_op(x)); }, x0) < 1e-7);
  CHECK(max_grad_rel_err([](const V& x) { return ad::mean_all(ad::sigmoid(x)); }, x0) < 1e-7);
  CHECK(max_grad_rel_err([](const V& x) { return ad::mean_all(ad::log_op(x)); }, x0) < 1e-7);
  CHECK(max_grad_rel_err([](const V& x) { return ad::mean_all(ad::sqrt_op(x)); }, x0) < 1e-7);
  CHECK(max_grad_rel_err([](const V& x) { return ad::mean_all(ad::exp_op(x)); }, x0) < 1e-7);
  CHECK(max_grad_rel_err([](const V& x) { return ad::mean_all(ad::leaky_relu(x, 0.2)); }, x0) < 1e-7);
  CHECK(max_grad_rel_err([](const V& x) { return ad::mean_all(ad::mul(x, x)); }, x0) < 1e-7);
  CHECK(max_grad_rel_err(
            [](const V& x) { return ad::mean_all(ad::div(ad::constant_scalar(1.0), x)); }, x0) <
        1e-7);
}

TEST_CASE("broadcast binary ops and reductions") {
  Rng rng(2);
  auto a0 = random_tensor({4, 3}, rng);
  auto b0 = random_tensor({1, 3}, rng);
  auto b = ad::parameter(b0.clone());
  // gradient w.r.t. the broadcast operand accumulates over the expanded axis
  CHECK(max_grad_rel_err(
            [&](const V& x) { return ad::mean_all(ad::mul(x, b)); }, a0) < 1e-7);
  auto a = ad::parameter(a0.clone());
  CHECK(max_grad_rel_err(
            [&](const V& x) { return ad::sum_all(ad::mul(a, x)); }, b0) < 1e-7);
  CHECK(max_grad_rel_err(
            [](const V& x) { return ad::mean_all(ad::reduce_sum(x, {0}, true)); }, a0) < 1e-7);
  CHECK(max_grad_rel_err(
            [](const V& x) { return ad::mean_all(ad::reduce_mean(x, {1}, false)); }, a0) < 1e-7);
}

TEST_CASE("reduce_sum values") {
  Tensor<double> x({2, 3}, {1, 2, 3, 4, 5, 6});
  auto v = ad::constant(x);
  auto s0 = ad::reduce_sum(v, {0}, true);
  CHECK(s0->value.shape() == std::vector<int64_t>{1, 3});
  CHECK(s0->value[0] == 5);
  CHECK(s0->value[2] == 9);
  auto s1 = ad::reduce_sum(v, {1}, false);
  CHECK(s1->value.shape() == std::vector<int64_t>{2});
  CHECK(s1->value[0] == 6);
  CHECK(s1->value[1] == 15);
  CHECK(ad::sum_all(v)->scalar() == 21);
}

TEST_CASE("matmul gradients for all transpose flags") {
  Rng rng(3);
  for (bool ta : {false, true})
    for (bool tb : {false, true}) {
      auto a0 = random_tensor(ta ? std::vector<int64_t>{5, 3} : std::vector<int64_t>{3, 5}, rng);
      auto b0 = random_tensor(tb ? std::vector<int64_t>{4, 5} : std::vector<int64_t>{5, 4}, rng);
      auto b = ad::constant(b0);
      CHECK(max_grad_rel_err(
                [&](const V& x) { return ad::mean_all(ad::matmul(x, b, ta, tb)); }, a0) < 1e-7);
      auto a = ad::constant(a0);
      CHECK(max_grad_rel_err(
                [&](const V& x) { return ad::mean_all(ad::matmul(a, x, ta, tb)); }, b0) < 1e-7);
    }
}

TEST_CASE("conv op gradients match finite differences") {
  Rng rng(4);
  auto x0 = random_tensor({2, 3, 6, 5}, rng);
  auto w0 = random_tensor({4, 3, 3, 3}, rng);
  auto w = ad::constant(w0);
  CHECK(max_grad_rel_err(
            [&](const V& x) { return ad::mean_all(ad::conv2d_raw(x, w, 2, 1)); }, x0) < 1e-6);
  auto x = ad::constant(x0);
  CHECK(max_grad_rel_err(
            [&](const V& v) { return ad::mean_all(ad::conv2d_raw(x, v, 2, 1)); }, w0) < 1e-6);
  // transposed-convolution path (conv2d_input_grad as forward)
  auto z0 = random_tensor({2, 4, 3, 3}, rng);
  CHECK(max_grad_rel_err(
            [&](const V& z) { return ad::mean_all(ad::conv2d_input_grad(z, w, 2, 1, 6, 5)); },
            z0) < 1e-6);
  auto z = ad::constant(z0);
  CHECK(max_grad_rel_err(
            [&](const V& v) { return ad::mean_all(ad::conv2d_input_grad(z, v, 2, 1, 6, 5)); },
            w0) < 1e-6);
}

TEST_CASE("gradient accumulation when a node fans out") {
  Tensor<double> x0({1}, {3.0});
  auto x = ad::parameter(x0);
  auto y = ad::add(ad::mul(x, x), x);  // x^2 + x
  auto g = ad::backward(y, {x});
  CHECK(g.at(x.get())->scalar() == doctest::Approx(7.0));  // 2x + 1
}

TEST_CASE("double backward: grad-of-grad builds the right graph") {
  // y = sum(x^3); dy/dx = 3x^2; s = sum(dy/dx); ds/dx = 6x
  Tensor<double> x0({3}, {1.0, -2.0, 0.5});
  auto x = ad::parameter(x0);
  auto y = ad::sum_all(ad::mul(ad::mul(x, x), x));
  auto g1 = ad::backward(y, {x});
  auto gx = g1.at(x.get());
  CHECK(gx->value[0] == doctest::Approx(3.0));
  CHECK(gx->value[1] == doctest::Approx(12.0));
  auto s = ad::sum_all(gx);
  auto g2 = ad::backward(s, {x});
  const auto& gg = g2.at(x.get())->value;
  CHECK(gg[0] == doctest::Approx(6.0));
  CHECK(gg[1] == doctest::Approx(-12.0));
  CHECK(gg[2] == doctest::Approx(3.0));
}

TEST_CASE("backward with targets skips unrelated branches") {
  Tensor<double> a0({2}, {1, 2}), b0({2}, {3, 4});
  auto a = ad::parameter(a0);
  auto b = ad::parameter(b0);
  auto loss = ad::sum_all(ad::add(a, b));
  auto g = ad::backward(loss, {a});
  CHECK(g.count(a.get()) == 1);
  CHECK(g.count(b.get()) == 0);
}

TEST_CASE("expand and reshape round-trip shapes") {
  Rng rng(6);
  auto x0 = random_tensor({2, 1, 3}, rng);
  auto x = ad::constant(x0);
  auto e = ad::expand(x, {2, 4, 3});
  CHECK(e->value.shape() == std::vector<int64_t>{2, 4, 3});
  for (int64_t i = 0; i < 2; ++i)
    for (int64_t j = 0; j < 4; ++j)
      for (int64_t k = 0; k < 3; ++k)
        CHECK(e->value[(i * 4 + j) * 3 + k] == x0[i * 3 + k]);
  auto r = ad::reshape(x, {6});
  CHECK(r->value.shape() == std::vector<int64_t>{6});
}

TEST_CASE("clamp masks its gradient outside the range") {
  Tensor<double> x0({3}, {-2.0, 0.5, 2.0});
  auto x = ad::parameter(x0);
  auto y = ad::sum_all(ad::clamp(x, 0.0, 1.0));
  auto g = ad::backward(y, {x});
  const auto& gv = g.at(x.get())->value;
  CHECK(gv[0] == 0.0);
  CHECK(gv[1] == 1.0);
  CHECK(gv[2] == 0.0);
}
