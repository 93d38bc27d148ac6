#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ganbench/core/kernels.hpp"
#include "ganbench/core/tensor.hpp"

// Reverse-mode autodiff over Tensor<T>. Backward passes build ordinary graph
// nodes (each parent-gradient closure returns a Var), so gradients are
// themselves differentiable. That is what makes the WGAN gradient penalty
// trainable: the critic's input gradient is produced by backward(), wrapped
// into the penalty expression, and differentiated again with respect to the
// critic parameters.
//
// Piecewise-linear pieces (LeakyReLU masks, clamp masks, dropout masks) are
// captured as constants; their second derivative is zero almost everywhere,
// matching the usual autodiff convention. Smooth ops (tanh, sigmoid, sqrt,
// log, batch statistics) recompute from their parent Vars so higher-order
// gradients stay connected.

namespace ganbench::autodiff {

using core::Tensor;
namespace kn = core::kernels;

template <typename T>
struct Node;

template <typename T>
using Var = std::shared_ptr<Node<T>>;

template <typename T>
using ParentGrad = std::function<Var<T>(const Var<T>&)>;

template <typename T>
struct Node {
  Tensor<T> value;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<Var<T>> parents;
  std::vector<ParentGrad<T>> pgrads;  // one per parent

  const std::vector<int64_t>& shape() const { return value.shape(); }
  T scalar() const {
    if (value.size() != 1) throw std::logic_error("scalar() on non-scalar Var");
    return value[0];
  }
};

template <typename T>
Var<T> constant(Tensor<T> v) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(v);
  return n;
}

template <typename T>
Var<T> constant_scalar(T v) {
  return constant(Tensor<T>::scalar(v));
}

// Leaf that participates in gradients (model parameters, penalty inputs).
template <typename T>
Var<T> parameter(Tensor<T> v) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(v);
  n->requires_grad = true;
  return n;
}

template <typename T>
Var<T> make_node(Tensor<T> value, std::vector<Var<T>> parents,
                 std::vector<ParentGrad<T>> pgrads, const char* op) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->pgrads = std::move(pgrads);
  n->op = op;
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  return n;
}

// ---- shape utilities ------------------------------------------------------

inline std::vector<int64_t> strides_of(const std::vector<int64_t>& shape) {
  std::vector<int64_t> st(shape.size());
  int64_t acc = 1;
  for (int i = static_cast<int>(shape.size()) - 1; i >= 0; --i) {
    st[static_cast<size_t>(i)] = acc;
    acc *= shape[static_cast<size_t>(i)];
  }
  return st;
}

inline std::vector<int64_t> broadcast_shape(const std::vector<int64_t>& a,
                                            const std::vector<int64_t>& b) {
  const size_t nd = std::max(a.size(), b.size());
  std::vector<int64_t> out(nd);
  for (size_t i = 0; i < nd; ++i) {
    const int64_t da = i < nd - a.size() ? 1 : a[i - (nd - a.size())];
    const int64_t db = i < nd - b.size() ? 1 : b[i - (nd - b.size())];
    if (da != db && da != 1 && db != 1)
      throw std::invalid_argument("broadcast: incompatible shapes " + core::shape_str(a) +
                                  " vs " + core::shape_str(b));
    // a size-1 axis follows the other operand, including size 0
    out[i] = da == 1 ? db : da;
  }
  return out;
}

// ---- core ops -------------------------------------------------------------

template <typename T>
Var<T> reshape(const Var<T>& x, std::vector<int64_t> shape) {
  Tensor<T> v = x->value.reshaped(shape);
  std::vector<int64_t> orig = x->value.shape();
  return make_node<T>(std::move(v), {x},
                      {[orig](const Var<T>& g) { return reshape(g, orig); }}, "reshape");
}

template <typename T>
Var<T> reduce_sum(const Var<T>& x, std::vector<int> axes, bool keepdims = true);

// Broadcast x to `shape` (numpy alignment rules; trailing axes align).
template <typename T>
Var<T> expand(const Var<T>& x, const std::vector<int64_t>& shape) {
  if (x->value.shape() == shape) return x;
  const auto& xs = x->value.shape();
  const size_t nd = shape.size();
  if (xs.size() > nd) throw std::invalid_argument("expand: rank reduction not allowed");
  // padded x shape
  std::vector<int64_t> ps(nd, 1);
  for (size_t i = 0; i < xs.size(); ++i) ps[nd - xs.size() + i] = xs[i];
  std::vector<int> bcast_axes;
  for (size_t i = 0; i < nd; ++i) {
    if (ps[i] != shape[i]) {
      if (ps[i] != 1) throw std::invalid_argument("expand: incompatible shapes");
      bcast_axes.push_back(static_cast<int>(i));
    }
  }
  Tensor<T> out(shape);
  const auto ost = strides_of(shape);
  auto xst = strides_of(ps);
  for (size_t i = 0; i < nd; ++i)
    if (ps[i] == 1) xst[i] = 0;
  const int64_t n = out.size();
  const T* xd = x->value.data();
  T* od = out.data();
  for (int64_t idx = 0; idx < n; ++idx) {
    int64_t rem = idx, src = 0;
    for (size_t i = 0; i < nd; ++i) {
      const int64_t c = rem / ost[i];
      rem -= c * ost[i];
      src += c * xst[i];
    }
    od[idx] = xd[src];
  }
  std::vector<int64_t> orig = xs;
  return make_node<T>(std::move(out), {x},
                      {[bcast_axes, orig](const Var<T>& g) {
                        return reshape(reduce_sum(g, bcast_axes, true), orig);
                      }},
                      "expand");
}

template <typename T>
Var<T> reduce_sum(const Var<T>& x, std::vector<int> axes, bool keepdims) {
  const auto& xs = x->value.shape();
  std::vector<bool> reduce(xs.size(), false);
  for (int a : axes) reduce.at(static_cast<size_t>(a)) = true;
  std::vector<int64_t> kshape(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) kshape[i] = reduce[i] ? 1 : xs[i];
  Tensor<T> out(kshape);
  const auto xst = strides_of(xs);
  auto ost = strides_of(kshape);
  for (size_t i = 0; i < xs.size(); ++i)
    if (reduce[i]) ost[i] = 0;
  const T* xd = x->value.data();
  T* od = out.data();
  const int64_t n = x->value.size();
  for (int64_t idx = 0; idx < n; ++idx) {
    int64_t rem = idx, dst = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      const int64_t c = rem / xst[i];
      rem -= c * xst[i];
      dst += c * ost[i];
    }
    od[dst] += xd[idx];
  }
  std::vector<int64_t> orig = xs;
  auto node = make_node<T>(std::move(out), {x},
                           {[orig](const Var<T>& g) { return expand(g, orig); }}, "reduce_sum");
  if (!keepdims) {
    std::vector<int64_t> squeezed;
    for (size_t i = 0; i < xs.size(); ++i)
      if (!reduce[i]) squeezed.push_back(xs[i]);
    if (squeezed.empty()) squeezed.push_back(1);
    return reshape(node, squeezed);
  }
  return node;
}

namespace detail {
template <typename T, typename F>
Tensor<T> map(const Tensor<T>& x, F&& f) {
  Tensor<T> out(x.shape());
  const T* xd = x.data();
  T* od = out.data();
  const int64_t n = x.size();
  for (int64_t i = 0; i < n; ++i) od[i] = f(xd[i]);
  return out;
}
template <typename T, typename F>
Tensor<T> zip(const Tensor<T>& a, const Tensor<T>& b, F&& f) {
  Tensor<T> out(a.shape());
  const T* ad = a.data();
  const T* bd = b.data();
  T* od = out.data();
  const int64_t n = a.size();
  for (int64_t i = 0; i < n; ++i) od[i] = f(ad[i], bd[i]);
  return out;
}
}  // namespace detail

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (!a->value.same_shape(b->value)) {
    auto s = broadcast_shape(a->value.shape(), b->value.shape());
    return add(expand(a, s), expand(b, s));
  }
  return make_node<T>(detail::zip(a->value, b->value, [](T x, T y) { return x + y; }), {a, b},
                      {[](const Var<T>& g) { return g; }, [](const Var<T>& g) { return g; }},
                      "add");
}

template <typename T>
Var<T> neg(const Var<T>& x) {
  return make_node<T>(detail::map(x->value, [](T v) { return -v; }), {x},
                      {[](const Var<T>& g) { return neg(g); }}, "neg");
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  if (!a->value.same_shape(b->value)) {
    auto s = broadcast_shape(a->value.shape(), b->value.shape());
    return sub(expand(a, s), expand(b, s));
  }
  return make_node<T>(detail::zip(a->value, b->value, [](T x, T y) { return x - y; }), {a, b},
                      {[](const Var<T>& g) { return g; }, [](const Var<T>& g) { return neg(g); }},
                      "sub");
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  if (!a->value.same_shape(b->value)) {
    auto s = broadcast_shape(a->value.shape(), b->value.shape());
    return mul(expand(a, s), expand(b, s));
  }
  return make_node<T>(detail::zip(a->value, b->value, [](T x, T y) { return x * y; }), {a, b},
                      {[b](const Var<T>& g) { return mul(g, b); },
                       [a](const Var<T>& g) { return mul(g, a); }},
                      "mul");
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  if (!a->value.same_shape(b->value)) {
    auto s = broadcast_shape(a->value.shape(), b->value.shape());
    return div(expand(a, s), expand(b, s));
  }
  return make_node<T>(detail::zip(a->value, b->value, [](T x, T y) { return x / y; }), {a, b},
                      {[b](const Var<T>& g) { return div(g, b); },
                       [a, b](const Var<T>& g) { return neg(mul(g, div(a, mul(b, b)))); }},
                      "div");
}

template <typename T>
Var<T> scale(const Var<T>& x, T c) {
  return make_node<T>(detail::map(x->value, [c](T v) { return c * v; }), {x},
                      {[c](const Var<T>& g) { return scale(g, c); }}, "scale");
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, T c) {
  return make_node<T>(detail::map(x->value, [c](T v) { return v + c; }), {x},
                      {[](const Var<T>& g) { return g; }}, "add_scalar");
}

template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope) {
  Tensor<T> mask = detail::map(x->value, [slope](T v) { return v > T(0) ? T(1) : slope; });
  Tensor<T> val = detail::zip(x->value, mask, [](T v, T m) { return v * m; });
  auto maskc = constant(std::move(mask));
  return make_node<T>(std::move(val), {x},
                      {[maskc](const Var<T>& g) { return mul(g, maskc); }}, "leaky_relu");
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  return leaky_relu(x, T(0));
}

template <typename T>
Var<T> clamp(const Var<T>& x, T lo, T hi) {
  Tensor<T> mask = detail::map(x->value, [lo, hi](T v) { return (v >= lo && v <= hi) ? T(1) : T(0); });
  Tensor<T> val = detail::map(x->value, [lo, hi](T v) { return v < lo ? lo : (v > hi ? hi : v); });
  auto maskc = constant(std::move(mask));
  return make_node<T>(std::move(val), {x},
                      {[maskc](const Var<T>& g) { return mul(g, maskc); }}, "clamp");
}

template <typename T>
Var<T> tanh_op(const Var<T>& x) {
  return make_node<T>(detail::map(x->value, [](T v) { return std::tanh(v); }), {x},
                      {[x](const Var<T>& g) {
                        auto t = tanh_op(x);
                        return mul(g, add_scalar(neg(mul(t, t)), T(1)));
                      }},
                      "tanh");
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  return make_node<T>(
      detail::map(x->value, [](T v) { return v >= T(0) ? T(1) / (T(1) + std::exp(-v))
                                                       : std::exp(v) / (T(1) + std::exp(v)); }),
      {x},
      {[x](const Var<T>& g) {
        auto s = sigmoid(x);
        return mul(g, mul(s, add_scalar(neg(s), T(1))));
      }},
      "sigmoid");
}

template <typename T>
Var<T> log_op(const Var<T>& x) {
  return make_node<T>(detail::map(x->value, [](T v) { return std::log(v); }), {x},
                      {[x](const Var<T>& g) { return div(g, x); }}, "log");
}

template <typename T>
Var<T> exp_op(const Var<T>& x) {
  return make_node<T>(detail::map(x->value, [](T v) { return std::exp(v); }), {x},
                      {[x](const Var<T>& g) { return mul(g, exp_op(x)); }}, "exp");
}

template <typename T>
Var<T> sqrt_op(const Var<T>& x) {
  return make_node<T>(detail::map(x->value, [](T v) { return std::sqrt(v); }), {x},
                      {[x](const Var<T>& g) { return div(g, scale(sqrt_op(x), T(2))); }}, "sqrt");
}

template <typename T>
Var<T> sum_all(const Var<T>& x) {
  T acc = 0;
  const T* xd = x->value.data();
  const int64_t n = x->value.size();
  for (int64_t i = 0; i < n; ++i) acc += xd[i];
  std::vector<int64_t> orig = x->value.shape();
  return make_node<T>(Tensor<T>::scalar(acc), {x},
                      {[orig](const Var<T>& g) { return expand(g, orig); }}, "sum_all");
}

template <typename T>
Var<T> mean_all(const Var<T>& x) {
  if (x->value.size() == 0) throw std::invalid_argument("mean_all: empty tensor");
  return scale(sum_all(x), T(1) / static_cast<T>(x->value.size()));
}

template <typename T>
Var<T> reduce_mean(const Var<T>& x, std::vector<int> axes, bool keepdims = true) {
  int64_t k = 1;
  for (int a : axes) k *= x->value.shape().at(static_cast<size_t>(a));
  return scale(reduce_sum(x, std::move(axes), keepdims), T(1) / static_cast<T>(k));
}

// 2D matmul with transpose flags; a is [m,k] (or [k,m] when trans_a).
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b, bool trans_a = false, bool trans_b = false) {
  const auto& as = a->value.shape();
  const auto& bs = b->value.shape();
  if (as.size() != 2 || bs.size() != 2) throw std::invalid_argument("matmul: 2D tensors required");
  const int64_t m = trans_a ? as[1] : as[0];
  const int64_t k = trans_a ? as[0] : as[1];
  const int64_t kb = trans_b ? bs[1] : bs[0];
  const int64_t n = trans_b ? bs[0] : bs[1];
  if (k != kb)
    throw std::invalid_argument("matmul: inner dimensions " + core::shape_str(as) + " x " +
                                core::shape_str(bs));
  Tensor<T> out({m, n});
  kn::gemm<T>(trans_a, trans_b, m, n, k, T(1), a->value.data(), b->value.data(), T(0), out.data());
  return make_node<T>(std::move(out), {a, b},
                      {[a, b, trans_a, trans_b](const Var<T>& g) {
                         return trans_a ? matmul(b, g, trans_b, true)
                                        : matmul(g, b, false, !trans_b);
                       },
                       [a, b, trans_a, trans_b](const Var<T>& g) {
                         return trans_b ? matmul(g, a, true, trans_a)
                                        : matmul(a, g, !trans_a, false);
                       }},
                      "matmul");
}

// ---- convolution family ---------------------------------------------------
// Three mutually adjoint linear ops; each one's gradients are expressed with
// the other two, which closes the set under differentiation.

template <typename T>
Var<T> conv2d_raw(const Var<T>& x, const Var<T>& w, int64_t stride, int64_t pad);
template <typename T>
Var<T> conv2d_input_grad(const Var<T>& gy, const Var<T>& w, int64_t stride, int64_t pad,
                         int64_t h, int64_t w_in);
template <typename T>
Var<T> conv2d_weight_grad(const Var<T>& x, const Var<T>& gy, int64_t stride, int64_t pad,
                          int64_t k);

template <typename T>
kn::Conv2dGeom conv_geom(const std::vector<int64_t>& xs, const std::vector<int64_t>& ws,
                         int64_t stride, int64_t pad) {
  if (xs.size() != 4 || ws.size() != 4) throw std::invalid_argument("conv2d: 4D tensors required");
  if (xs[1] != ws[1]) throw std::invalid_argument("conv2d: channel mismatch");
  if (ws[2] != ws[3]) throw std::invalid_argument("conv2d: square kernels only");
  kn::Conv2dGeom g;
  g.n = xs[0];
  g.ci = xs[1];
  g.h = xs[2];
  g.w = xs[3];
  g.co = ws[0];
  g.k = ws[2];
  g.stride = stride;
  g.pad = pad;
  if (g.oh() < 1 || g.ow() < 1) throw std::invalid_argument("conv2d: empty output");
  return g;
}

template <typename T>
Var<T> conv2d_raw(const Var<T>& x, const Var<T>& w, int64_t stride, int64_t pad) {
  auto g = conv_geom<T>(x->value.shape(), w->value.shape(), stride, pad);
  Tensor<T> out({g.n, g.co, g.oh(), g.ow()});
  kn::conv2d_fwd(g, x->value.data(), w->value.data(), out.data());
  const int64_t h = g.h, w_in = g.w, k = g.k;
  return make_node<T>(std::move(out), {x, w},
                      {[w, stride, pad, h, w_in](const Var<T>& gy) {
                         return conv2d_input_grad(gy, w, stride, pad, h, w_in);
                       },
                       [x, stride, pad, k](const Var<T>& gy) {
                         return conv2d_weight_grad(x, gy, stride, pad, k);
                       }},
                      "conv2d");
}

// Adjoint of conv2d_raw w.r.t. its input; doubles as transposed-convolution
// forward (weight layout [ci_of_output, co_of_conv...] mirrors the conv).
template <typename T>
Var<T> conv2d_input_grad(const Var<T>& gy, const Var<T>& w, int64_t stride, int64_t pad,
                         int64_t h, int64_t w_in) {
  const auto& gys = gy->value.shape();
  const auto& ws = w->value.shape();
  if (gys.size() != 4 || ws.size() != 4)
    throw std::invalid_argument("conv2d_input_grad: 4D tensors required");
  kn::Conv2dGeom g;
  g.n = gys[0];
  g.ci = ws[1];
  g.h = h;
  g.w = w_in;
  g.co = ws[0];
  g.k = ws[2];
  g.stride = stride;
  g.pad = pad;
  if (gys[1] != g.co || gys[2] != g.oh() || gys[3] != g.ow())
    throw std::invalid_argument("conv2d_input_grad: geometry mismatch");
  Tensor<T> out({g.n, g.ci, h, w_in});
  kn::conv2d_bwd_input(g, gy->value.data(), w->value.data(), out.data());
  const int64_t k = g.k;
  return make_node<T>(std::move(out), {gy, w},
                      {[w, stride, pad](const Var<T>& u) { return conv2d_raw(u, w, stride, pad); },
                       [gy, stride, pad, k](const Var<T>& u) {
                         return conv2d_weight_grad(u, gy, stride, pad, k);
                       }},
                      "conv2d_input_grad");
}

// Adjoint of conv2d_raw w.r.t. its weight.
template <typename T>
Var<T> conv2d_weight_grad(const Var<T>& x, const Var<T>& gy, int64_t stride, int64_t pad,
                          int64_t k) {
  const auto& xs = x->value.shape();
  const auto& gys = gy->value.shape();
  kn::Conv2dGeom g;
  g.n = xs[0];
  g.ci = xs[1];
  g.h = xs[2];
  g.w = xs[3];
  g.co = gys[1];
  g.k = k;
  g.stride = stride;
  g.pad = pad;
  if (gys[0] != g.n || gys[2] != g.oh() || gys[3] != g.ow())
    throw std::invalid_argument("conv2d_weight_grad: geometry mismatch");
  Tensor<T> out({g.co, g.ci, k, k});
  kn::conv2d_bwd_weight(g, x->value.data(), gy->value.data(), out.data());
  const int64_t h = g.h, w_in = g.w;
  return make_node<T>(std::move(out), {x, gy},
                      {[gy, stride, pad, h, w_in](const Var<T>& u) {
                         return conv2d_input_grad(gy, u, stride, pad, h, w_in);
                       },
                       [x, stride, pad](const Var<T>& u) { return conv2d_raw(x, u, stride, pad); }},
                      "conv2d_weight_grad");
}

// ---- backward -------------------------------------------------------------

template <typename T>
using GradMap = std::unordered_map<const Node<T>*, Var<T>>;

// Reverse-mode sweep from `root` (seeded with ones). When `targets` is
// non-empty, only branches that can reach a target are evaluated; gradients
// for other nodes may be absent from the result.
template <typename T>
GradMap<T> backward(const Var<T>& root, const std::vector<Var<T>>& targets = {}) {
  // topological order via iterative DFS
  std::vector<Node<T>*> topo;
  std::unordered_set<Node<T>*> seen;
  std::unordered_map<Node<T>*, Var<T>> keep;  // keeps nodes alive by pointer
  {
    std::vector<std::pair<Var<T>, size_t>> stack;
    stack.emplace_back(root, 0);
    seen.insert(root.get());
    keep[root.get()] = root;
    while (!stack.empty()) {
      auto& [node, idx] = stack.back();
      if (idx < node->parents.size()) {
        Var<T> p = node->parents[idx++];
        if (p->requires_grad && !seen.count(p.get())) {
          seen.insert(p.get());
          keep[p.get()] = p;
          stack.emplace_back(std::move(p), 0);
        }
      } else {
        topo.push_back(node.get());
        stack.pop_back();
      }
    }
  }

  // needed set: nodes from which some target is reachable via parent edges
  std::unordered_set<const Node<T>*> needed;
  if (!targets.empty()) {
    std::unordered_set<const Node<T>*> target_set;
    for (const auto& t : targets) target_set.insert(t.get());
    // topo is post-order: parents appear before children
    for (Node<T>* n : topo) {
      if (target_set.count(n)) {
        needed.insert(n);
        continue;
      }
      for (const auto& p : n->parents)
        if (needed.count(p.get())) {
          needed.insert(n);
          break;
        }
    }
  }
  auto is_needed = [&](const Node<T>* n) { return targets.empty() || needed.count(n); };

  GradMap<T> grads;
  grads[root.get()] = constant(Tensor<T>::ones(root->value.shape()));

  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Node<T>* n = *it;
    auto git = grads.find(n);
    if (git == grads.end()) continue;
    const Var<T>& g = git->second;
    for (size_t i = 0; i < n->parents.size(); ++i) {
      const Var<T>& p = n->parents[i];
      if (!p->requires_grad || !is_needed(p.get())) continue;
      Var<T> contrib = n->pgrads[i](g);
      auto pit = grads.find(p.get());
      if (pit == grads.end())
        grads[p.get()] = std::move(contrib);
      else
        pit->second = add(pit->second, contrib);
    }
  }
  return grads;
}

}  // namespace ganbench::autodiff
