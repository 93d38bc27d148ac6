#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ganbench/core/autodiff.hpp"
#include "ganbench/core/rng.hpp"

namespace ganbench::nn {

using autodiff::Var;
using core::Rng;
using core::Tensor;

template <typename T>
struct Ctx {
  bool training = false;
  Rng* rng = nullptr;  // consumed by Dropout in training mode
};

template <typename T>
struct ParamRef {
  std::string name;
  Var<T> var;
};

// Non-trainable state (batch-norm running statistics).
template <typename T>
struct BufferRef {
  std::string name;
  Tensor<T>* tensor;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Var<T> forward(const Var<T>& x, Ctx<T>& ctx) = 0;
  virtual const char* kind() const = 0;
  virtual void collect_params(const std::string&, std::vector<ParamRef<T>>&) {}
  virtual void collect_buffers(const std::string&, std::vector<BufferRef<T>>&) {}
};

namespace init {
// Glorot-uniform for dense layers, N(0, 0.02) for convolutions (the usual
// DCGAN choice). Draw order is fixed so (spec, seed) pins every weight.
template <typename T>
Tensor<T> glorot_uniform(std::vector<int64_t> shape, int64_t fan_in, int64_t fan_out, Rng& rng) {
  Tensor<T> t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(-limit, limit));
  return t;
}
template <typename T>
Tensor<T> normal(std::vector<int64_t> shape, double mean, double std, Rng& rng) {
  Tensor<T> t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(mean + std * rng.normal());
  return t;
}
}  // namespace init

template <typename T>
class Dense : public Layer<T> {
 public:
  Dense(int64_t in, int64_t out, Rng& rng)
      : w_(autodiff::parameter(init::glorot_uniform<T>({in, out}, in, out, rng))),
        b_(autodiff::parameter(Tensor<T>::zeros({1, out}))) {}

  Var<T> forward(const Var<T>& x, Ctx<T>&) override {
    return autodiff::add(autodiff::matmul(x, w_), b_);
  }
  const char* kind() const override { return "Dense"; }
  void collect_params(const std::string& p, std::vector<ParamRef<T>>& out) override {
    out.push_back({p + ".W", w_});
    out.push_back({p + ".b", b_});
  }

 private:
  Var<T> w_, b_;
};

template <typename T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(int64_t ci, int64_t co, int64_t k, int64_t stride, int64_t pad, Rng& rng)
      : stride_(stride), pad_(pad), co_(co),
        w_(autodiff::parameter(init::normal<T>({co, ci, k, k}, 0.0, 0.02, rng))),
        b_(autodiff::parameter(Tensor<T>::zeros({co}))) {}

  Var<T> forward(const Var<T>& x, Ctx<T>&) override {
    auto y = autodiff::conv2d_raw(x, w_, stride_, pad_);
    return autodiff::add(y, autodiff::reshape(b_, {1, co_, 1, 1}));
  }
  const char* kind() const override { return "Conv2D"; }
  void collect_params(const std::string& p, std::vector<ParamRef<T>>& out) override {
    out.push_back({p + ".W", w_});
    out.push_back({p + ".b", b_});
  }

 private:
  int64_t stride_, pad_, co_;
  Var<T> w_, b_;
};

template <typename T>
class ConvTranspose2d : public Layer<T> {
 public:
  // Weight layout [ci, co, k, k]: the layer runs the adjoint of a stride-s
  // convolution, so H_out = (H-1)*stride - 2*pad + k.
  ConvTranspose2d(int64_t ci, int64_t co, int64_t k, int64_t stride, int64_t pad, Rng& rng)
      : k_(k), stride_(stride), pad_(pad), co_(co),
        w_(autodiff::parameter(init::normal<T>({ci, co, k, k}, 0.0, 0.02, rng))),
        b_(autodiff::parameter(Tensor<T>::zeros({co}))) {}

  Var<T> forward(const Var<T>& x, Ctx<T>&) override {
    const auto& s = x->value.shape();
    const int64_t oh = (s[2] - 1) * stride_ - 2 * pad_ + k_;
    const int64_t ow = (s[3] - 1) * stride_ - 2 * pad_ + k_;
    auto y = autodiff::conv2d_input_grad(x, w_, stride_, pad_, oh, ow);
    return autodiff::add(y, autodiff::reshape(b_, {1, co_, 1, 1}));
  }
  const char* kind() const override { return "TransposedConv2D"; }
  void collect_params(const std::string& p, std::vector<ParamRef<T>>& out) override {
    out.push_back({p + ".W", w_});
    out.push_back({p + ".b", b_});
  }

 private:
  int64_t k_, stride_, pad_, co_;
  Var<T> w_, b_;
};

template <typename T>
class BatchNorm2d : public Layer<T> {
 public:
  explicit BatchNorm2d(int64_t c, Rng& rng, T momentum = T(0.1), T eps = T(1e-5))
      : c_(c), momentum_(momentum), eps_(eps),
        gamma_(autodiff::parameter(init::normal<T>({c}, 1.0, 0.02, rng))),
        beta_(autodiff::parameter(Tensor<T>::zeros({c}))),
        running_mean_(Tensor<T>::zeros({c})), running_var_(Tensor<T>::ones({c})) {}

  Var<T> forward(const Var<T>& x, Ctx<T>& ctx) override {
    namespace ad = autodiff;
    auto g = ad::reshape(gamma_, {1, c_, 1, 1});
    auto b = ad::reshape(beta_, {1, c_, 1, 1});
    if (ctx.training) {
      auto mu = ad::reduce_mean(x, {0, 2, 3});
      auto xc = ad::sub(x, mu);
      auto var = ad::reduce_mean(ad::mul(xc, xc), {0, 2, 3});
      // running stats track the batch statistics outside the graph
      for (int64_t c = 0; c < c_; ++c) {
        running_mean_[c] = (T(1) - momentum_) * running_mean_[c] + momentum_ * mu->value[c];
        running_var_[c] = (T(1) - momentum_) * running_var_[c] + momentum_ * var->value[c];
      }
      auto xhat = ad::div(xc, ad::sqrt_op(ad::add_scalar(var, eps_)));
      return ad::add(ad::mul(xhat, g), b);
    }
    auto rm = ad::constant(running_mean_.clone().reshaped({1, c_, 1, 1}));
    auto rv = ad::constant(running_var_.clone().reshaped({1, c_, 1, 1}));
    auto xhat = ad::div(ad::sub(x, rm), ad::sqrt_op(ad::add_scalar(rv, eps_)));
    return ad::add(ad::mul(xhat, g), b);
  }
  const char* kind() const override { return "BatchNorm"; }
  void collect_params(const std::string& p, std::vector<ParamRef<T>>& out) override {
    out.push_back({p + ".gamma", gamma_});
    out.push_back({p + ".beta", beta_});
  }
  void collect_buffers(const std::string& p, std::vector<BufferRef<T>>& out) override {
    out.push_back({p + ".running_mean", &running_mean_});
    out.push_back({p + ".running_var", &running_var_});
  }

 private:
  int64_t c_;
  T momentum_, eps_;
  Var<T> gamma_, beta_;
  Tensor<T> running_mean_, running_var_;
};

template <typename T>
class Dropout : public Layer<T> {
 public:
  explicit Dropout(T rate) : rate_(rate) {}

  Var<T> forward(const Var<T>& x, Ctx<T>& ctx) override {
    if (!ctx.training || rate_ <= T(0)) return x;
    if (!ctx.rng) throw std::logic_error("Dropout: training forward without rng");
    Tensor<T> mask(x->value.shape());
    const T keep = T(1) - rate_;
    for (int64_t i = 0; i < mask.size(); ++i)
      mask[i] = ctx.rng->uniform() < static_cast<double>(rate_) ? T(0) : T(1) / keep;
    return autodiff::mul(x, autodiff::constant(std::move(mask)));
  }
  const char* kind() const override { return "Dropout"; }

 private:
  T rate_;
};

template <typename T>
class LeakyReLU : public Layer<T> {
 public:
  explicit LeakyReLU(T slope) : slope_(slope) {}
  Var<T> forward(const Var<T>& x, Ctx<T>&) override { return autodiff::leaky_relu(x, slope_); }
  const char* kind() const override { return "LeakyReLU"; }

 private:
  T slope_;
};

template <typename T>
class ReLU : public Layer<T> {
 public:
  Var<T> forward(const Var<T>& x, Ctx<T>&) override { return autodiff::relu(x); }
  const char* kind() const override { return "ReLU"; }
};

template <typename T>
class Tanh : public Layer<T> {
 public:
  Var<T> forward(const Var<T>& x, Ctx<T>&) override { return autodiff::tanh_op(x); }
  const char* kind() const override { return "Tanh"; }
};

template <typename T>
class Sigmoid : public Layer<T> {
 public:
  Var<T> forward(const Var<T>& x, Ctx<T>&) override { return autodiff::sigmoid(x); }
  const char* kind() const override { return "Sigmoid"; }
};

template <typename T>
class Reshape : public Layer<T> {
 public:
  explicit Reshape(std::vector<int64_t> per_sample) : per_sample_(std::move(per_sample)) {}
  Var<T> forward(const Var<T>& x, Ctx<T>&) override {
    std::vector<int64_t> s{x->value.dim(0)};
    s.insert(s.end(), per_sample_.begin(), per_sample_.end());
    return autodiff::reshape(x, std::move(s));
  }
  const char* kind() const override { return "Reshape"; }

 private:
  std::vector<int64_t> per_sample_;
};

template <typename T>
class Flatten : public Layer<T> {
 public:
  Var<T> forward(const Var<T>& x, Ctx<T>&) override {
    return autodiff::reshape(x, {x->value.dim(0), -1});
  }
  const char* kind() const override { return "Flatten"; }
};

// Sequential container; also carries the metadata the GAN code needs.
template <typename T>
class Net {
 public:
  std::vector<std::unique_ptr<Layer<T>>> layers;
  bool has_output_sigmoid = false;
  std::vector<int64_t> input_shape;   // per-sample, excl. batch
  std::vector<int64_t> output_shape;  // per-sample, excl. batch

  Var<T> forward(Var<T> x, Ctx<T>& ctx) const {
    for (const auto& l : layers) x = l->forward(x, ctx);
    return x;
  }

  std::vector<std::string> layer_kinds() const {
    std::vector<std::string> out;
    out.reserve(layers.size());
    for (const auto& l : layers) out.emplace_back(l->kind());
    return out;
  }

  std::vector<ParamRef<T>> named_params() const {
    std::vector<ParamRef<T>> out;
    for (size_t i = 0; i < layers.size(); ++i)
      layers[i]->collect_params(std::to_string(i) + "." + layers[i]->kind(), out);
    return out;
  }

  std::vector<BufferRef<T>> named_buffers() const {
    std::vector<BufferRef<T>> out;
    for (size_t i = 0; i < layers.size(); ++i)
      layers[i]->collect_buffers(std::to_string(i) + "." + layers[i]->kind(), out);
    return out;
  }

  int64_t param_count() const {
    int64_t n = 0;
    for (const auto& p : named_params()) n += p.var->value.size();
    return n;
  }
};

// ---- optimizers -------------------------------------------------------

template <typename T>
bool all_finite(const Tensor<T>& t) {
  for (int64_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(static_cast<double>(t[i]))) return false;
  return true;
}

template <typename T>
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(const std::vector<ParamRef<T>>& params, autodiff::GradMap<T>& grads) = 0;
  // Flat state for checkpointing, keyed by "<slot>/<param name>".
  virtual std::vector<std::pair<std::string, Tensor<T>>> state() const = 0;
  virtual void load_state(const std::unordered_map<std::string, Tensor<T>>& st) = 0;
};

template <typename T>
class Adam : public Optimizer<T> {
 public:
  explicit Adam(T lr, T beta1 = T(0.5), T beta2 = T(0.999), T eps = T(1e-8))
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(const std::vector<ParamRef<T>>& params, autodiff::GradMap<T>& grads) override {
    ++t_;
    const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(b1_), t_));
    const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(b2_), t_));
    for (const auto& p : params) {
      auto git = grads.find(p.var.get());
      if (git == grads.end()) continue;
      const Tensor<T>& g = git->second->value;
      auto& slot = slots_[p.name];
      if (slot.m.size() == 0) {
        slot.m = Tensor<T>::zeros(g.shape());
        slot.v = Tensor<T>::zeros(g.shape());
      }
      Tensor<T>& w = p.var->value;
      for (int64_t i = 0; i < w.size(); ++i) {
        slot.m[i] = b1_ * slot.m[i] + (T(1) - b1_) * g[i];
        slot.v[i] = b2_ * slot.v[i] + (T(1) - b2_) * g[i] * g[i];
        const T mhat = slot.m[i] / bc1;
        const T vhat = slot.v[i] / bc2;
        w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  std::vector<std::pair<std::string, Tensor<T>>> state() const override {
    std::vector<std::pair<std::string, Tensor<T>>> out;
    out.emplace_back("t", Tensor<T>::scalar(static_cast<T>(t_)));
    for (const auto& [name, slot] : slots_) {
      out.emplace_back("m/" + name, slot.m);
      out.emplace_back("v/" + name, slot.v);
    }
    return out;
  }
  void load_state(const std::unordered_map<std::string, Tensor<T>>& st) override {
    slots_.clear();
    for (const auto& [k, v] : st) {
      if (k == "t")
        t_ = static_cast<int64_t>(v[0]);
      else if (k.rfind("m/", 0) == 0)
        slots_[k.substr(2)].m = v.clone();
      else if (k.rfind("v/", 0) == 0)
        slots_[k.substr(2)].v = v.clone();
    }
  }

 private:
  struct Slot {
    Tensor<T> m, v;
  };
  T lr_, b1_, b2_, eps_;
  int64_t t_ = 0;
  std::unordered_map<std::string, Slot> slots_;
};

template <typename T>
class RMSProp : public Optimizer<T> {
 public:
  explicit RMSProp(T lr, T decay = T(0.9), T eps = T(1e-8)) : lr_(lr), decay_(decay), eps_(eps) {}

  void step(const std::vector<ParamRef<T>>& params, autodiff::GradMap<T>& grads) override {
    for (const auto& p : params) {
      auto git = grads.find(p.var.get());
      if (git == grads.end()) continue;
      const Tensor<T>& g = git->second->value;
      Tensor<T>& acc = acc_[p.name];
      if (acc.size() == 0) acc = Tensor<T>::zeros(g.shape());
      Tensor<T>& w = p.var->value;
      for (int64_t i = 0; i < w.size(); ++i) {
        acc[i] = decay_ * acc[i] + (T(1) - decay_) * g[i] * g[i];
        w[i] -= lr_ * g[i] / (std::sqrt(acc[i]) + eps_);
      }
    }
  }

  std::vector<std::pair<std::string, Tensor<T>>> state() const override {
    std::vector<std::pair<std::string, Tensor<T>>> out;
    for (const auto& [name, acc] : acc_) out.emplace_back("acc/" + name, acc);
    return out;
  }
  void load_state(const std::unordered_map<std::string, Tensor<T>>& st) override {
    acc_.clear();
    for (const auto& [k, v] : st)
      if (k.rfind("acc/", 0) == 0) acc_[k.substr(4)] = v.clone();
  }

 private:
  T lr_, decay_, eps_;
  std::unordered_map<std::string, Tensor<T>> acc_;
};

}  // namespace ganbench::nn
