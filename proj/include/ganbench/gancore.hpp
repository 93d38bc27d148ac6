#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ganbench/core/nn.hpp"

namespace ganbench::gancore {

using autodiff::Var;
using core::Rng;
using core::Tensor;

enum class Family { mlp_gan, mlp_wgan_gp, dcgan, conv_wgan_gp };

std::string family_name(Family f);
Family family_from_name(const std::string& s);

constexpr int kImageSize = 28;

// Architecture description. The layer sequences are fixed per family; the
// widths/channel plans here fill in what the tables leave open.
struct ModelSpec {
  Family family = Family::mlp_gan;
  int latent_dim = 0;  // 0 resolves to 100 for images, point_dim for points
  std::vector<int> hidden = {128, 128, 128};
  std::vector<int> gen_channels = {128, 64, 32};      // reshape, tconv1 out, tconv2 out
  std::vector<int> disc_channels = {32, 64, 128, 128};
  int point_dim = 2;
  int image_channels = 1;
  double leaky_slope = 0.2;
  double dropout = 0.3;
  bool critic_batchnorm = true;  // Table 5 prints BatchNorm in the critic; switchable

  bool is_image() const { return family == Family::dcgan || family == Family::conv_wgan_gp; }
  bool is_wasserstein() const {
    return family == Family::mlp_wgan_gp || family == Family::conv_wgan_gp;
  }
  int resolved_latent() const {
    if (latent_dim > 0) return latent_dim;
    return is_image() ? 100 : point_dim;
  }
  std::vector<int64_t> data_shape() const {
    if (is_image()) return {image_channels, kImageSize, kImageSize};
    return {point_dim};
  }
  void validate() const;

  std::string to_json_string() const;
  static ModelSpec from_json_string(const std::string& s);
};

template <typename T>
struct GanModel {
  ModelSpec spec;
  nn::Net<T> generator;
  nn::Net<T> critic;  // discriminator for the non-Wasserstein families
};

// The printed layer rows of the architecture tables, used by tests to pin
// the built sequences. role: "generator" or "critic".
std::vector<std::string> table_rows(Family f, const std::string& role);

template <typename T>
GanModel<T> build_model(const ModelSpec& spec, uint64_t init_seed);

// ---- losses ----------------------------------------------------------

template <typename T>
struct VanillaLossResult {
  Var<T> d_loss;
  Var<T> g_loss;
  bool clamped = false;  // some score sat at 0/1 and was pulled to [eps, 1-eps]
};

// Cross-entropy adversarial losses on post-sigmoid scores; the generator
// uses the non-saturating form.
template <typename T>
VanillaLossResult<T> vanilla_losses(const Var<T>& d_real, const Var<T>& d_fake, T eps = T(1e-7)) {
  namespace ad = autodiff;
  bool clamped = false;
  for (const auto* v : {&d_real->value, &d_fake->value})
    for (int64_t i = 0; i < v->size(); ++i)
      if ((*v)[i] < eps || (*v)[i] > T(1) - eps) clamped = true;
  auto r = ad::clamp(d_real, eps, T(1) - eps);
  auto f = ad::clamp(d_fake, eps, T(1) - eps);
  VanillaLossResult<T> out;
  out.clamped = clamped;
  out.d_loss = ad::add(ad::neg(ad::mean_all(ad::log_op(r))),
                       ad::neg(ad::mean_all(ad::log_op(ad::add_scalar(ad::neg(f), T(1))))));
  out.g_loss = ad::neg(ad::mean_all(ad::log_op(f)));
  return out;
}

template <typename T>
struct WassersteinLossResult {
  Var<T> c_loss;
  Var<T> g_loss;
};

template <typename T>
WassersteinLossResult<T> wasserstein_losses(const Var<T>& c_real, const Var<T>& c_fake) {
  namespace ad = autodiff;
  WassersteinLossResult<T> out;
  out.c_loss = ad::sub(ad::mean_all(c_fake), ad::mean_all(c_real));
  out.g_loss = ad::neg(ad::mean_all(c_fake));
  return out;
}

// lambda * mean_i (||grad_{xhat_i} C(xhat)||_2 - 1)^2 on per-sample uniform
// interpolates between real and fake. The returned Var is differentiable
// w.r.t. the critic parameters (double backprop through the input gradient).
template <typename T>
Var<T> gradient_penalty(const nn::Net<T>& critic, const Tensor<T>& real, const Tensor<T>& fake,
                        T lambda, Rng& rng, nn::Ctx<T>& ctx) {
  namespace ad = autodiff;
  if (!real.same_shape(fake))
    throw std::invalid_argument("gradient_penalty: real/fake shape mismatch");
  if (real.dim(0) < 1) throw std::invalid_argument("gradient_penalty: empty batch");
  const int64_t n = real.dim(0);

  Tensor<T> xhat(real.shape());
  const int64_t per = real.size() / n;
  for (int64_t i = 0; i < n; ++i) {
    const T e = static_cast<T>(rng.uniform());
    for (int64_t j = 0; j < per; ++j)
      xhat[i * per + j] = e * real[i * per + j] + (T(1) - e) * fake[i * per + j];
  }
  auto x = ad::parameter(std::move(xhat));
  auto score = critic.forward(x, ctx);
  if (score->value.ndim() != 2 || score->value.dim(1) != 1)
    throw std::invalid_argument("gradient_penalty: critic must emit one score per sample");

  auto gmap = ad::backward(ad::sum_all(score), {x});
  auto gx = gmap.at(x.get());

  std::vector<int> axes;
  for (int i = 1; i < gx->value.ndim(); ++i) axes.push_back(i);
  auto sq = ad::reduce_sum(ad::mul(gx, gx), axes, false);  // [n, 1] collapsed -> [n]
  auto norm = ad::sqrt_op(ad::add_scalar(sq, T(1e-24)));
  auto dev = ad::add_scalar(norm, T(-1));
  return ad::scale(ad::mean_all(ad::mul(dev, dev)), lambda);
}

// Discriminator accuracy, the quantity the convergence check watches:
// (frac(real scored > 1/2) + frac(fake scored < 1/2)) / 2.
template <typename T>
double discriminator_accuracy(const Tensor<T>& d_real, const Tensor<T>& d_fake) {
  int64_t ok = 0;
  for (int64_t i = 0; i < d_real.size(); ++i) ok += d_real[i] > T(0.5);
  for (int64_t i = 0; i < d_fake.size(); ++i) ok += d_fake[i] < T(0.5);
  return static_cast<double>(ok) / static_cast<double>(d_real.size() + d_fake.size());
}

}  // namespace ganbench::gancore
