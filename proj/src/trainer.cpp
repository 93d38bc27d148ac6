#include "ganbench/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ganbench/errors.hpp"
#include "json.hpp"

namespace ganbench::trainer {

using nlohmann::json;
namespace ad = autodiff;
using gancore::Family;

TrainSpec::Resolved TrainSpec::resolve(Family f) const {
  const bool w = f == Family::mlp_wgan_gp || f == Family::conv_wgan_gp;
  Resolved r;
  r.optimizer = optimizer == "auto" ? (w ? "rmsprop" : "adam") : optimizer;
  r.learning_rate = learning_rate > 0.0 ? learning_rate : (w ? 5e-5 : 2e-4);
  r.critic_steps = critic_steps_per_gen > 0 ? critic_steps_per_gen : (w ? 5 : 1);
  return r;
}

void TrainSpec::validate() const {
  if (max_steps < 0) throw std::invalid_argument("train: max_steps must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (window < 1) throw std::invalid_argument("train: window must be >= 1");
  if (band <= 0.0) throw std::invalid_argument("train: band must be positive");
  if (optimizer != "auto" && optimizer != "adam" && optimizer != "rmsprop")
    throw std::invalid_argument("train: unknown optimizer " + optimizer);
}

std::string TrainSpec::to_json_string() const {
  json j;
  j["optimizer"] = optimizer;
  j["learning_rate"] = learning_rate;
  j["critic_steps_per_gen"] = critic_steps_per_gen;
  j["max_steps"] = max_steps;
  j["batch_size"] = batch_size;
  j["seed"] = seed;
  j["window"] = window;
  j["band"] = band;
  j["lambda_gp"] = lambda_gp;
  j["checkpoint_every"] = checkpoint_every;
  j["snapshot_every"] = snapshot_every;
  j["snapshot_count"] = snapshot_count;
  j["deterministic"] = deterministic;
  return j.dump();
}

TrainSpec TrainSpec::from_json_string(const std::string& s) {
  json j = json::parse(s);
  TrainSpec t;
  t.optimizer = j.value("optimizer", "auto");
  t.learning_rate = j.value("learning_rate", 0.0);
  t.critic_steps_per_gen = j.value("critic_steps_per_gen", 0);
  t.max_steps = j.value("max_steps", 150000LL);
  t.batch_size = j.value("batch_size", 64LL);
  t.seed = j.value("seed", 1ULL);
  t.window = j.value("window", 2000LL);
  t.band = j.value("band", 0.05);
  t.lambda_gp = j.value("lambda_gp", 10.0);
  t.checkpoint_every = j.value("checkpoint_every", 5000LL);
  t.snapshot_every = j.value("snapshot_every", 5000LL);
  t.snapshot_count = j.value("snapshot_count", 64LL);
  t.deterministic = j.value("deterministic", false);
  t.validate();
  return t;
}

int64_t TrainHistory::gen_records() const {
  int64_t n = 0;
  for (const auto& r : records) n += r.role == 'g';
  return n;
}

int64_t TrainHistory::critic_records() const {
  int64_t n = 0;
  for (const auto& r : records) n += r.role == 'd';
  return n;
}

void TrainHistory::to_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "step,role,loss,accuracy,wall_ms\n";
  f.precision(9);
  for (const auto& r : records) {
    f << r.step << ',' << r.role << ',' << r.loss << ',';
    if (std::isfinite(r.accuracy)) f << r.accuracy;
    f << ',' << r.wall_ms << '\n';
  }
}

TrainHistory TrainHistory::from_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  TrainHistory h;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    HistoryRecord r;
    std::istringstream is(line);
    std::string field;
    std::getline(is, field, ',');
    r.step = std::stoll(field);
    std::getline(is, field, ',');
    r.role = field.empty() ? '?' : field[0];
    std::getline(is, field, ',');
    r.loss = std::stod(field);
    std::getline(is, field, ',');
    r.accuracy = field.empty() ? std::nan("") : std::stod(field);
    std::getline(is, field, ',');
    r.wall_ms = field.empty() ? 0.0 : std::stod(field);
    h.records.push_back(r);
  }
  return h;
}

bool convergence_check(const TrainHistory& h, int64_t window, double band) {
  if (window < 1) return false;
  if (!h.wasserstein) {
    std::vector<double> acc;
    for (auto it = h.records.rbegin(); it != h.records.rend(); ++it) {
      if (it->role != 'd') continue;
      if (!std::isfinite(it->accuracy)) return false;
      acc.push_back(it->accuracy);
      if (static_cast<int64_t>(acc.size()) == window) break;
    }
    if (static_cast<int64_t>(acc.size()) < window) return false;  // indeterminate
    double mean = 0.0, max_dev = 0.0;
    for (double a : acc) {
      mean += a;
      max_dev = std::max(max_dev, std::abs(a - 0.5));
    }
    mean /= static_cast<double>(acc.size());
    return std::abs(mean - 0.5) <= band && max_dev <= 2.0 * band;
  }
  std::vector<double> losses;
  for (auto it = h.records.rbegin(); it != h.records.rend(); ++it) {
    if (it->role != 'd') continue;
    losses.push_back(std::abs(it->loss));
    if (static_cast<int64_t>(losses.size()) == 2 * window) break;
  }
  if (static_cast<int64_t>(losses.size()) < 2 * window) return false;
  double m1 = 0.0, m0 = 0.0;
  for (int64_t i = 0; i < window; ++i) m1 += losses[static_cast<size_t>(i)];
  for (int64_t i = window; i < 2 * window; ++i) m0 += losses[static_cast<size_t>(i)];
  m1 /= static_cast<double>(window);
  m0 /= static_cast<double>(window);
  return std::abs(m1 - m0) / std::max(std::abs(m0), 1e-12) < band;
}

TrainData TrainData::from_points(const pointgen::PointDataset& ds) {
  auto norm = pointgen::normalize_points(ds);
  TrainData d;
  d.is_image = false;
  d.denorm = norm.transform;
  d.tensor = core::Tensor<float>({ds.n(), ds.d()});
  for (int64_t i = 0; i < ds.n() * ds.d(); ++i)
    d.tensor[i] = static_cast<float>(norm.ds.points[i]);
  return d;
}

TrainData TrainData::from_images(const scenegen::ImageDataset& ds) {
  TrainData d;
  d.is_image = true;
  d.denorm = pointgen::AffineTransform::make_identity();
  d.tensor = ds.images.clone();
  return d;
}

std::pair<std::unique_ptr<nn::Optimizer<float>>, std::unique_ptr<nn::Optimizer<float>>>
make_optimizers(Family f, const TrainSpec& ts) {
  const auto r = ts.resolve(f);
  auto mk = [&]() -> std::unique_ptr<nn::Optimizer<float>> {
    if (r.optimizer == "rmsprop")
      return std::make_unique<nn::RMSProp<float>>(static_cast<float>(r.learning_rate));
    return std::make_unique<nn::Adam<float>>(static_cast<float>(r.learning_rate));
  };
  return {mk(), mk()};
}

namespace {

struct BackendGuard {
  core::kernels::Backend saved;
  explicit BackendGuard(bool deterministic) : saved(core::kernels::backend()) {
    if (deterministic) core::kernels::set_backend(core::kernels::Backend::serial);
  }
  ~BackendGuard() { core::kernels::set_backend(saved); }
};

core::Tensor<float> gather_batch(const core::Tensor<float>& data, int64_t batch, core::Rng& rng) {
  const int64_t n = data.dim(0);
  const int64_t per = data.size() / n;
  std::vector<int64_t> shape = data.shape();
  shape[0] = batch;
  core::Tensor<float> out(shape);
  for (int64_t i = 0; i < batch; ++i) {
    const int64_t src = static_cast<int64_t>(rng.below(static_cast<uint64_t>(n)));
    std::copy(data.begin() + src * per, data.begin() + (src + 1) * per, out.begin() + i * per);
  }
  return out;
}

core::Tensor<float> draw_latent(int64_t batch, int64_t dim, core::Rng& rng) {
  core::Tensor<float> z({batch, dim});
  for (int64_t i = 0; i < z.size(); ++i) z[i] = static_cast<float>(rng.normal());
  return z;
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

core::Tensor<float> snapshot_samples(const nn::Net<float>& generator, int64_t n, uint64_t seed,
                                     const pointgen::AffineTransform& denorm) {
  if (n < 0) throw std::invalid_argument("snapshot_samples: negative n");
  core::Rng rng(core::derive_stream(seed, 0));
  const int64_t latent = generator.input_shape.at(0);
  auto z = draw_latent(n, latent, rng);
  nn::Ctx<float> ctx;
  ctx.training = false;
  auto out = generator.forward(ad::constant(std::move(z)), ctx);
  core::Tensor<float> samples = out->value.clone();
  if (!denorm.identity && samples.ndim() == 2) denorm.invert_inplace(samples);
  return samples;
}

TrainResult train_model(gancore::GanModel<float> model,
                        std::unique_ptr<nn::Optimizer<float>> gopt,
                        std::unique_ptr<nn::Optimizer<float>> copt, const TrainSpec& ts,
                        const TrainData& data, const Sinks& sinks, const TrainOptions& opt) {
  ts.validate();
  if (data.n() < 1) throw std::invalid_argument("train: empty dataset");
  if (ts.batch_size > data.n())
    throw std::invalid_argument("train: batch_size exceeds dataset size");
  {
    float lo = 0.0f, hi = 0.0f;
    for (int64_t i = 0; i < data.tensor.size(); ++i) {
      lo = std::min(lo, data.tensor[i]);
      hi = std::max(hi, data.tensor[i]);
    }
    if (lo < -1.0f - 1e-5f || hi > 1.0f + 1e-5f)
      throw std::invalid_argument("train: data must be normalized to the generator range [-1,1]");
  }
  {
    const auto want = model.spec.data_shape();
    const auto& have = data.tensor.shape();
    if (static_cast<size_t>(data.tensor.ndim()) != want.size() + 1 ||
        !std::equal(want.begin(), want.end(), have.begin() + 1))
      throw std::invalid_argument("train: model/data shape mismatch");
  }

  BackendGuard backend_guard(ts.deterministic);
  const auto resolved = ts.resolve(model.spec.family);
  const bool wasserstein = model.spec.is_wasserstein();
  const int64_t latent = model.spec.resolved_latent();

  core::Rng batch_rng(core::derive_stream(ts.seed, 1));
  core::Rng latent_rng(core::derive_stream(ts.seed, 2));
  core::Rng dropout_rng(core::derive_stream(ts.seed, 3));
  core::Rng gp_rng(core::derive_stream(ts.seed, 4));

  auto gparams = model.generator.named_params();
  auto cparams = model.critic.named_params();
  std::vector<ad::Var<float>> gtargets, ctargets;
  for (auto& p : gparams) gtargets.push_back(p.var);
  for (auto& p : cparams) ctargets.push_back(p.var);

  TrainResult res;
  res.history.wasserstein = wasserstein;
  res.history.transfer = opt.transfer;
  int64_t update_idx = opt.start_gen_step * (resolved.critic_steps + 1);
  std::string last_checkpoint;

  auto do_checkpoint = [&](int64_t gen_step, const std::string& tag) {
    if (sinks.checkpoint)
      last_checkpoint = sinks.checkpoint(model, *gopt, *copt, gen_step, tag);
  };
  auto do_snapshot = [&](int64_t gen_step) {
    if (sinks.snapshot) {
      auto s = snapshot_samples(model.generator, ts.snapshot_count,
                                core::derive_stream(ts.seed, 500 + static_cast<uint64_t>(gen_step)),
                                data.denorm);
      sinks.snapshot(gen_step, s);
    }
  };
  auto guard_finite = [&](double v, const char* what, int64_t gen_step) {
    if (std::isfinite(v)) return;
    std::string ref = last_checkpoint.empty() ? "none" : last_checkpoint;
    throw NumericError(std::string(what) + " became non-finite at generator step " +
                       std::to_string(gen_step) + "; last good checkpoint: " + ref);
  };

  nn::Ctx<float> ctx;
  ctx.training = true;
  ctx.rng = &dropout_rng;

  std::string stop_reason = "max_steps";
  int64_t gen_step = opt.start_gen_step;
  const int64_t end_step = opt.start_gen_step + ts.max_steps;

  while (gen_step < end_step) {
    // critic updates
    for (int c = 0; c < resolved.critic_steps; ++c) {
      const double t0 = now_ms();
      auto real = gather_batch(data.tensor, ts.batch_size, batch_rng);
      auto z = draw_latent(ts.batch_size, latent, latent_rng);
      auto fake = model.generator.forward(ad::constant(std::move(z)), ctx);
      auto c_real = model.critic.forward(ad::constant(real.clone()), ctx);
      auto c_fake = model.critic.forward(fake, ctx);

      double loss_v, acc = std::nan("");
      ad::Var<float> loss;
      if (wasserstein) {
        auto wl = gancore::wasserstein_losses(c_real, c_fake);
        auto gp = gancore::gradient_penalty(model.critic, real, fake->value,
                                            static_cast<float>(ts.lambda_gp), gp_rng, ctx);
        loss = ad::add(wl.c_loss, gp);
      } else {
        auto vl = gancore::vanilla_losses(c_real, c_fake);
        loss = vl.d_loss;
        acc = gancore::discriminator_accuracy(c_real->value, c_fake->value);
      }
      loss_v = static_cast<double>(loss->scalar());
      guard_finite(loss_v, "critic loss", gen_step);
      auto grads = ad::backward(loss, ctargets);
      copt->step(cparams, grads);
      res.history.records.push_back({update_idx++, 'd', loss_v, acc, now_ms() - t0});
    }

    // generator update
    {
      const double t0 = now_ms();
      auto z = draw_latent(ts.batch_size, latent, latent_rng);
      auto fake = model.generator.forward(ad::constant(std::move(z)), ctx);
      auto score = model.critic.forward(fake, ctx);
      ad::Var<float> loss;
      if (wasserstein) {
        loss = ad::neg(ad::mean_all(score));
      } else {
        auto s = ad::clamp(score, 1e-7f, 1.0f - 1e-7f);
        loss = ad::neg(ad::mean_all(ad::log_op(s)));
      }
      const double loss_v = static_cast<double>(loss->scalar());
      guard_finite(loss_v, "generator loss", gen_step);
      auto grads = ad::backward(loss, gtargets);
      gopt->step(gparams, grads);
      res.history.records.push_back({update_idx++, 'g', loss_v, std::nan(""), now_ms() - t0});
    }

    ++gen_step;
    if (ts.checkpoint_every > 0 && gen_step % ts.checkpoint_every == 0 && gen_step < end_step)
      do_checkpoint(gen_step, "periodic");
    if (ts.snapshot_every > 0 && gen_step % ts.snapshot_every == 0 && gen_step < end_step)
      do_snapshot(gen_step);

    if (convergence_check(res.history, ts.window, ts.band)) {
      stop_reason = "converged";
      break;
    }
  }

  do_checkpoint(gen_step, "final");
  if (ts.max_steps > 0) do_snapshot(gen_step);
  res.model = std::move(model);
  res.stop_reason = ts.max_steps == 0 ? "max_steps" : stop_reason;
  res.gen_steps = gen_step;
  res.last_checkpoint = last_checkpoint;
  return res;
}

TrainResult train(const gancore::ModelSpec& ms, const TrainSpec& ts, const TrainData& data,
                  const Sinks& sinks) {
  ms.validate();
  auto model = gancore::build_model<float>(ms, core::derive_stream(ts.seed, 0));
  auto [gopt, copt] = make_optimizers(ms.family, ts);
  return train_model(std::move(model), std::move(gopt), std::move(copt), ts, data, sinks, {});
}

TrainResult transfer_finetune(const io::LoadedCheckpoint& ck, const TrainData& new_data,
                              const TrainSpec& ts, const Sinks& sinks) {
  const auto want = ck.spec.data_shape();
  const auto& have = new_data.tensor.shape();
  if (static_cast<size_t>(new_data.tensor.ndim()) != want.size() + 1 ||
      !std::equal(want.begin(), want.end(), have.begin() + 1))
    throw IncompatibleCheckpointError(
        "transfer: checkpoint data shape is incompatible with the target dataset");
  auto model = gancore::build_model<float>(ck.spec, core::derive_stream(ts.seed, 0));
  io::apply_checkpoint(ck, model);  // weights only; fresh optimizers for fine-tuning
  auto [gopt, copt] = make_optimizers(ck.spec.family, ts);
  TrainOptions opt;
  opt.transfer = true;
  return train_model(std::move(model), std::move(gopt), std::move(copt), ts, new_data, sinks, opt);
}

}  // namespace ganbench::trainer
