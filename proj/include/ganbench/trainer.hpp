#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ganbench/core/tensor.hpp"
#include "ganbench/gancore.hpp"
#include "ganbench/io.hpp"
#include "ganbench/pointgen.hpp"
#include "ganbench/scenegen.hpp"

namespace ganbench::trainer {

// Training protocol: Wasserstein families default to RMSProp @ 5e-5 with 5
// critic updates per generator update; the others to Adam @ 2e-4 with 1.
// max_steps counts generator updates.
struct TrainSpec {
  std::string optimizer = "auto";  // auto | adam | rmsprop
  double learning_rate = 0.0;      // 0 = family default
  int critic_steps_per_gen = 0;    // 0 = family default
  int64_t max_steps = 150000;
  int64_t batch_size = 64;
  uint64_t seed = 1;
  int64_t window = 2000;  // convergence window, in recorded critic updates
  double band = 0.05;
  double lambda_gp = 10.0;
  int64_t checkpoint_every = 5000;
  int64_t snapshot_every = 5000;
  int64_t snapshot_count = 64;
  bool deterministic = false;  // run on the serial reference kernels

  struct Resolved {
    std::string optimizer;
    double learning_rate;
    int critic_steps;
  };
  Resolved resolve(gancore::Family f) const;
  void validate() const;

  std::string to_json_string() const;
  static TrainSpec from_json_string(const std::string& s);
};

struct HistoryRecord {
  int64_t step = 0;   // global update index, monotone across roles
  char role = 'd';    // 'd' critic/discriminator, 'g' generator
  double loss = 0.0;
  double accuracy = 0.0;  // NaN for generator records and Wasserstein critics
  double wall_ms = 0.0;
};

struct TrainHistory {
  std::vector<HistoryRecord> records;
  bool wasserstein = false;
  bool transfer = false;

  int64_t gen_records() const;
  int64_t critic_records() const;

  void to_csv(const std::string& path) const;
  static TrainHistory from_csv(const std::string& path);
};

// GAN families: trailing-window mean accuracy within 0.5 +- band and every
// window entry within 0.5 +- 2*band. Wasserstein families: relative change
// between the means of |critic loss| over the last two windows below band.
// Not enough history -> false.
bool convergence_check(const TrainHistory& h, int64_t window, double band);

// Normalized training tensor plus the inverse map back to data coordinates.
struct TrainData {
  core::Tensor<float> tensor;  // [N,d] or [N,C,H,W], values in [-1,1]
  pointgen::AffineTransform denorm = pointgen::AffineTransform::make_identity();
  bool is_image = false;

  static TrainData from_points(const pointgen::PointDataset& ds);
  static TrainData from_images(const scenegen::ImageDataset& ds);
  int64_t n() const { return tensor.ndim() ? tensor.dim(0) : 0; }
};

struct Sinks {
  // Writes a checkpoint, returns its path (used in abort diagnostics).
  std::function<std::string(const gancore::GanModel<float>&, const nn::Optimizer<float>&,
                            const nn::Optimizer<float>&, int64_t gen_step, const std::string& tag)>
      checkpoint;
  std::function<void(int64_t gen_step, const core::Tensor<float>& samples)> snapshot;
};

struct TrainResult {
  gancore::GanModel<float> model;
  TrainHistory history;
  std::string stop_reason;  // "max_steps" | "converged"
  int64_t gen_steps = 0;
  std::string last_checkpoint;
};

struct TrainOptions {
  int64_t start_gen_step = 0;
  bool transfer = false;
};

// Fresh model from (spec, seed), then the alternating update loop.
TrainResult train(const gancore::ModelSpec& ms, const TrainSpec& ts, const TrainData& data,
                  const Sinks& sinks = {});

// Continue training an existing model (resume / transfer).
TrainResult train_model(gancore::GanModel<float> model,
                        std::unique_ptr<nn::Optimizer<float>> gopt,
                        std::unique_ptr<nn::Optimizer<float>> copt, const TrainSpec& ts,
                        const TrainData& data, const Sinks& sinks, const TrainOptions& opt);

std::pair<std::unique_ptr<nn::Optimizer<float>>, std::unique_ptr<nn::Optimizer<float>>>
make_optimizers(gancore::Family f, const TrainSpec& ts);

// Load generator+critic weights from the checkpoint and fine-tune on
// new_data with fresh optimizers; history is tagged as a transfer run.
// Shape-incompatible checkpoints raise IncompatibleCheckpointError before
// any training work.
TrainResult transfer_finetune(const io::LoadedCheckpoint& ck, const TrainData& new_data,
                              const TrainSpec& ts, const Sinks& sinks = {});

// n latent draws -> generator outputs, denormalized to data coordinates.
core::Tensor<float> snapshot_samples(const nn::Net<float>& generator, int64_t n, uint64_t seed,
                                     const pointgen::AffineTransform& denorm);

}  // namespace ganbench::trainer
