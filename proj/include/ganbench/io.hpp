#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>

#include "ganbench/core/tensor.hpp"
#include "ganbench/gancore.hpp"
#include "ganbench/pointgen.hpp"
#include "ganbench/scenegen.hpp"

namespace ganbench::io {

uint64_t fnv1a(const void* data, size_t len, uint64_t h = 14695981039346656037ULL);
uint64_t hash_string(const std::string& s);
uint64_t hash_file(const std::string& path);
std::string hex64(uint64_t v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
void ensure_dir(const std::string& path);

// ---- dataset files ---------------------------------------------------------
// <stem>.f32 holds the raw little-endian float32 payload (row-major matrix
// for points, NHWC tensor for images); <stem>.json is the sidecar with
// dims, generation parameters and metadata.

void save_point_dataset(const pointgen::PointDataset& ds, const std::string& stem,
                        const pointgen::AffineTransform* normalization = nullptr);
pointgen::PointDataset load_point_dataset(const std::string& stem,
                                          pointgen::AffineTransform* normalization_out = nullptr);

void save_image_dataset(const scenegen::ImageDataset& ds, const std::string& stem);
scenegen::ImageDataset load_image_dataset(const std::string& stem);

// ---- affine transform json ---------------------------------------------

std::string transform_to_json(const pointgen::AffineTransform& t);
pointgen::AffineTransform transform_from_json(const std::string& j);

// ---- PNG ----------------------------------------------------------------

void write_png_gray(const std::string& path, const uint8_t* pixels, int w, int h);
void write_png_rgb(const std::string& path, const uint8_t* pixels, int w, int h);

// [C,H,W] float in [-1,1] -> 8-bit PNG
void write_image_png(const std::string& path, const core::Tensor<float>& image);

// ---- checkpoints ----------------------------------------------------------
// Versioned container: magic, version, model-spec hash, meta JSON, then
// named float32 blobs ("g."/"c." parameters, "gbuf."/"cbuf." buffers,
// "gopt."/"copt." optimizer slots). Loading validates the spec hash.

struct CheckpointMeta {
  int64_t step = 0;
  std::string extra_json = "{}";  // stop reason, dataset hash, transfer source, ...
};

void save_checkpoint(const std::string& path, const gancore::GanModel<float>& model,
                     const nn::Optimizer<float>* gopt, const nn::Optimizer<float>* copt,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  gancore::ModelSpec spec;
  CheckpointMeta meta;
  std::unordered_map<std::string, core::Tensor<float>> entries;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// Copy weights/buffers into a model built from the same spec; optionally
// restore optimizer state. Throws IncompatibleCheckpointError on any
// missing name or shape mismatch.
void apply_checkpoint(const LoadedCheckpoint& ck, gancore::GanModel<float>& model,
                      nn::Optimizer<float>* gopt = nullptr, nn::Optimizer<float>* copt = nullptr);

// Hash of all parameter/buffer bytes, for bit-exactness checks.
uint64_t model_weights_hash(const gancore::GanModel<float>& model);

}  // namespace ganbench::io
