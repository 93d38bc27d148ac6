#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ganbench/core/rng.hpp"
#include "ganbench/core/tensor.hpp"

namespace ganbench::pointgen {

enum class Kind { blobs, circles, s_curve, swiss_roll };

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& s);
int kind_dim(Kind k);  // 2 for blobs/circles, 3 for s_curve/swiss_roll

struct BlobSpec {
  std::vector<std::array<double, 2>> centers = {{-6.0, 0.0}, {6.0, 0.0}, {0.0, 8.0}};
  double std_dev = 1.0;
  void validate() const;
};

// Generated sample matrix plus the per-sample generation metadata needed to
// re-evaluate the closed forms (cluster/ring labels, manifold parameters).
struct PointDataset {
  core::Tensor<double> points;  // [n, d]
  Kind kind = Kind::blobs;
  double noise = 0.0;
  uint64_t seed = 0;

  std::vector<int> labels;       // blobs: cluster index; circles: 0 outer, 1 inner
  std::vector<double> t_param;   // s_curve / swiss_roll: t
  std::vector<double> u_param;   // s_curve: u; swiss_roll: h

  BlobSpec blob_spec;            // blobs only
  double circle_factor = 0.5;    // circles only

  int64_t n() const { return points.ndim() ? points.dim(0) : 0; }
  int d() const { return points.ndim() > 1 ? static_cast<int>(points.dim(1)) : 0; }
};

// Closed forms. These are the normative definitions of the four
// distributions; the generators add noise * N(0, I) on top.
std::array<double, 2> circle_point(int ring, double angle, double factor);
std::array<double, 3> s_curve_point(double t, double u);
std::array<double, 3> swiss_roll_point(double t, double h);

PointDataset gen_blobs(int64_t n, const BlobSpec& spec, uint64_t seed);
PointDataset gen_circles(int64_t n, double factor, double noise, uint64_t seed);
PointDataset gen_s_curve(int64_t n, double noise, uint64_t seed);
PointDataset gen_swiss_roll(int64_t n, double noise, uint64_t seed);

// Convenience dispatcher; `noise` maps to the cluster std for blobs.
PointDataset generate(Kind k, int64_t n, double noise, uint64_t seed,
                      const BlobSpec& blobs = {}, double circle_factor = 0.5);

// Invertible per-axis map x' = (x - offset) * scale. Degenerate axes
// (zero range) map to 0 and invert back to the axis value.
struct AffineTransform {
  std::vector<double> offset;
  std::vector<double> scale;
  std::vector<bool> degenerate;

  bool identity = false;  // images: pixels already live in the generator range

  void apply_inplace(core::Tensor<double>& pts) const;
  void invert_inplace(core::Tensor<double>& pts) const;
  void invert_inplace(core::Tensor<float>& pts) const;
  static AffineTransform make_identity() {
    AffineTransform t;
    t.identity = true;
    return t;
  }
};

struct NormalizeResult {
  PointDataset ds;
  AffineTransform transform;
};

// Per-axis affine map into [-target, target] (default 0.95), so the data fits
// the generator's Tanh output range with margin.
NormalizeResult normalize_points(const PointDataset& ds, double target = 0.95);

}  // namespace ganbench::pointgen
