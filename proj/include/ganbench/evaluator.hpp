#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ganbench/core/tensor.hpp"
#include "ganbench/pointgen.hpp"

namespace ganbench::evaluator {

// ---- image side: binarize -> label -> classify -> count --------------------

// Foreground mask: max over channels >= tau (boundary inclusive).
// Accepts [C,H,W] or [H,W].
std::vector<uint8_t> binarize(const core::Tensor<float>& image, float tau = 0.0f);

struct Component {
  int64_t area = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive bbox
  std::vector<std::pair<int, int>> pixels;  // (x, y) in row-major scan order

  int bbox_w() const { return x1 - x0 + 1; }
  int bbox_h() const { return y1 - y0 + 1; }
};

// Union-find labeling; components ordered by their first pixel in row-major
// scan order. eight=true uses 8-connectivity (diagonal pixels connect).
std::vector<Component> connected_components(const uint8_t* mask, int h, int w, bool eight = true);

enum class ShapeLabel { square, circle, triangle, blob_other };
std::string shape_label_str(ShapeLabel l);

// Frozen fill-ratio / aspect heuristics, calibrated on clean renders.
struct ClassifyParams {
  double square_fill = 0.95;
  double aspect_delta = 0.15;
  double circle_fill_lo = 0.70, circle_fill_hi = 0.85;
  double tri_fill_lo = 0.40, tri_fill_hi = 0.60;
};

struct ComponentMetrics {
  ShapeLabel label = ShapeLabel::blob_other;
  int64_t area = 0;
  int bbox_w = 0, bbox_h = 0;
  double fill_ratio = 0.0;  // area / bbox area
  double aspect = 0.0;      // bbox_w / bbox_h
  bool axis_aligned = false;
};

ComponentMetrics classify_component(const Component& comp, const ClassifyParams& p = {});

struct CountParams {
  float tau = 0.0f;
  int min_area = 4;  // speckle filter
  bool eight_connectivity = true;
  ClassifyParams classify;
};

struct CountResult {
  int count = 0;
  std::vector<ComponentMetrics> components;  // surviving components only
};

CountResult count_objects(const core::Tensor<float>& image, const CountParams& p = {});

struct CountHistogram {
  std::map<int, int64_t> counts;  // object count -> number of images
  int64_t total = 0;
  std::vector<ComponentMetrics> all_components;

  double exact_rate(int expected) const;
  double axis_aligned_rate() const;
};

// Aggregate count_objects over a batch of images [N,C,H,W].
CountHistogram count_histogram(const core::Tensor<float>& images, const CountParams& p = {});

// ---- point side -------------------------------------------------------------

struct ModeCoverageResult {
  std::vector<double> per_mode_fraction;  // share of samples within radius of each center
  std::vector<bool> covered;             // fraction >= coverage_min
  double spurious_fraction = 0.0;        // farther than radius from every center
  int covered_count() const;
};

ModeCoverageResult mode_coverage(const core::Tensor<double>& samples,
                                 const std::vector<std::array<double, 2>>& centers, double radius,
                                 double coverage_min = 0.01);

struct RingFractions {
  double inner = 0.0, outer = 0.0, neither = 0.0;
};

// Classify each sample by |  ||p|| - r | <= tol against both ring radii
// (nearest ring wins when both match); the three fractions sum to 1.
RingFractions ring_membership(const core::Tensor<double>& samples, double r_inner, double r_outer,
                              double tol);

struct ManifoldSpec {
  pointgen::Kind kind = pointgen::Kind::s_curve;
  double circle_factor = 0.5;
  pointgen::BlobSpec blobs;
};

struct ManifoldStats {
  double mean = 0.0;
  double p95 = 0.0;
  // max distance from any manifold point to the reference set, from the
  // grid construction (0 for blobs where the manifold is the center set)
  double discretization_bound = 0.0;
  int64_t m_ref = 0;
};

// Nearest-distance statistics of `samples` (original coordinates) against a
// dense noiseless reference set of ~m_ref points.
ManifoldStats manifold_distance(const core::Tensor<double>& samples, const ManifoldSpec& spec,
                                int64_t m_ref = 100000);

// Reference set builder, exposed for tests.
std::vector<std::array<double, 3>> manifold_reference(const ManifoldSpec& spec, int64_t m_ref,
                                                      double* bound_out);

// ---- report -------------------------------------------------------------

struct EvalReport {
  std::string kind;  // dataset kind or image dataset name
  int64_t n_samples = 0;
  std::optional<CountHistogram> histogram;
  std::optional<int> expected_count;
  std::optional<double> exact_count_rate;
  std::optional<double> axis_aligned_rate;
  std::optional<ModeCoverageResult> coverage;
  std::optional<RingFractions> rings;
  std::optional<ManifoldStats> manifold;
  std::string provenance_json;  // config hash, seeds, source paths
  std::vector<std::string> notes;

  std::string to_json_string() const;
};

}  // namespace ganbench::evaluator
