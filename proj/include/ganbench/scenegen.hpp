#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ganbench/core/rng.hpp"
#include "ganbench/core/tensor.hpp"

namespace ganbench::scenegen {

enum class ShapeKind { square, circle, triangle };
enum class DatasetName { squares_1_4, squares_3_4, squares_1_16, ct2 };

std::string dataset_name_str(DatasetName n);
DatasetName dataset_name_from_str(const std::string& s);

// Anchor conventions: squares anchor at the top-left pixel; circles and
// triangles anchor at a pixel-corner lattice point (circle center /
// triangle centroid), which keeps their rasterizations symmetric.
struct ShapeInstance {
  ShapeKind kind = ShapeKind::square;
  int x = 0, y = 0;
  int size = 0;  // square edge / circle radius / triangle circumradius
  std::array<float, 3> color = {1.0f, 1.0f, 1.0f};
};

struct SceneAnnotation {
  std::vector<ShapeInstance> shapes;
  int height = 28, width = 28;
  int channels = 1;
};

struct Rect {
  int x = 0, y = 0, edge = 0;
};

// Closed-pixel-set intersection: a square occupies columns [x, x+edge-1],
// so touching squares do not overlap.
bool rects_overlap(const Rect& a, const Rect& b);

// True when the two pixel sets are closer than `gap` in Chebyshev distance
// (gap = 0 reduces to rects_overlap).
bool rects_conflict(const Rect& a, const Rect& b, int gap);

enum class AnchorMode { uniform, gaussian };

struct SquareSceneParams {
  int count = 3;
  int edge = 4;
  int height = 28, width = 28;
  AnchorMode anchor_mode = AnchorMode::uniform;
  double anchor_sigma = 7.0;  // gaussian mode only; mean is the range center
  // Minimum Chebyshev gap between squares. 1 guarantees that rendered
  // squares stay 8-disconnected, which the count metrics rely on; 0 gives
  // the overlap-only rule.
  int separation = 1;
  int64_t max_attempts = 1000000;
};

struct SceneSamplerStats {
  int64_t rejections = 0;  // discarded full configurations
};

// Rejection sampling: draw all `count` anchors, discard the whole draw on
// any pairwise conflict, repeat.
SceneAnnotation sample_square_scene(const SquareSceneParams& p, core::Rng& rng,
                                    SceneSamplerStats* stats = nullptr);

struct Ct2Params {
  int circle_radius = 4;
  int triangle_circumradius = 6;
  int height = 28, width = 28;
};

// Two circles and two triangles, colors from a fixed 6-color palette,
// overlaps allowed.
SceneAnnotation sample_ct2_scene(const Ct2Params& p, core::Rng& rng);

const std::array<std::array<float, 3>, 6>& ct2_palette();

// Rasterize to [C, H, W], background -1, shape channels at 2*color-1
// (squares datasets use color {1,1,1} so foreground is exactly +1).
// Shapes are painted in list order. Throws std::invalid_argument when a
// shape does not fit in bounds.
core::Tensor<float> render_scene(const SceneAnnotation& ann);

struct ImageDataset {
  core::Tensor<float> images;  // [N, C, H, W] in memory; files store NHWC
  std::vector<SceneAnnotation> annotations;
  DatasetName name = DatasetName::squares_1_4;
  uint64_t seed = 0;
  int64_t total_rejections = 0;
  AnchorMode anchor_mode = AnchorMode::uniform;

  int64_t n() const { return images.ndim() ? images.dim(0) : 0; }
};

struct DatasetGeometry {
  int count;
  int edge;      // squares only
  int channels;
};
DatasetGeometry dataset_geometry(DatasetName name);

// i.i.d. scenes from per-image derived RNG streams; image i depends only on
// (seed, i), so generation order does not matter.
ImageDataset gen_image_dataset(DatasetName name, int64_t n, uint64_t seed,
                               AnchorMode mode = AnchorMode::uniform);

}  // namespace ganbench::scenegen
