#include "ganbench/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <stdexcept>

#include "ganbench/errors.hpp"

namespace ganbench::scenegen {

std::string dataset_name_str(DatasetName n) {
  switch (n) {
    case DatasetName::squares_1_4: return "squares_1_4";
    case DatasetName::squares_3_4: return "squares_3_4";
    case DatasetName::squares_1_16: return "squares_1_16";
    case DatasetName::ct2: return "ct2";
  }
  throw std::logic_error("dataset_name_str: bad enum");
}

DatasetName dataset_name_from_str(const std::string& s) {
  if (s == "squares_1_4") return DatasetName::squares_1_4;
  if (s == "squares_3_4") return DatasetName::squares_3_4;
  if (s == "squares_1_16") return DatasetName::squares_1_16;
  if (s == "ct2") return DatasetName::ct2;
  throw std::invalid_argument("unknown image dataset: " + s);
}

DatasetGeometry dataset_geometry(DatasetName name) {
  switch (name) {
    case DatasetName::squares_1_4: return {1, 4, 1};
    case DatasetName::squares_3_4: return {3, 4, 1};
    case DatasetName::squares_1_16: return {1, 16, 1};
    case DatasetName::ct2: return {4, 0, 3};
  }
  throw std::logic_error("dataset_geometry: bad enum");
}

bool rects_overlap(const Rect& a, const Rect& b) { return rects_conflict(a, b, 0); }

bool rects_conflict(const Rect& a, const Rect& b, int gap) {
  return std::abs(a.x - b.x) <= a.edge - 1 + gap && std::abs(a.y - b.y) <= a.edge - 1 + gap;
}

namespace {

int draw_anchor(core::Rng& rng, int lo, int hi, AnchorMode mode, double sigma) {
  if (mode == AnchorMode::uniform)
    return lo + static_cast<int>(rng.below(static_cast<uint64_t>(hi - lo + 1)));
  // truncated gaussian around the range center, redrawn until in range
  const double mu = 0.5 * (lo + hi);
  for (;;) {
    const int v = static_cast<int>(std::lround(mu + sigma * rng.normal()));
    if (v >= lo && v <= hi) return v;
  }
}

}  // namespace

SceneAnnotation sample_square_scene(const SquareSceneParams& p, core::Rng& rng,
                                    SceneSamplerStats* stats) {
  if (p.count < 1) throw std::invalid_argument("sample_square_scene: count must be >= 1");
  if (p.edge < 1 || p.edge > p.width || p.edge > p.height)
    throw std::invalid_argument("sample_square_scene: bad edge");
  if (static_cast<int64_t>(p.count) * p.edge * p.edge >=
      static_cast<int64_t>(p.height) * p.width)
    throw InfeasibleSceneError("scene infeasible: count*edge^2 must stay below the image area");

  const int xmax = p.width - p.edge;
  const int ymax = p.height - p.edge;
  std::vector<Rect> rects(static_cast<size_t>(p.count));
  for (int64_t attempt = 0; attempt < p.max_attempts; ++attempt) {
    for (auto& r : rects) {
      r.x = draw_anchor(rng, 0, xmax, p.anchor_mode, p.anchor_sigma);
      r.y = draw_anchor(rng, 0, ymax, p.anchor_mode, p.anchor_sigma);
      r.edge = p.edge;
    }
    bool ok = true;
    for (size_t i = 0; i < rects.size() && ok; ++i)
      for (size_t j = i + 1; j < rects.size() && ok; ++j)
        if (rects_conflict(rects[i], rects[j], p.separation)) ok = false;
    if (ok) {
      SceneAnnotation ann;
      ann.height = p.height;
      ann.width = p.width;
      ann.channels = 1;
      for (const auto& r : rects)
        ann.shapes.push_back({ShapeKind::square, r.x, r.y, p.edge, {1.0f, 1.0f, 1.0f}});
      return ann;
    }
    if (stats) ++stats->rejections;
  }
  throw InfeasibleSceneError("scene sampling exceeded the attempt cap");
}

const std::array<std::array<float, 3>, 6>& ct2_palette() {
  static const std::array<std::array<float, 3>, 6> palette = {{{1, 0, 0},
                                                               {0, 1, 0},
                                                               {0, 0, 1},
                                                               {1, 1, 0},
                                                               {1, 0, 1},
                                                               {0, 1, 1}}};
  return palette;
}

SceneAnnotation sample_ct2_scene(const Ct2Params& p, core::Rng& rng) {
  SceneAnnotation ann;
  ann.height = p.height;
  ann.width = p.width;
  ann.channels = 3;
  const auto& pal = ct2_palette();
  // circle center (lattice point) must keep pixels cx-r .. cx+r-1 inside
  const int r = p.circle_radius;
  for (int i = 0; i < 2; ++i) {
    ShapeInstance s;
    s.kind = ShapeKind::circle;
    s.size = r;
    s.x = draw_anchor(rng, r, p.width - r, AnchorMode::uniform, 0.0);
    s.y = draw_anchor(rng, r, p.height - r, AnchorMode::uniform, 0.0);
    s.color = pal[rng.below(pal.size())];
    ann.shapes.push_back(s);
  }
  // triangle: apex-up equilateral, circumradius R, centroid at the anchor
  const int R = p.triangle_circumradius;
  const int half_w = static_cast<int>(std::ceil(std::sqrt(3.0) / 2.0 * R));
  for (int i = 0; i < 2; ++i) {
    ShapeInstance s;
    s.kind = ShapeKind::triangle;
    s.size = R;
    s.x = draw_anchor(rng, half_w, p.width - half_w, AnchorMode::uniform, 0.0);
    s.y = draw_anchor(rng, R, p.height - 1 - (R + 1) / 2, AnchorMode::uniform, 0.0);
    s.color = pal[rng.below(pal.size())];
    ann.shapes.push_back(s);
  }
  return ann;
}

namespace {

void paint(core::Tensor<float>& img, int c_count, int px, int py, const std::array<float, 3>& color) {
  for (int c = 0; c < c_count; ++c)
    img[static_cast<int64_t>((c * img.dim(1) + py)) * img.dim(2) + px] =
        2.0f * color[static_cast<size_t>(c_count == 1 ? 0 : c)] - 1.0f;
}

void render_square(core::Tensor<float>& img, const SceneAnnotation& ann, const ShapeInstance& s) {
  if (s.x < 0 || s.y < 0 || s.x + s.size > ann.width || s.y + s.size > ann.height)
    throw std::invalid_argument("render_scene: square out of bounds");
  for (int py = s.y; py < s.y + s.size; ++py)
    for (int px = s.x; px < s.x + s.size; ++px) paint(img, ann.channels, px, py, s.color);
}

void render_circle(core::Tensor<float>& img, const SceneAnnotation& ann, const ShapeInstance& s) {
  const int r = s.size;
  if (s.x - r < 0 || s.y - r < 0 || s.x + r > ann.width || s.y + r > ann.height)
    throw std::invalid_argument("render_scene: circle out of bounds");
  const double r2 = static_cast<double>(r) * r;
  for (int py = s.y - r; py < s.y + r; ++py)
    for (int px = s.x - r; px < s.x + r; ++px) {
      const double dx = px + 0.5 - s.x;
      const double dy = py + 0.5 - s.y;
      if (dx * dx + dy * dy <= r2) paint(img, ann.channels, px, py, s.color);
    }
}

void render_triangle(core::Tensor<float>& img, const SceneAnnotation& ann, const ShapeInstance& s) {
  const double R = s.size;
  const double half_w = std::sqrt(3.0) / 2.0 * R;
  // vertices (image y grows downward; apex has the smallest y)
  const double v0x = s.x, v0y = s.y - R;
  const double v1x = s.x - half_w, v1y = s.y + R / 2.0;
  const double v2x = s.x + half_w, v2y = s.y + R / 2.0;
  const int x_lo = static_cast<int>(std::floor(v1x)), x_hi = static_cast<int>(std::ceil(v2x));
  const int y_lo = static_cast<int>(std::floor(v0y)), y_hi = static_cast<int>(std::ceil(v1y));
  if (x_lo < 0 || y_lo < 0 || x_hi > ann.width || y_hi > ann.height)
    throw std::invalid_argument("render_scene: triangle out of bounds");
  auto edge = [](double ax, double ay, double bx, double by, double px, double py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
  };
  for (int py = y_lo; py < y_hi; ++py)
    for (int px = x_lo; px < x_hi; ++px) {
      const double cx = px + 0.5, cy = py + 0.5;
      const double e0 = edge(v0x, v0y, v1x, v1y, cx, cy);
      const double e1 = edge(v1x, v1y, v2x, v2y, cx, cy);
      const double e2 = edge(v2x, v2y, v0x, v0y, cx, cy);
      if ((e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0))
        paint(img, ann.channels, px, py, s.color);
    }
}

}  // namespace

core::Tensor<float> render_scene(const SceneAnnotation& ann) {
  core::Tensor<float> img =
      core::Tensor<float>::full({ann.channels, ann.height, ann.width}, -1.0f);
  for (const auto& s : ann.shapes) {
    switch (s.kind) {
      case ShapeKind::square: render_square(img, ann, s); break;
      case ShapeKind::circle: render_circle(img, ann, s); break;
      case ShapeKind::triangle: render_triangle(img, ann, s); break;
    }
  }
  return img;
}

ImageDataset gen_image_dataset(DatasetName name, int64_t n, uint64_t seed, AnchorMode mode) {
  if (n < 0) throw std::invalid_argument("gen_image_dataset: negative n");
  const auto geom = dataset_geometry(name);
  ImageDataset ds;
  ds.name = name;
  ds.seed = seed;
  ds.anchor_mode = mode;
  ds.images = core::Tensor<float>({n, geom.channels, 28, 28});
  ds.annotations.resize(static_cast<size_t>(n));

  int64_t rejections = 0;
  std::exception_ptr failure;
#pragma omp parallel for schedule(static) reduction(+ : rejections)
  for (int64_t i = 0; i < n; ++i) {
    try {
      core::Rng rng = core::Rng::child(seed, static_cast<uint64_t>(i));
      SceneAnnotation ann;
      if (name == DatasetName::ct2) {
        ann = sample_ct2_scene({}, rng);
      } else {
        SquareSceneParams p;
        p.count = geom.count;
        p.edge = geom.edge;
        p.anchor_mode = mode;
        SceneSamplerStats st;
        ann = sample_square_scene(p, rng, &st);
        rejections += st.rejections;
      }
      auto img = render_scene(ann);
      std::copy(img.begin(), img.end(), ds.images.begin() + i * img.size());
      ds.annotations[static_cast<size_t>(i)] = std::move(ann);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  ds.total_rejections = rejections;
  return ds;
}

}  // namespace ganbench::scenegen
