#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "ganbench/evaluator.hpp"
#include "ganbench/scenegen.hpp"

using namespace ganbench;
using evaluator::ShapeLabel;
using scenegen::SceneAnnotation;
using scenegen::ShapeKind;

namespace {

// naive flood-fill labeling, the independent oracle for the union-find path
std::vector<int64_t> flood_areas(const uint8_t* mask, int h, int w, bool eight) {
  std::vector<char> seen(static_cast<size_t>(h * w), 0);
  std::vector<int64_t> areas;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (seen[static_cast<size_t>(y * w + x)] || !mask[y * w + x]) continue;
      int64_t area = 0;
      std::vector<std::pair<int, int>> stack{{x, y}};
      seen[static_cast<size_t>(y * w + x)] = 1;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++area;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (!eight && dx != 0 && dy != 0) continue;
            if (dx == 0 && dy == 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (seen[static_cast<size_t>(ny * w + nx)] || !mask[ny * w + nx]) continue;
            seen[static_cast<size_t>(ny * w + nx)] = 1;
            stack.push_back({nx, ny});
          }
      }
      areas.push_back(area);
    }
  std::sort(areas.begin(), areas.end());
  return areas;
}

core::Tensor<float> one_square_image(int x, int y, int edge) {
  SceneAnnotation ann;
  ann.shapes.push_back({ShapeKind::square, x, y, edge, {1, 1, 1}});
  return scenegen::render_scene(ann);
}

}  // namespace

TEST_CASE("binarize: clean render, background, and the boundary-inclusive rule") {
  auto img = one_square_image(5, 7, 4);
  auto mask = evaluator::binarize(img, 0.0f);
  int64_t fg = 0;
  for (uint8_t m : mask) fg += m;
  CHECK(fg == 16);
  for (int y = 7; y < 11; ++y)
    for (int x = 5; x < 9; ++x) CHECK(mask[static_cast<size_t>(y * 28 + x)] == 1);

  auto bg = scenegen::render_scene(SceneAnnotation{});
  auto empty = evaluator::binarize(bg, 0.0f);
  CHECK(std::count(empty.begin(), empty.end(), 1) == 0);

  core::Tensor<float> uniform = core::Tensor<float>::full({1, 4, 4}, 0.25f);
  auto all = evaluator::binarize(uniform, 0.25f);
  CHECK(std::count(all.begin(), all.end(), 1) == 16);
}

TEST_CASE("connected components: 8-connectivity merges diagonals") {
  std::vector<uint8_t> mask(16, 0);
  mask[0] = 1;           // (0,0)
  mask[5] = 1;           // (1,1) diagonal neighbor
  auto comps8 = evaluator::connected_components(mask.data(), 4, 4, true);
  CHECK(comps8.size() == 1);
  auto comps4 = evaluator::connected_components(mask.data(), 4, 4, false);
  CHECK(comps4.size() == 2);
}

TEST_CASE("connected components agree with the flood-fill oracle on random masks") {
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const double density = 0.1 + 0.6 * u(gen);
    std::vector<uint8_t> mask(28 * 28);
    for (auto& m : mask) m = u(gen) < density;
    for (bool eight : {true, false}) {
      auto comps = evaluator::connected_components(mask.data(), 28, 28, eight);
      std::vector<int64_t> areas;
      for (const auto& c : comps) areas.push_back(c.area);
      std::sort(areas.begin(), areas.end());
      CHECK(areas == flood_areas(mask.data(), 28, 28, eight));
    }
  }
}

TEST_CASE("component ordering and bbox bookkeeping") {
  std::vector<uint8_t> mask(28 * 28, 0);
  for (int y = 20; y < 24; ++y)
    for (int x = 2; x < 6; ++x) mask[static_cast<size_t>(y * 28 + x)] = 1;
  for (int y = 1; y < 3; ++y)
    for (int x = 10; x < 14; ++x) mask[static_cast<size_t>(y * 28 + x)] = 1;
  auto comps = evaluator::connected_components(mask.data(), 28, 28, true);
  REQUIRE(comps.size() == 2);
  // scan order: the top component comes first
  CHECK(comps[0].y0 == 1);
  CHECK(comps[0].bbox_w() == 4);
  CHECK(comps[0].bbox_h() == 2);
  CHECK(comps[1].area == 16);
}

TEST_CASE("classify: clean square, disk, triangle, and L-shape") {
  {
    auto img = one_square_image(3, 3, 4);
    auto res = evaluator::count_objects(img);
    REQUIRE(res.count == 1);
    CHECK(res.components[0].label == ShapeLabel::square);
    CHECK(res.components[0].axis_aligned);
    CHECK(res.components[0].fill_ratio == doctest::Approx(1.0));
  }
  {
    SceneAnnotation ann;
    ann.shapes.push_back({ShapeKind::circle, 14, 14, 4, {1, 1, 1}});
    auto res = evaluator::count_objects(scenegen::render_scene(ann));
    REQUIRE(res.count == 1);
    CHECK(res.components[0].label == ShapeLabel::circle);
    CHECK(res.components[0].fill_ratio == doctest::Approx(52.0 / 64.0));
    CHECK(!res.components[0].axis_aligned);
  }
  {
    SceneAnnotation ann;
    ann.channels = 3;
    ann.shapes.push_back({ShapeKind::triangle, 14, 14, 6, {0, 1, 0}});
    auto res = evaluator::count_objects(scenegen::render_scene(ann));
    REQUIRE(res.count == 1);
    CHECK(res.components[0].label == ShapeLabel::triangle);
  }
  {
    // two 4x4 squares fused with a 1px overlap: fill 31/49, not a square
    SceneAnnotation ann;
    ann.shapes.push_back({ShapeKind::square, 0, 0, 4, {1, 1, 1}});
    ann.shapes.push_back({ShapeKind::square, 3, 3, 4, {1, 1, 1}});
    auto res = evaluator::count_objects(scenegen::render_scene(ann));
    REQUIRE(res.count == 1);
    CHECK(res.components[0].fill_ratio == doctest::Approx(31.0 / 49.0));
    CHECK(res.components[0].label == ShapeLabel::blob_other);
  }
}

TEST_CASE("count_objects: training images, background, speckle filter") {
  auto ds = scenegen::gen_image_dataset(scenegen::DatasetName::squares_3_4, 100, 5);
  for (int64_t i = 0; i < ds.n(); ++i) {
    core::Tensor<float> img({1, 28, 28});
    std::copy(ds.images.begin() + i * 784, ds.images.begin() + (i + 1) * 784, img.begin());
    auto res = evaluator::count_objects(img);
    CHECK(res.count == 3);
    for (const auto& c : res.components) CHECK(c.label == ShapeLabel::square);
  }

  auto bg = scenegen::render_scene(SceneAnnotation{});
  CHECK(evaluator::count_objects(bg).count == 0);

  core::Tensor<float> speck = core::Tensor<float>::full({1, 28, 28}, -1.0f);
  speck[5 * 28 + 5] = 1.0f;  // single pixel, below min_area
  CHECK(evaluator::count_objects(speck).count == 0);
  evaluator::CountParams keep;
  keep.min_area = 1;
  CHECK(evaluator::count_objects(speck, keep).count == 1);
}

TEST_CASE("count_histogram: memorizing sampler and conservation") {
  auto ds = scenegen::gen_image_dataset(scenegen::DatasetName::squares_3_4, 60, 6);
  auto hist = evaluator::count_histogram(ds.images);
  CHECK(hist.total == 60);
  CHECK(hist.exact_rate(3) == doctest::Approx(1.0));
  int64_t mass = 0;
  for (const auto& [k, v] : hist.counts) mass += v;
  CHECK(mass == 60);
  CHECK(hist.axis_aligned_rate() == doctest::Approx(1.0));

  core::Tensor<float> none({0, 1, 28, 28});
  auto empty = evaluator::count_histogram(none);
  CHECK(empty.total == 0);
  CHECK(empty.counts.empty());
}

TEST_CASE("translation equivariance of counting") {
  auto base = one_square_image(4, 6, 4);
  auto moved = one_square_image(14, 19, 4);
  auto a = evaluator::count_objects(base);
  auto b = evaluator::count_objects(moved);
  CHECK(a.count == b.count);
  CHECK(a.components[0].label == b.components[0].label);
  CHECK(a.components[0].area == b.components[0].area);
}

TEST_CASE("mode_coverage: exact centers, midpoint spurious mass, mixed batch") {
  const std::vector<std::array<double, 2>> centers = {{-6, 0}, {6, 0}, {0, 8}};
  {
    core::Tensor<double> s({6, 2}, {-6, 0, 6, 0, 0, 8, -6, 0, 6, 0, 0, 8});
    auto r = evaluator::mode_coverage(s, centers, 3.0);
    CHECK(r.covered_count() == 3);
    CHECK(r.spurious_fraction == 0.0);
    for (double f : r.per_mode_fraction) CHECK(f == doctest::Approx(1.0 / 3.0));
  }
  {
    core::Tensor<double> s({4, 2}, {0, 0, 0, 0, 0, 0, 0, 0});  // midpoint of (-6,0)/(6,0)
    auto r = evaluator::mode_coverage(s, centers, 3.0);
    CHECK(r.covered_count() == 0);
    CHECK(r.spurious_fraction == doctest::Approx(1.0));
  }
  {
    core::Tensor<double> s({10, 2});
    for (int i = 0; i < 9; ++i) {
      s.at2(i, 0) = centers[static_cast<size_t>(i % 3)][0];
      s.at2(i, 1) = centers[static_cast<size_t>(i % 3)][1];
    }
    s.at2(9, 0) = 0.0;
    s.at2(9, 1) = 0.0;
    auto r = evaluator::mode_coverage(s, centers, 3.0);
    CHECK(r.spurious_fraction == doctest::Approx(0.10));
  }
  core::Tensor<double> empty({0, 2});
  CHECK_THROWS_AS(evaluator::mode_coverage(empty, centers, 3.0), std::invalid_argument);
}

TEST_CASE("ring_membership fractions") {
  {
    auto ds = pointgen::gen_circles(1000, 0.5, 0.0, 3);
    auto r = evaluator::ring_membership(ds.points, 0.5, 1.0, 0.15);
    CHECK(r.neither == 0.0);
    CHECK(r.inner + r.outer == doctest::Approx(1.0));
  }
  {
    core::Tensor<double> s({4, 2}, {0.75, 0, -0.75, 0, 0, 0.75, 0, -0.75});
    auto r = evaluator::ring_membership(s, 0.5, 1.0, 0.2);
    CHECK(r.neither == doctest::Approx(1.0));
  }
  {
    auto ds = pointgen::gen_circles(5000, 0.5, 0.05, 4);
    auto r = evaluator::ring_membership(ds.points, 0.5, 1.0, 0.15);
    CHECK(r.neither <= 0.01);
  }
}

TEST_CASE("manifold_distance: training points, planted outlier, empty input") {
  evaluator::ManifoldSpec spec;
  spec.kind = pointgen::Kind::s_curve;
  auto ds = pointgen::gen_s_curve(500, 0.0, 11);
  auto st = evaluator::manifold_distance(ds.points, spec, 20000);
  CHECK(st.mean <= st.discretization_bound);
  CHECK(st.p95 <= st.discretization_bound);

  // one sample offset along the local surface normal by a known distance;
  // at t=0.7 the (x,z) curve is (sin t, cos t - 1) with unit tangent
  // (cos t, -sin t), so the in-plane normal is (sin t, cos t)
  const double t = 0.7, off = 0.3;
  const auto base = pointgen::s_curve_point(t, 1.1);
  core::Tensor<double> far({1, 3}, {base[0] + off * std::sin(t), base[1],
                                    base[2] + off * std::cos(t)});
  auto st2 = evaluator::manifold_distance(far, spec, 20000);
  CHECK(std::abs(st2.mean - off) <= st.discretization_bound + 1e-6);

  core::Tensor<double> empty({0, 3});
  CHECK_THROWS_AS(evaluator::manifold_distance(empty, spec, 1000), std::invalid_argument);
}

TEST_CASE("manifold_distance covers the other kinds") {
  {
    evaluator::ManifoldSpec spec;
    spec.kind = pointgen::Kind::circles;
    auto ds = pointgen::gen_circles(400, 0.5, 0.0, 12);
    auto st = evaluator::manifold_distance(ds.points, spec, 20000);
    CHECK(st.mean <= st.discretization_bound);
  }
  {
    evaluator::ManifoldSpec spec;
    spec.kind = pointgen::Kind::swiss_roll;
    auto ds = pointgen::gen_swiss_roll(400, 0.0, 12);
    auto st = evaluator::manifold_distance(ds.points, spec, 40000);
    CHECK(st.mean <= st.discretization_bound);
  }
  {
    evaluator::ManifoldSpec spec;
    spec.kind = pointgen::Kind::blobs;
    core::Tensor<double> s({2, 2}, {-6, 0, 5, 0});
    auto st = evaluator::manifold_distance(s, spec, 10);
    CHECK(st.mean == doctest::Approx(0.5));  // (0 + 1)/2
  }
}

TEST_CASE("metrics are invariant to sample order") {
  auto ds = pointgen::gen_circles(200, 0.5, 0.05, 13);
  core::Tensor<double> shuffled = ds.points.clone();
  // reverse the rows
  for (int64_t i = 0; i < 100; ++i)
    for (int64_t a = 0; a < 2; ++a)
      std::swap(shuffled.at2(i, a), shuffled.at2(199 - i, a));
  auto r1 = evaluator::ring_membership(ds.points, 0.5, 1.0, 0.15);
  auto r2 = evaluator::ring_membership(shuffled, 0.5, 1.0, 0.15);
  CHECK(r1.inner == r2.inner);
  CHECK(r1.outer == r2.outer);
  CHECK(r1.neither == r2.neither);
}

TEST_CASE("eval report serializes the present sections") {
  evaluator::EvalReport rep;
  rep.kind = "squares_3_4";
  rep.n_samples = 10;
  evaluator::CountHistogram h;
  h.counts[3] = 10;
  h.total = 10;
  rep.histogram = h;
  rep.expected_count = 3;
  rep.exact_count_rate = 1.0;
  const std::string j = rep.to_json_string();
  CHECK(j.find("\"exact_count_rate\"") != std::string::npos);
  CHECK(j.find("\"count_histogram\"") != std::string::npos);
  CHECK(j.find("mode_coverage") == std::string::npos);
}
