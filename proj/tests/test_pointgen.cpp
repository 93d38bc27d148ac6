#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>

#include "ganbench/pointgen.hpp"

using namespace ganbench;
using pointgen::BlobSpec;
using pointgen::Kind;

namespace {
constexpr double kPi = 3.14159265358979323846;

double dist3(const std::array<double, 3>& a, double x, double y, double z) {
  return std::sqrt((a[0] - x) * (a[0] - x) + (a[1] - y) * (a[1] - y) + (a[2] - z) * (a[2] - z));
}
}  // namespace

TEST_CASE("blobs: zero-noise degenerate collapses to the center") {
  BlobSpec spec;
  spec.centers = {{0.0, 0.0}};
  spec.std_dev = 0.0;
  auto ds = pointgen::gen_blobs(3, spec, 1);
  REQUIRE(ds.n() == 3);
  for (int64_t i = 0; i < 3; ++i) {
    CHECK(ds.points.at2(i, 0) == 0.0);
    CHECK(ds.points.at2(i, 1) == 0.0);
  }
}

TEST_CASE("blobs: default 3 clusters, per-cluster counts within the binomial bound") {
  auto ds = pointgen::gen_blobs(5000, BlobSpec{}, 7);
  REQUIRE(ds.points.shape() == std::vector<int64_t>{5000, 2});
  int counts[3] = {0, 0, 0};
  for (int lbl : ds.labels) ++counts[lbl];
  const double expected = 5000.0 / 3.0;
  const double sigma = std::sqrt(5000.0 * (1.0 / 3.0) * (2.0 / 3.0));
  for (int c : counts) CHECK(std::abs(c - expected) <= 3.0 * sigma);
}

TEST_CASE("point generators are bit-deterministic in (params, seed)") {
  for (int variant = 0; variant < 4; ++variant) {
    auto a = pointgen::generate(static_cast<Kind>(variant), 500, 0.05, 99);
    auto b = pointgen::generate(static_cast<Kind>(variant), 500, 0.05, 99);
    REQUIRE(a.points.size() == b.points.size());
    CHECK(std::memcmp(a.points.data(), b.points.data(),
                      sizeof(double) * static_cast<size_t>(a.points.size())) == 0);
    auto c = pointgen::generate(static_cast<Kind>(variant), 500, 0.05, 100);
    CHECK(std::memcmp(a.points.data(), c.points.data(),
                      sizeof(double) * static_cast<size_t>(a.points.size())) != 0);
  }
}

TEST_CASE("circles: noiseless points sit exactly on their rings") {
  auto ds = pointgen::gen_circles(4, 0.5, 0.0, 3);
  int outer = 0, inner = 0;
  for (int64_t i = 0; i < 4; ++i) {
    const double r = std::hypot(ds.points.at2(i, 0), ds.points.at2(i, 1));
    if (ds.labels[static_cast<size_t>(i)] == 0) {
      ++outer;
      CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
    } else {
      ++inner;
      CHECK(r == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  CHECK(outer == 2);
  CHECK(inner == 2);
  // odd n gives the extra point to the unit circle
  auto odd = pointgen::gen_circles(5, 0.5, 0.0, 3);
  int outer5 = 0;
  for (int lbl : odd.labels) outer5 += lbl == 0;
  CHECK(outer5 == 3);
}

TEST_CASE("circles: noisy points stay within 3 sigma of their ring radius") {
  // Monte Carlo oracle (independent generator) for the radial projection bound
  std::mt19937 gen(1234);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 2.0 * kPi);
  const double noise = 0.05;
  int64_t ok = 0;
  const int64_t trials = 200000;
  for (int64_t i = 0; i < trials; ++i) {
    const double theta = ud(gen);
    const double x = std::cos(theta) + noise * nd(gen);
    const double y = std::sin(theta) + noise * nd(gen);
    if (std::abs(std::hypot(x, y) - 1.0) <= 3.0 * noise) ++ok;
  }
  const double oracle_rate = static_cast<double>(ok) / static_cast<double>(trials);
  CHECK(oracle_rate > 0.99);  // ~0.997 measured

  auto ds = pointgen::gen_circles(5000, 0.5, noise, 21);
  int64_t within = 0;
  for (int64_t i = 0; i < ds.n(); ++i) {
    const double target = ds.labels[static_cast<size_t>(i)] == 0 ? 1.0 : 0.5;
    const double r = std::hypot(ds.points.at2(i, 0), ds.points.at2(i, 1));
    within += std::abs(r - target) <= 3.0 * noise;
  }
  CHECK(static_cast<double>(within) / static_cast<double>(ds.n()) >= 0.99);
}

TEST_CASE("circles rejects bad parameters") {
  CHECK_THROWS_AS(pointgen::gen_circles(0, 0.5, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(pointgen::gen_circles(10, 1.0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(pointgen::gen_circles(10, 0.0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(pointgen::gen_circles(10, 0.5, -0.1, 1), std::invalid_argument);
}

TEST_CASE("s_curve closed forms") {
  auto p0 = pointgen::s_curve_point(0.0, 0.0);
  CHECK(p0[0] == 0.0);
  CHECK(p0[1] == 0.0);
  CHECK(p0[2] == 0.0);
  auto p1 = pointgen::s_curve_point(kPi / 2.0, 1.0);
  CHECK(p1[0] == doctest::Approx(1.0));
  CHECK(p1[1] == doctest::Approx(1.0));
  CHECK(p1[2] == doctest::Approx(-1.0));
}

TEST_CASE("s_curve: noiseless batch lies on the parametric surface") {
  auto ds = pointgen::gen_s_curve(2000, 0.0, 5);
  for (int64_t i = 0; i < ds.n(); ++i) {
    const auto p = pointgen::s_curve_point(ds.t_param[static_cast<size_t>(i)],
                                           ds.u_param[static_cast<size_t>(i)]);
    CHECK(dist3(p, ds.points.at2(i, 0), ds.points.at2(i, 1), ds.points.at2(i, 2)) == 0.0);
    CHECK(std::abs(ds.t_param[static_cast<size_t>(i)]) <= 1.5 * kPi);
  }
}

TEST_CASE("swiss_roll closed forms and t-consistency") {
  auto p = pointgen::swiss_roll_point(1.5 * kPi, 0.0);
  CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(p[1] == 0.0);
  CHECK(p[2] == doctest::Approx(-1.5 * kPi));

  auto ds = pointgen::gen_swiss_roll(2000, 0.0, 6);
  for (int64_t i = 0; i < ds.n(); ++i) {
    const double t = ds.t_param[static_cast<size_t>(i)];
    const double rr = ds.points.at2(i, 0) * ds.points.at2(i, 0) +
                      ds.points.at2(i, 2) * ds.points.at2(i, 2);
    CHECK(std::abs(rr - t * t) <= 1e-9 * t * t);
  }
}

TEST_CASE("swiss_roll: noisy batch stays near the manifold on average") {
  const double noise = 0.5;
  auto ds = pointgen::gen_swiss_roll(5000, noise, 8);
  // independent dense reference over the parameter grid
  std::vector<std::array<double, 3>> refs;
  for (int i = 0; i <= 600; ++i)
    for (int j = 0; j <= 40; ++j) {
      const double t = 1.5 * kPi + 3.0 * kPi * i / 600.0;
      const double h = 21.0 * j / 40.0;
      refs.push_back(pointgen::swiss_roll_point(t, h));
    }
  double total = 0.0;
  for (int64_t i = 0; i < ds.n(); ++i) {
    double best = 1e300;
    for (const auto& r : refs)
      best = std::min(best, dist3(r, ds.points.at2(i, 0), ds.points.at2(i, 1),
                                  ds.points.at2(i, 2)));
    total += best;
  }
  CHECK(total / static_cast<double>(ds.n()) <= 3.0 * noise * std::sqrt(3.0));
}

TEST_CASE("label consistency: metadata reproduces noiseless points exactly") {
  auto sc = pointgen::gen_s_curve(200, 0.0, 9);
  for (int64_t i = 0; i < sc.n(); ++i) {
    const auto p = pointgen::s_curve_point(sc.t_param[static_cast<size_t>(i)],
                                           sc.u_param[static_cast<size_t>(i)]);
    CHECK(p[0] == sc.points.at2(i, 0));
    CHECK(p[1] == sc.points.at2(i, 1));
    CHECK(p[2] == sc.points.at2(i, 2));
  }
  auto sw = pointgen::gen_swiss_roll(200, 0.0, 9);
  for (int64_t i = 0; i < sw.n(); ++i) {
    const auto p = pointgen::swiss_roll_point(sw.t_param[static_cast<size_t>(i)],
                                              sw.u_param[static_cast<size_t>(i)]);
    CHECK(p[0] == sw.points.at2(i, 0));
    CHECK(p[2] == sw.points.at2(i, 2));
  }
  BlobSpec spec;
  spec.std_dev = 0.0;
  auto bl = pointgen::gen_blobs(200, spec, 9);
  for (int64_t i = 0; i < bl.n(); ++i) {
    const auto& c = spec.centers[static_cast<size_t>(bl.labels[static_cast<size_t>(i)])];
    CHECK(bl.points.at2(i, 0) == c[0]);
    CHECK(bl.points.at2(i, 1) == c[1]);
  }
}

TEST_CASE("normalize_points maps into [-0.95, 0.95] and inverts") {
  pointgen::PointDataset ds;
  ds.kind = Kind::blobs;
  ds.points = core::Tensor<double>({2, 2}, {-1.0, -1.0, 1.0, 1.0});
  auto norm = pointgen::normalize_points(ds);
  CHECK(norm.ds.points.at2(0, 0) == doctest::Approx(-0.95));
  CHECK(norm.ds.points.at2(1, 1) == doctest::Approx(0.95));

  auto big = pointgen::gen_blobs(500, BlobSpec{}, 12);
  auto nb = pointgen::normalize_points(big);
  for (int64_t i = 0; i < nb.ds.points.size(); ++i) {
    CHECK(nb.ds.points[i] >= -0.95 - 1e-12);
    CHECK(nb.ds.points[i] <= 0.95 + 1e-12);
  }
  auto restored = nb.ds.points.clone();
  nb.transform.invert_inplace(restored);
  for (int64_t i = 0; i < restored.size(); ++i)
    CHECK(std::abs(restored[i] - big.points[i]) < 1e-12);
}

TEST_CASE("normalize_points: degenerate axis maps to 0 and is flagged") {
  pointgen::PointDataset ds;
  ds.kind = Kind::blobs;
  ds.points = core::Tensor<double>({3, 2}, {2.0, 5.0, 2.0, 5.0, 2.0, 5.0});
  auto norm = pointgen::normalize_points(ds);
  CHECK(norm.transform.degenerate[0]);
  CHECK(norm.transform.degenerate[1]);
  for (int64_t i = 0; i < 6; ++i) CHECK(norm.ds.points[i] == 0.0);
  auto restored = norm.ds.points.clone();
  norm.transform.invert_inplace(restored);
  CHECK(restored.at2(0, 0) == 2.0);
  CHECK(restored.at2(0, 1) == 5.0);
}

TEST_CASE("normalize_points rejects an empty dataset") {
  pointgen::PointDataset empty;
  CHECK_THROWS_AS(pointgen::normalize_points(empty), std::invalid_argument);
}

TEST_CASE("blob spec validation") {
  BlobSpec dup;
  dup.centers = {{1.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
  BlobSpec neg;
  neg.std_dev = -1.0;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(pointgen::gen_blobs(0, BlobSpec{}, 1), std::invalid_argument);
}
