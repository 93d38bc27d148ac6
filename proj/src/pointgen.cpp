#include "ganbench/pointgen.hpp"

#include <cmath>
#include <stdexcept>

namespace ganbench::pointgen {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::blobs: return "blobs";
    case Kind::circles: return "circles";
    case Kind::s_curve: return "s_curve";
    case Kind::swiss_roll: return "swiss_roll";
  }
  throw std::logic_error("kind_name: bad enum");
}

Kind kind_from_name(const std::string& s) {
  if (s == "blobs") return Kind::blobs;
  if (s == "circles") return Kind::circles;
  if (s == "s_curve") return Kind::s_curve;
  if (s == "swiss_roll") return Kind::swiss_roll;
  throw std::invalid_argument("unknown point dataset kind: " + s);
}

int kind_dim(Kind k) { return (k == Kind::blobs || k == Kind::circles) ? 2 : 3; }

void BlobSpec::validate() const {
  if (centers.empty()) throw std::invalid_argument("blobs: at least one center required");
  if (std_dev < 0.0) throw std::invalid_argument("blobs: std must be nonnegative");
  for (size_t i = 0; i < centers.size(); ++i)
    for (size_t j = i + 1; j < centers.size(); ++j)
      if (centers[i] == centers[j])
        throw std::invalid_argument("blobs: centers must be pairwise distinct");
}

std::array<double, 2> circle_point(int ring, double angle, double factor) {
  const double r = ring == 0 ? 1.0 : factor;
  return {r * std::cos(angle), r * std::sin(angle)};
}

std::array<double, 3> s_curve_point(double t, double u) {
  const double sgn = t < 0.0 ? -1.0 : 1.0;
  return {std::sin(t), u, sgn * (std::cos(t) - 1.0)};
}

std::array<double, 3> swiss_roll_point(double t, double h) {
  return {t * std::cos(t), h, t * std::sin(t)};
}

PointDataset gen_blobs(int64_t n, const BlobSpec& spec, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_blobs: n must be positive");
  spec.validate();
  const int64_t k = static_cast<int64_t>(spec.centers.size());
  PointDataset ds;
  ds.kind = Kind::blobs;
  ds.noise = spec.std_dev;
  ds.seed = seed;
  ds.blob_spec = spec;
  ds.points = core::Tensor<double>({n, 2});
  ds.labels.resize(static_cast<size_t>(n));
  core::Rng rng(seed);
  for (int64_t i = 0; i < n; ++i) {
    const int64_t c = static_cast<int64_t>(rng.below(static_cast<uint64_t>(k)));
    const double gx = rng.normal();
    const double gy = rng.normal();
    ds.points.at2(i, 0) = spec.centers[static_cast<size_t>(c)][0] + spec.std_dev * gx;
    ds.points.at2(i, 1) = spec.centers[static_cast<size_t>(c)][1] + spec.std_dev * gy;
    ds.labels[static_cast<size_t>(i)] = static_cast<int>(c);
  }
  return ds;
}

PointDataset gen_circles(int64_t n, double factor, double noise, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_circles: n must be positive");
  if (!(factor > 0.0 && factor < 1.0))
    throw std::invalid_argument("gen_circles: factor must be in (0,1)");
  if (noise < 0.0) throw std::invalid_argument("gen_circles: noise must be nonnegative");
  PointDataset ds;
  ds.kind = Kind::circles;
  ds.noise = noise;
  ds.seed = seed;
  ds.circle_factor = factor;
  ds.points = core::Tensor<double>({n, 2});
  ds.labels.resize(static_cast<size_t>(n));
  const int64_t n_outer = (n + 1) / 2;  // odd n: the unit circle gets the extra point
  core::Rng rng(seed);
  for (int64_t i = 0; i < n; ++i) {
    const int ring = i < n_outer ? 0 : 1;
    const double angle = rng.uniform() * 2.0 * kPi;
    const auto base = circle_point(ring, angle, factor);
    const double gx = rng.normal();
    const double gy = rng.normal();
    ds.points.at2(i, 0) = base[0] + noise * gx;
    ds.points.at2(i, 1) = base[1] + noise * gy;
    ds.labels[static_cast<size_t>(i)] = ring;
  }
  return ds;
}

PointDataset gen_s_curve(int64_t n, double noise, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_s_curve: n must be positive");
  if (noise < 0.0) throw std::invalid_argument("gen_s_curve: noise must be nonnegative");
  PointDataset ds;
  ds.kind = Kind::s_curve;
  ds.noise = noise;
  ds.seed = seed;
  ds.points = core::Tensor<double>({n, 3});
  ds.t_param.resize(static_cast<size_t>(n));
  ds.u_param.resize(static_cast<size_t>(n));
  core::Rng rng(seed);
  for (int64_t i = 0; i < n; ++i) {
    const double t = (rng.uniform() - 0.5) * 3.0 * kPi;  // [-3pi/2, 3pi/2)
    const double u = rng.uniform() * 2.0;
    const auto base = s_curve_point(t, u);
    for (int a = 0; a < 3; ++a) ds.points.at2(i, a) = base[static_cast<size_t>(a)] + noise * rng.normal();
    ds.t_param[static_cast<size_t>(i)] = t;
    ds.u_param[static_cast<size_t>(i)] = u;
  }
  return ds;
}

PointDataset gen_swiss_roll(int64_t n, double noise, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_swiss_roll: n must be positive");
  if (noise < 0.0) throw std::invalid_argument("gen_swiss_roll: noise must be nonnegative");
  PointDataset ds;
  ds.kind = Kind::swiss_roll;
  ds.noise = noise;
  ds.seed = seed;
  ds.points = core::Tensor<double>({n, 3});
  ds.t_param.resize(static_cast<size_t>(n));
  ds.u_param.resize(static_cast<size_t>(n));
  core::Rng rng(seed);
  for (int64_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const double t = 1.5 * kPi * (1.0 + 2.0 * u);
    const double h = rng.uniform() * 21.0;
    const auto base = swiss_roll_point(t, h);
    for (int a = 0; a < 3; ++a) ds.points.at2(i, a) = base[static_cast<size_t>(a)] + noise * rng.normal();
    ds.t_param[static_cast<size_t>(i)] = t;
    ds.u_param[static_cast<size_t>(i)] = h;
  }
  return ds;
}

PointDataset generate(Kind k, int64_t n, double noise, uint64_t seed, const BlobSpec& blobs,
                      double circle_factor) {
  switch (k) {
    case Kind::blobs: {
      BlobSpec s = blobs;
      s.std_dev = noise;
      return gen_blobs(n, s, seed);
    }
    case Kind::circles: return gen_circles(n, circle_factor, noise, seed);
    case Kind::s_curve: return gen_s_curve(n, noise, seed);
    case Kind::swiss_roll: return gen_swiss_roll(n, noise, seed);
  }
  throw std::logic_error("generate: bad enum");
}

void AffineTransform::apply_inplace(core::Tensor<double>& pts) const {
  if (identity) return;
  const int64_t n = pts.dim(0), d = pts.dim(1);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t a = 0; a < d; ++a)
      pts.at2(i, a) = (pts.at2(i, a) - offset[static_cast<size_t>(a)]) * scale[static_cast<size_t>(a)];
}

void AffineTransform::invert_inplace(core::Tensor<double>& pts) const {
  if (identity) return;
  const int64_t n = pts.dim(0), d = pts.dim(1);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t a = 0; a < d; ++a) {
      const size_t ai = static_cast<size_t>(a);
      pts.at2(i, a) = degenerate[ai] ? offset[ai] : pts.at2(i, a) / scale[ai] + offset[ai];
    }
}

void AffineTransform::invert_inplace(core::Tensor<float>& pts) const {
  if (identity) return;
  const int64_t n = pts.dim(0), d = pts.dim(1);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t a = 0; a < d; ++a) {
      const size_t ai = static_cast<size_t>(a);
      pts.at2(i, a) = degenerate[ai]
                          ? static_cast<float>(offset[ai])
                          : static_cast<float>(pts.at2(i, a) / scale[ai] + offset[ai]);
    }
}

NormalizeResult normalize_points(const PointDataset& ds, double target) {
  if (ds.n() < 1) throw std::invalid_argument("normalize_points: empty dataset");
  const int64_t n = ds.n();
  const int d = ds.d();
  AffineTransform t;
  t.offset.resize(static_cast<size_t>(d));
  t.scale.resize(static_cast<size_t>(d));
  t.degenerate.resize(static_cast<size_t>(d));
  for (int a = 0; a < d; ++a) {
    double lo = ds.points.at2(0, a), hi = lo;
    for (int64_t i = 1; i < n; ++i) {
      lo = std::min(lo, ds.points.at2(i, a));
      hi = std::max(hi, ds.points.at2(i, a));
    }
    const size_t ai = static_cast<size_t>(a);
    t.offset[ai] = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    t.degenerate[ai] = half <= 0.0;
    t.scale[ai] = t.degenerate[ai] ? 0.0 : target / half;
  }
  NormalizeResult out;
  out.ds = ds;
  out.ds.points = ds.points.clone();
  t.apply_inplace(out.ds.points);
  out.transform = std::move(t);
  return out;
}

}  // namespace ganbench::pointgen
