#include "ganbench/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace ganbench::evaluator {

using nlohmann::json;

std::vector<uint8_t> binarize(const core::Tensor<float>& image, float tau) {
  int64_t c, h, w;
  if (image.ndim() == 3) {
    c = image.dim(0);
    h = image.dim(1);
    w = image.dim(2);
  } else if (image.ndim() == 2) {
    c = 1;
    h = image.dim(0);
    w = image.dim(1);
  } else {
    throw std::invalid_argument("binarize: expected [C,H,W] or [H,W]");
  }
  std::vector<uint8_t> mask(static_cast<size_t>(h * w), 0);
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x) {
      float v = image[(0 * h + y) * w + x];
      for (int64_t ch = 1; ch < c; ++ch) v = std::max(v, image[(ch * h + y) * w + x]);
      mask[static_cast<size_t>(y * w + x)] = v >= tau ? 1 : 0;
    }
  return mask;
}

std::vector<Component> connected_components(const uint8_t* mask, int h, int w, bool eight) {
  std::vector<int> parent(static_cast<size_t>(h) * w);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[static_cast<size_t>(a)] != a) {
      parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
      a = parent[static_cast<size_t>(a)];
    }
    return a;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  };

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int idx = y * w + x;
      if (!mask[idx]) continue;
      if (x > 0 && mask[idx - 1]) unite(idx, idx - 1);
      if (y > 0 && mask[idx - w]) unite(idx, idx - w);
      if (eight && y > 0) {
        if (x > 0 && mask[idx - w - 1]) unite(idx, idx - w - 1);
        if (x + 1 < w && mask[idx - w + 1]) unite(idx, idx - w + 1);
      }
    }

  std::vector<Component> comps;
  std::vector<int> comp_of_root(static_cast<size_t>(h) * w, -1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int idx = y * w + x;
      if (!mask[idx]) continue;
      const int root = find(idx);
      int ci = comp_of_root[static_cast<size_t>(root)];
      if (ci < 0) {
        ci = static_cast<int>(comps.size());
        comp_of_root[static_cast<size_t>(root)] = ci;
        Component c;
        c.x0 = c.x1 = x;
        c.y0 = c.y1 = y;
        comps.push_back(std::move(c));
      }
      Component& c = comps[static_cast<size_t>(ci)];
      ++c.area;
      c.x0 = std::min(c.x0, x);
      c.x1 = std::max(c.x1, x);
      c.y0 = std::min(c.y0, y);
      c.y1 = std::max(c.y1, y);
      c.pixels.emplace_back(x, y);
    }
  return comps;
}

std::string shape_label_str(ShapeLabel l) {
  switch (l) {
    case ShapeLabel::square: return "square";
    case ShapeLabel::circle: return "circle";
    case ShapeLabel::triangle: return "triangle";
    case ShapeLabel::blob_other: return "blob_other";
  }
  return "?";
}

ComponentMetrics classify_component(const Component& comp, const ClassifyParams& p) {
  ComponentMetrics m;
  m.area = comp.area;
  m.bbox_w = comp.bbox_w();
  m.bbox_h = comp.bbox_h();
  m.fill_ratio = static_cast<double>(comp.area) /
                 (static_cast<double>(m.bbox_w) * static_cast<double>(m.bbox_h));
  m.aspect = static_cast<double>(m.bbox_w) / static_cast<double>(m.bbox_h);
  const bool square_bbox = m.aspect >= 1.0 - p.aspect_delta && m.aspect <= 1.0 + p.aspect_delta;
  m.axis_aligned = square_bbox && m.fill_ratio >= p.square_fill;
  if (square_bbox && m.fill_ratio >= p.square_fill)
    m.label = ShapeLabel::square;
  else if (square_bbox && m.fill_ratio >= p.circle_fill_lo && m.fill_ratio <= p.circle_fill_hi)
    m.label = ShapeLabel::circle;
  else if (m.fill_ratio >= p.tri_fill_lo && m.fill_ratio <= p.tri_fill_hi)
    m.label = ShapeLabel::triangle;
  else
    m.label = ShapeLabel::blob_other;
  return m;
}

CountResult count_objects(const core::Tensor<float>& image, const CountParams& p) {
  const auto mask = binarize(image, p.tau);
  const int h = static_cast<int>(image.dim(image.ndim() - 2));
  const int w = static_cast<int>(image.dim(image.ndim() - 1));
  const auto comps = connected_components(mask.data(), h, w, p.eight_connectivity);
  CountResult out;
  for (const auto& c : comps) {
    if (c.area < p.min_area) continue;
    out.components.push_back(classify_component(c, p.classify));
  }
  out.count = static_cast<int>(out.components.size());
  return out;
}

double CountHistogram::exact_rate(int expected) const {
  if (total == 0) return 0.0;
  auto it = counts.find(expected);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

double CountHistogram::axis_aligned_rate() const {
  if (all_components.empty()) return 0.0;
  int64_t n = 0;
  for (const auto& c : all_components) n += c.axis_aligned;
  return static_cast<double>(n) / static_cast<double>(all_components.size());
}

CountHistogram count_histogram(const core::Tensor<float>& images, const CountParams& p) {
  CountHistogram out;
  if (images.size() == 0) return out;
  if (images.ndim() != 4) throw std::invalid_argument("count_histogram: expected [N,C,H,W]");
  const int64_t n = images.dim(0);
  const int64_t per = images.size() / std::max<int64_t>(n, 1);
  std::vector<CountResult> results(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    core::Tensor<float> img({images.dim(1), images.dim(2), images.dim(3)});
    std::copy(images.begin() + i * per, images.begin() + (i + 1) * per, img.begin());
    results[static_cast<size_t>(i)] = count_objects(img, p);
  }
  for (const auto& r : results) {
    ++out.counts[r.count];
    ++out.total;
    out.all_components.insert(out.all_components.end(), r.components.begin(), r.components.end());
  }
  return out;
}

int ModeCoverageResult::covered_count() const {
  int n = 0;
  for (bool c : covered) n += c;
  return n;
}

ModeCoverageResult mode_coverage(const core::Tensor<double>& samples,
                                 const std::vector<std::array<double, 2>>& centers, double radius,
                                 double coverage_min) {
  if (samples.ndim() != 2 || samples.dim(1) != 2)
    throw std::invalid_argument("mode_coverage: expected [N,2] samples");
  if (centers.empty()) throw std::invalid_argument("mode_coverage: no centers");
  const int64_t n = samples.dim(0);
  if (n == 0) throw std::invalid_argument("mode_coverage: empty sample set");
  ModeCoverageResult out;
  out.per_mode_fraction.assign(centers.size(), 0.0);
  const double r2 = radius * radius;
  int64_t spurious = 0;
  for (int64_t i = 0; i < n; ++i) {
    bool near_any = false;
    for (size_t c = 0; c < centers.size(); ++c) {
      const double dx = samples.at2(i, 0) - centers[c][0];
      const double dy = samples.at2(i, 1) - centers[c][1];
      if (dx * dx + dy * dy <= r2) {
        out.per_mode_fraction[c] += 1.0;
        near_any = true;
      }
    }
    if (!near_any) ++spurious;
  }
  for (auto& f : out.per_mode_fraction) f /= static_cast<double>(n);
  out.covered.resize(centers.size());
  for (size_t c = 0; c < centers.size(); ++c)
    out.covered[c] = out.per_mode_fraction[c] >= coverage_min;
  out.spurious_fraction = static_cast<double>(spurious) / static_cast<double>(n);
  return out;
}

RingFractions ring_membership(const core::Tensor<double>& samples, double r_inner, double r_outer,
                              double tol) {
  if (samples.ndim() != 2 || samples.dim(1) != 2)
    throw std::invalid_argument("ring_membership: expected [N,2] samples");
  const int64_t n = samples.dim(0);
  if (n == 0) throw std::invalid_argument("ring_membership: empty sample set");
  RingFractions out;
  for (int64_t i = 0; i < n; ++i) {
    const double r = std::hypot(samples.at2(i, 0), samples.at2(i, 1));
    const double di = std::abs(r - r_inner);
    const double dout = std::abs(r - r_outer);
    if (di <= tol && di <= dout)
      out.inner += 1.0;
    else if (dout <= tol)
      out.outer += 1.0;
    else
      out.neither += 1.0;
  }
  out.inner /= static_cast<double>(n);
  out.outer /= static_cast<double>(n);
  out.neither /= static_cast<double>(n);
  return out;
}

std::vector<std::array<double, 3>> manifold_reference(const ManifoldSpec& spec, int64_t m_ref,
                                                      double* bound_out) {
  using pointgen::Kind;
  std::vector<std::array<double, 3>> refs;
  double bound = 0.0;
  constexpr double kPi = 3.14159265358979323846;
  switch (spec.kind) {
    case Kind::blobs: {
      for (const auto& c : spec.blobs.centers) refs.push_back({c[0], c[1], 0.0});
      bound = 0.0;  // the manifold is the center set itself
      break;
    }
    case Kind::circles: {
      const int64_t per_ring = std::max<int64_t>(m_ref / 2, 8);
      const double dtheta = 2.0 * kPi / static_cast<double>(per_ring);
      for (int ring = 0; ring < 2; ++ring) {
        const double r = ring == 0 ? 1.0 : spec.circle_factor;
        for (int64_t i = 0; i < per_ring; ++i) {
          const auto p = pointgen::circle_point(ring, dtheta * static_cast<double>(i),
                                                spec.circle_factor);
          refs.push_back({p[0], p[1], 0.0});
        }
        bound = std::max(bound, r * dtheta / 2.0);
      }
      break;
    }
    case Kind::s_curve: {
      // arclength in t is exactly |t| (unit speed in the x-z plane), u is the
      // second coordinate, so a (t,u) grid bounds distances by the cell size
      const double t_len = 3.0 * kPi, u_len = 2.0;
      const int64_t nt = std::max<int64_t>(
          static_cast<int64_t>(std::sqrt(static_cast<double>(m_ref) * t_len / u_len)), 8);
      const int64_t nu = std::max<int64_t>(m_ref / nt, 2);
      const double dt = t_len / static_cast<double>(nt - 1);
      const double du = u_len / static_cast<double>(nu - 1);
      for (int64_t i = 0; i < nt; ++i)
        for (int64_t j = 0; j < nu; ++j) {
          const double t = -1.5 * kPi + dt * static_cast<double>(i);
          const double u = du * static_cast<double>(j);
          refs.push_back(pointgen::s_curve_point(t, u));
        }
      bound = 0.5 * std::hypot(dt, du);
      break;
    }
    case Kind::swiss_roll: {
      // speed along t is sqrt(1+t^2); invert the cumulative arclength so the
      // t grid is uniform in arclength
      const double t0 = 1.5 * kPi, t1 = 4.5 * kPi, h_len = 21.0;
      auto arc = [](double t) {
        return 0.5 * (t * std::sqrt(1.0 + t * t) + std::asinh(t));
      };
      const double s_total = arc(t1) - arc(t0);
      const int64_t nt = std::max<int64_t>(
          static_cast<int64_t>(std::sqrt(static_cast<double>(m_ref) * s_total / h_len)), 8);
      const int64_t nh = std::max<int64_t>(m_ref / nt, 2);
      const double ds = s_total / static_cast<double>(nt - 1);
      const double dh = h_len / static_cast<double>(nh - 1);
      double t = t0;
      for (int64_t i = 0; i < nt; ++i) {
        const double s_target = arc(t0) + ds * static_cast<double>(i);
        // Newton steps on arc(t) = s_target
        for (int it = 0; it < 50; ++it) {
          const double f = arc(t) - s_target;
          const double fp = std::sqrt(1.0 + t * t);
          const double step = f / fp;
          t -= step;
          if (std::abs(step) < 1e-12) break;
        }
        t = std::clamp(t, t0, t1);
        for (int64_t j = 0; j < nh; ++j)
          refs.push_back(pointgen::swiss_roll_point(t, dh * static_cast<double>(j)));
      }
      bound = 0.5 * std::hypot(ds, dh);
      break;
    }
  }
  if (bound_out) *bound_out = bound;
  return refs;
}

ManifoldStats manifold_distance(const core::Tensor<double>& samples, const ManifoldSpec& spec,
                                int64_t m_ref) {
  if (samples.ndim() != 2) throw std::invalid_argument("manifold_distance: expected [N,d]");
  const int64_t n = samples.dim(0);
  const int d = static_cast<int>(samples.dim(1));
  if (n == 0) throw std::invalid_argument("manifold_distance: empty sample set");
  if (d != pointgen::kind_dim(spec.kind))
    throw std::invalid_argument("manifold_distance: sample dimension mismatch");

  double bound = 0.0;
  const auto refs = manifold_reference(spec, m_ref, &bound);
  std::vector<double> dist(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    const double sx = samples.at2(i, 0);
    const double sy = samples.at2(i, 1);
    const double sz = d > 2 ? samples.at2(i, 2) : 0.0;
    for (const auto& r : refs) {
      const double dx = sx - r[0], dy = sy - r[1], dz = sz - r[2];
      const double dd = dx * dx + dy * dy + dz * dz;
      if (dd < best) best = dd;
    }
    dist[static_cast<size_t>(i)] = std::sqrt(best);
  }
  std::sort(dist.begin(), dist.end());
  ManifoldStats out;
  out.mean = std::accumulate(dist.begin(), dist.end(), 0.0) / static_cast<double>(n);
  out.p95 = dist[static_cast<size_t>(std::min<int64_t>(n - 1, (95 * n) / 100))];
  out.discretization_bound = bound;
  out.m_ref = static_cast<int64_t>(refs.size());
  return out;
}

std::string EvalReport::to_json_string() const {
  json j;
  j["kind"] = kind;
  j["n_samples"] = n_samples;
  if (histogram) {
    json h = json::object();
    for (const auto& [k, v] : histogram->counts) h[std::to_string(k)] = v;
    j["count_histogram"] = h;
    j["count_total"] = histogram->total;
  }
  if (expected_count) j["expected_count"] = *expected_count;
  if (exact_count_rate) j["exact_count_rate"] = *exact_count_rate;
  if (axis_aligned_rate) j["axis_aligned_rate"] = *axis_aligned_rate;
  if (coverage) {
    j["mode_coverage"] = coverage->per_mode_fraction;
    j["modes_covered"] = coverage->covered_count();
    j["spurious_fraction"] = coverage->spurious_fraction;
  }
  if (rings) {
    j["ring_inner"] = rings->inner;
    j["ring_outer"] = rings->outer;
    j["ring_neither"] = rings->neither;
  }
  if (manifold) {
    j["manifold_mean"] = manifold->mean;
    j["manifold_p95"] = manifold->p95;
    j["manifold_discretization_bound"] = manifold->discretization_bound;
    j["manifold_m_ref"] = manifold->m_ref;
  }
  if (!provenance_json.empty()) j["provenance"] = json::parse(provenance_json);
  if (!notes.empty()) j["notes"] = notes;
  return j.dump(2);
}

}  // namespace ganbench::evaluator
