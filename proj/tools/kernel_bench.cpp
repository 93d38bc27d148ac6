// Benchmark: serial reference kernels vs the OpenMP backend, on the shapes
// the training loops actually use.

#include <chrono>
#include <cstdio>
#include <vector>

#include "ganbench/core/kernels.hpp"
#include "ganbench/core/rng.hpp"

using namespace ganbench::core;
namespace kn = kernels;

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<float> random_vec(int64_t n, Rng& rng) {
  std::vector<float> v(static_cast<size_t>(n));
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

template <typename F>
double time_it(F&& f, int reps) {
  f();  // warmup
  const double t0 = now_s();
  for (int i = 0; i < reps; ++i) f();
  return (now_s() - t0) / reps;
}

void bench_gemm(int64_t m, int64_t n, int64_t k, int reps) {
  Rng rng(1);
  auto a = random_vec(m * k, rng);
  auto b = random_vec(k * n, rng);
  std::vector<float> c(static_cast<size_t>(m * n));
  const double flops = 2.0 * m * n * k;
  const double ts = time_it(
      [&] { kn::serial::gemm<float>(false, false, m, n, k, 1.0f, a.data(), b.data(), 0.0f, c.data()); },
      reps);
  const double tp = time_it(
      [&] { kn::parallel::gemm<float>(false, false, m, n, k, 1.0f, a.data(), b.data(), 0.0f, c.data()); },
      reps);
  std::printf("gemm %4lldx%4lldx%4lld  serial %8.3f ms (%6.2f GF/s)  parallel %8.3f ms (%6.2f GF/s)  speedup %.2fx\n",
              (long long)m, (long long)n, (long long)k, ts * 1e3, flops / ts * 1e-9, tp * 1e3,
              flops / tp * 1e-9, ts / tp);
}

void bench_conv(int64_t n, int64_t ci, int64_t hw, int64_t co, int64_t k, int64_t stride,
                int reps) {
  kn::Conv2dGeom g;
  g.n = n;
  g.ci = ci;
  g.h = g.w = hw;
  g.co = co;
  g.k = k;
  g.stride = stride;
  g.pad = 1;
  Rng rng(2);
  auto x = random_vec(n * ci * hw * hw, rng);
  auto w = random_vec(co * ci * k * k, rng);
  std::vector<float> y(static_cast<size_t>(n * co * g.oh() * g.ow()));
  const double flops = 2.0 * n * co * g.oh() * g.ow() * ci * k * k;
  const double ts =
      time_it([&] { kn::serial::conv2d_fwd(g, x.data(), w.data(), y.data()); }, reps);
  const double tp =
      time_it([&] { kn::parallel::conv2d_fwd(g, x.data(), w.data(), y.data()); }, reps);
  std::printf("conv n=%2lld %3lldc %2lldx%-2lld -> %3lldc k%lld s%lld  serial %8.3f ms (%6.2f GF/s)  parallel %8.3f ms (%6.2f GF/s)  speedup %.2fx\n",
              (long long)n, (long long)ci, (long long)hw, (long long)hw, (long long)co,
              (long long)k, (long long)stride, ts * 1e3, flops / ts * 1e-9, tp * 1e3,
              flops / tp * 1e-9, ts / tp);
}

}  // namespace

int main() {
  std::printf("-- GEMM (dense layers) --\n");
  bench_gemm(64, 128, 128, 50);
  bench_gemm(64, 6272, 100, 20);
  bench_gemm(256, 256, 256, 20);
  bench_gemm(512, 512, 512, 5);

  std::printf("-- conv2d forward (critic blocks) --\n");
  bench_conv(64, 1, 28, 32, 4, 2, 10);
  bench_conv(64, 32, 14, 64, 4, 2, 10);
  bench_conv(64, 64, 7, 128, 3, 2, 10);
  bench_conv(64, 128, 4, 128, 3, 1, 10);
  return 0;
}
