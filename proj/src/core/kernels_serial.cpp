#include "ganbench/core/kernels.hpp"

#include <cstring>

// Reference kernels: straight loops, no parallelism, no layout tricks.
// These define the expected numerics for the parallel backend tests.

namespace ganbench::core::kernels::serial {

template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha,
          const T* a, const T* b, T beta, T* c) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      T acc = 0;
      for (int64_t p = 0; p < k; ++p) {
        const T av = trans_a ? a[p * m + i] : a[i * k + p];
        const T bv = trans_b ? b[j * k + p] : b[p * n + j];
        acc += av * bv;
      }
      c[i * n + j] = alpha * acc + (beta == T(0) ? T(0) : beta * c[i * n + j]);
    }
  }
}

template <typename T>
void conv2d_fwd(const Conv2dGeom& g, const T* x, const T* w, T* y) {
  const int64_t oh = g.oh(), ow = g.ow();
  for (int64_t n = 0; n < g.n; ++n)
    for (int64_t co = 0; co < g.co; ++co)
      for (int64_t oy = 0; oy < oh; ++oy)
        for (int64_t ox = 0; ox < ow; ++ox) {
          T acc = 0;
          for (int64_t ci = 0; ci < g.ci; ++ci)
            for (int64_t kh = 0; kh < g.k; ++kh)
              for (int64_t kw = 0; kw < g.k; ++kw) {
                const int64_t iy = oy * g.stride - g.pad + kh;
                const int64_t ix = ox * g.stride - g.pad + kw;
                if (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w) continue;
                acc += x[((n * g.ci + ci) * g.h + iy) * g.w + ix] *
                       w[((co * g.ci + ci) * g.k + kh) * g.k + kw];
              }
          y[((n * g.co + co) * oh + oy) * ow + ox] = acc;
        }
}

template <typename T>
void conv2d_bwd_input(const Conv2dGeom& g, const T* gy, const T* w, T* gx) {
  const int64_t oh = g.oh(), ow = g.ow();
  for (int64_t n = 0; n < g.n; ++n)
    for (int64_t ci = 0; ci < g.ci; ++ci)
      for (int64_t iy = 0; iy < g.h; ++iy)
        for (int64_t ix = 0; ix < g.w; ++ix) {
          T acc = 0;
          for (int64_t co = 0; co < g.co; ++co)
            for (int64_t kh = 0; kh < g.k; ++kh)
              for (int64_t kw = 0; kw < g.k; ++kw) {
                const int64_t ty = iy + g.pad - kh;
                const int64_t tx = ix + g.pad - kw;
                if (ty % g.stride != 0 || tx % g.stride != 0) continue;
                const int64_t oy = ty / g.stride, ox = tx / g.stride;
                if (oy < 0 || oy >= oh || ox < 0 || ox >= ow) continue;
                acc += gy[((n * g.co + co) * oh + oy) * ow + ox] *
                       w[((co * g.ci + ci) * g.k + kh) * g.k + kw];
              }
          gx[((n * g.ci + ci) * g.h + iy) * g.w + ix] = acc;
        }
}

template <typename T>
void conv2d_bwd_weight(const Conv2dGeom& g, const T* x, const T* gy, T* gw) {
  const int64_t oh = g.oh(), ow = g.ow();
  std::memset(gw, 0, sizeof(T) * static_cast<size_t>(g.co * g.ci * g.k * g.k));
  for (int64_t co = 0; co < g.co; ++co)
    for (int64_t ci = 0; ci < g.ci; ++ci)
      for (int64_t kh = 0; kh < g.k; ++kh)
        for (int64_t kw = 0; kw < g.k; ++kw) {
          T acc = 0;
          for (int64_t n = 0; n < g.n; ++n)
            for (int64_t oy = 0; oy < oh; ++oy)
              for (int64_t ox = 0; ox < ow; ++ox) {
                const int64_t iy = oy * g.stride - g.pad + kh;
                const int64_t ix = ox * g.stride - g.pad + kw;
                if (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w) continue;
                acc += x[((n * g.ci + ci) * g.h + iy) * g.w + ix] *
                       gy[((n * g.co + co) * oh + oy) * ow + ox];
              }
          gw[((co * g.ci + ci) * g.k + kh) * g.k + kw] = acc;
        }
}

template void gemm<float>(bool, bool, int64_t, int64_t, int64_t, float, const float*, const float*, float, float*);
template void gemm<double>(bool, bool, int64_t, int64_t, int64_t, double, const double*, const double*, double, double*);
template void conv2d_fwd<float>(const Conv2dGeom&, const float*, const float*, float*);
template void conv2d_fwd<double>(const Conv2dGeom&, const double*, const double*, double*);
template void conv2d_bwd_input<float>(const Conv2dGeom&, const float*, const float*, float*);
template void conv2d_bwd_input<double>(const Conv2dGeom&, const double*, const double*, double*);
template void conv2d_bwd_weight<float>(const Conv2dGeom&, const float*, const float*, float*);
template void conv2d_bwd_weight<double>(const Conv2dGeom&, const double*, const double*, double*);

}  // namespace ganbench::core::kernels::serial
