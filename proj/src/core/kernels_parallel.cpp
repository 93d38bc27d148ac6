#include "ganbench/core/kernels.hpp"

#include <cstring>
#include <vector>

// OpenMP backend. Parallel loops always split over output elements that are
// owned by exactly one thread, and every accumulation runs in a fixed order
// inside that thread, so results are identical for any thread count.

namespace ganbench::core::kernels::parallel {

template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha,
          const T* a, const T* b, T beta, T* c) {
  if (!trans_a && !trans_b) {
    // C rows stay hot; the j loop vectorizes.
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
      T* crow = c + i * n;
      if (beta == T(0)) {
        for (int64_t j = 0; j < n; ++j) crow[j] = T(0);
      } else if (beta != T(1)) {
        for (int64_t j = 0; j < n; ++j) crow[j] *= beta;
      }
      for (int64_t p = 0; p < k; ++p) {
        const T av = alpha * a[i * k + p];
        const T* brow = b + p * n;
        for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
      const T* arow = a + i * k;
      T* crow = c + i * n;
      for (int64_t j = 0; j < n; ++j) {
        const T* brow = b + j * k;
        T acc = 0;
        for (int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        crow[j] = alpha * acc + (beta == T(0) ? T(0) : beta * crow[j]);
      }
    }
  } else if (trans_a && !trans_b) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
      T* crow = c + i * n;
      if (beta == T(0)) {
        for (int64_t j = 0; j < n; ++j) crow[j] = T(0);
      } else if (beta != T(1)) {
        for (int64_t j = 0; j < n; ++j) crow[j] *= beta;
      }
      for (int64_t p = 0; p < k; ++p) {
        const T av = alpha * a[p * m + i];
        const T* brow = b + p * n;
        for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
      T* crow = c + i * n;
      for (int64_t j = 0; j < n; ++j) {
        T acc = 0;
        for (int64_t p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
        crow[j] = alpha * acc + (beta == T(0) ? T(0) : beta * crow[j]);
      }
    }
  }
}

namespace {

// cols[(ci*k+kh)*k+kw, oy*ow+ox] = x[ci, oy*s-p+kh, ox*s-p+kw] or 0.
template <typename T>
void im2col(const Conv2dGeom& g, const T* x, T* cols) {
  const int64_t oh = g.oh(), ow = g.ow();
  for (int64_t ci = 0; ci < g.ci; ++ci)
    for (int64_t kh = 0; kh < g.k; ++kh)
      for (int64_t kw = 0; kw < g.k; ++kw) {
        T* row = cols + ((ci * g.k + kh) * g.k + kw) * oh * ow;
        for (int64_t oy = 0; oy < oh; ++oy) {
          const int64_t iy = oy * g.stride - g.pad + kh;
          if (iy < 0 || iy >= g.h) {
            for (int64_t ox = 0; ox < ow; ++ox) row[oy * ow + ox] = T(0);
            continue;
          }
          for (int64_t ox = 0; ox < ow; ++ox) {
            const int64_t ix = ox * g.stride - g.pad + kw;
            row[oy * ow + ox] = (ix < 0 || ix >= g.w) ? T(0) : x[(ci * g.h + iy) * g.w + ix];
          }
        }
      }
}

}  // namespace

template <typename T>
void conv2d_fwd(const Conv2dGeom& g, const T* x, const T* w, T* y) {
  const int64_t oh = g.oh(), ow = g.ow();
  const int64_t ckk = g.ci * g.k * g.k;
#pragma omp parallel
  {
    std::vector<T> cols(static_cast<size_t>(ckk * oh * ow));
#pragma omp for schedule(static)
    for (int64_t n = 0; n < g.n; ++n) {
      im2col(g, x + n * g.ci * g.h * g.w, cols.data());
      // y[n] = W[co, ckk] * cols[ckk, oh*ow]
      T* yn = y + n * g.co * oh * ow;
      for (int64_t co = 0; co < g.co; ++co) {
        T* yrow = yn + co * oh * ow;
        for (int64_t j = 0; j < oh * ow; ++j) yrow[j] = T(0);
        const T* wrow = w + co * ckk;
        for (int64_t p = 0; p < ckk; ++p) {
          const T wv = wrow[p];
          const T* crow = cols.data() + p * oh * ow;
          for (int64_t j = 0; j < oh * ow; ++j) yrow[j] += wv * crow[j];
        }
      }
    }
  }
}

template <typename T>
void conv2d_bwd_input(const Conv2dGeom& g, const T* gy, const T* w, T* gx) {
  const int64_t oh = g.oh(), ow = g.ow();
  const int64_t ckk = g.ci * g.k * g.k;
#pragma omp parallel
  {
    std::vector<T> cols(static_cast<size_t>(ckk * oh * ow));
#pragma omp for schedule(static)
    for (int64_t n = 0; n < g.n; ++n) {
      // cols = W^T [ckk, co] * gy[n] [co, oh*ow]
      const T* gyn = gy + n * g.co * oh * ow;
      for (int64_t p = 0; p < ckk; ++p) {
        T* crow = cols.data() + p * oh * ow;
        for (int64_t j = 0; j < oh * ow; ++j) crow[j] = T(0);
        for (int64_t co = 0; co < g.co; ++co) {
          const T wv = w[co * ckk + p];
          const T* gyrow = gyn + co * oh * ow;
          for (int64_t j = 0; j < oh * ow; ++j) crow[j] += wv * gyrow[j];
        }
      }
      // col2im gather
      T* gxn = gx + n * g.ci * g.h * g.w;
      for (int64_t ci = 0; ci < g.ci; ++ci)
        for (int64_t iy = 0; iy < g.h; ++iy)
          for (int64_t ix = 0; ix < g.w; ++ix) {
            T acc = 0;
            for (int64_t kh = 0; kh < g.k; ++kh) {
              const int64_t ty = iy + g.pad - kh;
              if (ty % g.stride != 0) continue;
              const int64_t oy = ty / g.stride;
              if (oy < 0 || oy >= oh) continue;
              for (int64_t kw = 0; kw < g.k; ++kw) {
                const int64_t tx = ix + g.pad - kw;
                if (tx % g.stride != 0) continue;
                const int64_t ox = tx / g.stride;
                if (ox < 0 || ox >= ow) continue;
                acc += cols[static_cast<size_t>(((ci * g.k + kh) * g.k + kw) * oh * ow + oy * ow + ox)];
              }
            }
            gxn[(ci * g.h + iy) * g.w + ix] = acc;
          }
    }
  }
}

template <typename T>
void conv2d_bwd_weight(const Conv2dGeom& g, const T* x, const T* gy, T* gw) {
  const int64_t oh = g.oh(), ow = g.ow();
  const int64_t ckk = g.ci * g.k * g.k;
  std::memset(gw, 0, sizeof(T) * static_cast<size_t>(g.co * ckk));
  std::vector<T> cols(static_cast<size_t>(ckk * oh * ow));
  // Images accumulate in order; the inner GEMM is parallel over gw rows.
  for (int64_t n = 0; n < g.n; ++n) {
    im2col(g, x + n * g.ci * g.h * g.w, cols.data());
    const T* gyn = gy + n * g.co * oh * ow;
#pragma omp parallel for schedule(static)
    for (int64_t co = 0; co < g.co; ++co) {
      const T* gyrow = gyn + co * oh * ow;
      T* gwrow = gw + co * ckk;
      for (int64_t p = 0; p < ckk; ++p) {
        const T* crow = cols.data() + p * oh * ow;
        T acc = 0;
        for (int64_t j = 0; j < oh * ow; ++j) acc += gyrow[j] * crow[j];
        gwrow[p] += acc;
      }
    }
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

}  // namespace ganbench::core::kernels::parallel

namespace ganbench::core::kernels {

namespace {
Backend g_backend = Backend::parallel;
}

Backend backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }

template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha,
          const T* a, const T* b, T beta, T* c) {
  if (g_backend == Backend::serial)
    serial::gemm(trans_a, trans_b, m, n, k, alpha, a, b, beta, c);
  else
    parallel::gemm(trans_a, trans_b, m, n, k, alpha, a, b, beta, c);
}

template <typename T>
void conv2d_fwd(const Conv2dGeom& g, const T* x, const T* w, T* y) {
  if (g_backend == Backend::serial)
    serial::conv2d_fwd(g, x, w, y);
  else
    parallel::conv2d_fwd(g, x, w, y);
}

template <typename T>
void conv2d_bwd_input(const Conv2dGeom& g, const T* gy, const T* w, T* gx) {
  if (g_backend == Backend::serial)
    serial::conv2d_bwd_input(g, gy, w, gx);
  else
    parallel::conv2d_bwd_input(g, gy, w, gx);
}

template <typename T>
void conv2d_bwd_weight(const Conv2dGeom& g, const T* x, const T* gy, T* gw) {
  if (g_backend == Backend::serial)
    serial::conv2d_bwd_weight(g, x, gy, gw);
  else
    parallel::conv2d_bwd_weight(g, x, gy, gw);
}

template void gemm<float>(bool, bool, int64_t, int64_t, int64_t, float, const float*, const float*, float, float*);
template void gemm<double>(bool, bool, int64_t, int64_t, int64_t, double, const double*, const double*, double, double*);
template void conv2d_fwd<float>(const Conv2dGeom&, const float*, const float*, float*);
template void conv2d_fwd<double>(const Conv2dGeom&, const double*, const double*, double*);
template void conv2d_bwd_input<float>(const Conv2dGeom&, const float*, const float*, float*);
template void conv2d_bwd_input<double>(const Conv2dGeom&, const double*, const double*, double*);
template void conv2d_bwd_weight<float>(const Conv2dGeom&, const float*, const float*, float*);
template void conv2d_bwd_weight<double>(const Conv2dGeom&, const double*, const double*, double*);

}  // namespace ganbench::core::kernels
