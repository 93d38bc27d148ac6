#pragma once

#include <cstdint>

namespace ganbench::core::kernels {

// Two interchangeable kernel backends:
//   serial   - plain reference loops, kept for testing and as the
//              deterministic-portable baseline
//   parallel - OpenMP + vectorization-friendly implementations (im2col/GEMM
//              for convolutions)
// Both are deterministic for a fixed backend choice: every output element is
// accumulated in a fixed order by a single thread, so results do not depend
// on the thread count or schedule. The two backends may differ in the last
// floating-point bits because their summation orders differ.
enum class Backend { serial, parallel };

Backend backend();
void set_backend(Backend b);

struct Conv2dGeom {
  int64_t n = 0;       // batch
  int64_t ci = 0;      // input channels
  int64_t h = 0, w = 0;
  int64_t co = 0;      // output channels
  int64_t k = 0;       // square kernel
  int64_t stride = 1;
  int64_t pad = 0;

  int64_t oh() const { return (h + 2 * pad - k) / stride + 1; }
  int64_t ow() const { return (w + 2 * pad - k) / stride + 1; }
};

namespace serial {
// Row-major GEMM: C = alpha * op(A) * op(B) + beta * C, op is optional
// transpose. A is m*k (or k*m when trans_a), B is k*n (or n*k when trans_b).
template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha,
          const T* a, const T* b, T beta, T* c);

// NCHW convolution, weight layout [co, ci, k, k].
template <typename T>
void conv2d_fwd(const Conv2dGeom& g, const T* x, const T* w, T* y);
template <typename T>
void conv2d_bwd_input(const Conv2dGeom& g, const T* gy, const T* w, T* gx);
template <typename T>
void conv2d_bwd_weight(const Conv2dGeom& g, const T* x, const T* gy, T* gw);
}  // namespace serial

namespace parallel {
template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha,
          const T* a, const T* b, T beta, T* c);
template <typename T>
void conv2d_fwd(const Conv2dGeom& g, const T* x, const T* w, T* y);
template <typename T>
void conv2d_bwd_input(const Conv2dGeom& g, const T* gy, const T* w, T* gx);
template <typename T>
void conv2d_bwd_weight(const Conv2dGeom& g, const T* x, const T* gy, T* gw);
}  // namespace parallel

// Dispatch on the active backend.
template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha,
          const T* a, const T* b, T beta, T* c);
template <typename T>
void conv2d_fwd(const Conv2dGeom& g, const T* x, const T* w, T* y);
template <typename T>
void conv2d_bwd_input(const Conv2dGeom& g, const T* gy, const T* w, T* gx);
template <typename T>
void conv2d_bwd_weight(const Conv2dGeom& g, const T* x, const T* gy, T* gw);

}  // namespace ganbench::core::kernels
