// SPDX-License-Identifier: Apache-2.0
#include "usct/simd.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include "kernel_ops.hpp"

namespace usct::simd::detail {
namespace {

// vfmaq is avoided on purpose: the scalar reference rounds after every multiply.
inline float64x2_t laplacian2(const double* p, std::size_t s, std::size_t i) {
  const float64x2_t outer = vdupq_n_f64(kStencilOuter);
  const float64x2_t inner = vdupq_n_f64(kStencilInner);
  const float64x2_t center = vdupq_n_f64(kStencilCenter2d);
  const float64x2_t lx = vaddq_f64(vmulq_f64(vaddq_f64(vld1q_f64(p + i - 2), vld1q_f64(p + i + 2)), outer),
                                   vmulq_f64(vaddq_f64(vld1q_f64(p + i - 1), vld1q_f64(p + i + 1)), inner));
  const float64x2_t ly =
      vaddq_f64(vmulq_f64(vaddq_f64(vld1q_f64(p + i - 2 * s), vld1q_f64(p + i + 2 * s)), outer),
                vmulq_f64(vaddq_f64(vld1q_f64(p + i - s), vld1q_f64(p + i + s)), inner));
  return vaddq_f64(vaddq_f64(lx, ly), vmulq_f64(vld1q_f64(p + i), center));
}

inline float64x2_t load2(const float* p) { return vcvt_f64_f32(vld1_f32(p)); }

inline float64x2_t laplacian2(const float* p, std::size_t s, std::size_t i) {
  const float64x2_t outer = vdupq_n_f64(kStencilOuter);
  const float64x2_t inner = vdupq_n_f64(kStencilInner);
  const float64x2_t center = vdupq_n_f64(kStencilCenter2d);
  const float64x2_t lx = vaddq_f64(vmulq_f64(vaddq_f64(load2(p + i - 2), load2(p + i + 2)), outer),
                                   vmulq_f64(vaddq_f64(load2(p + i - 1), load2(p + i + 1)), inner));
  const float64x2_t ly = vaddq_f64(vmulq_f64(vaddq_f64(load2(p + i - 2 * s), load2(p + i + 2 * s)), outer),
                                   vmulq_f64(vaddq_f64(load2(p + i - s), load2(p + i + s)), inner));
  return vaddq_f64(vaddq_f64(lx, ly), vmulq_f64(load2(p + i), center));
}

void leapfrog_rows(const LeapfrogArgs& a, int y0, int y1) {
  const float64x2_t two = vdupq_n_f64(2.0);
  for (int y = y0; y < y1; ++y) {
    const std::size_t row = static_cast<std::size_t>(y + kHalo) * a.stride + kHalo;
    int x = 0;
    for (; x + 2 <= a.n; x += 2) {
      const std::size_t i = row + x;
      const float64x2_t lap = laplacian2(a.current, a.stride, i);
      const float64x2_t g = vld1q_f64(a.damp + i);
      const float64x2_t t =
          vaddq_f64(vsubq_f64(vmulq_f64(vld1q_f64(a.current + i), two), vmulq_f64(g, vld1q_f64(a.previous + i))),
                    vmulq_f64(vld1q_f64(a.beta + i), lap));
      vst1q_f64(a.previous + i, vmulq_f64(g, t));
    }
    for (; x < a.n; ++x) {
      const std::size_t i = row + x;
      a.previous[i] = leapfrog_point(a.current, a.previous, a.beta, a.damp, a.stride, i);
    }
  }
}

void gradient_rows(const GradientArgs& a, int y0, int y1) {
  for (int y = y0; y < y1; ++y) {
    const std::size_t row = static_cast<std::size_t>(y + a.pad + kHalo) * a.stride + a.pad + kHalo;
    double* acc = a.accumulator + static_cast<std::size_t>(y) * a.nx;
    int x = 0;
    for (; x + 2 <= a.nx; x += 2) {
      const std::size_t i = row + x;
      const float64x2_t term = vmulq_f64(vld1q_f64(a.adjoint + i), laplacian2(a.frame, a.stride, i));
      vst1q_f64(acc + x, vaddq_f64(vld1q_f64(acc + x), term));
    }
    for (; x < a.nx; ++x) {
      const std::size_t i = row + x;
      acc[x] = acc[x] + a.adjoint[i] * laplacian_point(a.frame, a.stride, i);
    }
  }
}

void axpy(double s, const double* x, double* y, std::size_t n) {
  const float64x2_t sv = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(sv, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] = y[i] + s * x[i];
}

void narrow(const double* in, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1_f32(out + i, vcvt_f32_f64(vld1q_f64(in + i)));
  for (; i < n; ++i) out[i] = static_cast<float>(in[i]);
}

const KernelTable kTable{Isa::Neon, &leapfrog_rows, &gradient_rows, &axpy, &narrow};

}  // namespace

const KernelTable* neon_table() { return &kTable; }

}  // namespace usct::simd::detail

#else

namespace usct::simd::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace usct::simd::detail

#endif
