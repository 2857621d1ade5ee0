// SPDX-License-Identifier: Apache-2.0
#include "usct/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "kernel_ops.hpp"

#define USCT_AVX2 __attribute__((target("avx2")))

namespace usct::simd::detail {
namespace {

USCT_AVX2 inline __m256d laplacian4(const double* p, std::size_t s, std::size_t i) {
  const __m256d outer = _mm256_set1_pd(kStencilOuter);
  const __m256d inner = _mm256_set1_pd(kStencilInner);
  const __m256d center = _mm256_set1_pd(kStencilCenter2d);
  const __m256d lx = _mm256_add_pd(
      _mm256_mul_pd(_mm256_add_pd(_mm256_loadu_pd(p + i - 2), _mm256_loadu_pd(p + i + 2)), outer),
      _mm256_mul_pd(_mm256_add_pd(_mm256_loadu_pd(p + i - 1), _mm256_loadu_pd(p + i + 1)), inner));
  const __m256d ly = _mm256_add_pd(
      _mm256_mul_pd(_mm256_add_pd(_mm256_loadu_pd(p + i - 2 * s), _mm256_loadu_pd(p + i + 2 * s)),
                    outer),
      _mm256_mul_pd(_mm256_add_pd(_mm256_loadu_pd(p + i - s), _mm256_loadu_pd(p + i + s)), inner));
  return _mm256_add_pd(_mm256_add_pd(lx, ly), _mm256_mul_pd(_mm256_loadu_pd(p + i), center));
}

USCT_AVX2 inline __m256d load4(const float* p) { return _mm256_cvtps_pd(_mm_loadu_ps(p)); }

USCT_AVX2 inline __m256d laplacian4(const float* p, std::size_t s, std::size_t i) {
  const __m256d outer = _mm256_set1_pd(kStencilOuter);
  const __m256d inner = _mm256_set1_pd(kStencilInner);
  const __m256d center = _mm256_set1_pd(kStencilCenter2d);
  const __m256d lx = _mm256_add_pd(
      _mm256_mul_pd(_mm256_add_pd(load4(p + i - 2), load4(p + i + 2)), outer),
      _mm256_mul_pd(_mm256_add_pd(load4(p + i - 1), load4(p + i + 1)), inner));
  const __m256d ly = _mm256_add_pd(
      _mm256_mul_pd(_mm256_add_pd(load4(p + i - 2 * s), load4(p + i + 2 * s)), outer),
      _mm256_mul_pd(_mm256_add_pd(load4(p + i - s), load4(p + i + s)), inner));
  return _mm256_add_pd(_mm256_add_pd(lx, ly), _mm256_mul_pd(load4(p + i), center));
}

USCT_AVX2 void leapfrog_rows(const LeapfrogArgs& a, int y0, int y1) {
  const __m256d two = _mm256_set1_pd(2.0);
  for (int y = y0; y < y1; ++y) {
    const std::size_t row = static_cast<std::size_t>(y + kHalo) * a.stride + kHalo;
    int x = 0;
    for (; x + 4 <= a.n; x += 4) {
      const std::size_t i = row + x;
      const __m256d lap = laplacian4(a.current, a.stride, i);
      const __m256d g = _mm256_loadu_pd(a.damp + i);
      const __m256d p = _mm256_loadu_pd(a.current + i);
      const __m256d q = _mm256_loadu_pd(a.previous + i);
      const __m256d t = _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(p, two), _mm256_mul_pd(g, q)),
                                      _mm256_mul_pd(_mm256_loadu_pd(a.beta + i), lap));
      _mm256_storeu_pd(a.previous + i, _mm256_mul_pd(g, t));
    }
    for (; x < a.n; ++x) {
      const std::size_t i = row + x;
      a.previous[i] = leapfrog_point(a.current, a.previous, a.beta, a.damp, a.stride, i);
    }
  }
}

USCT_AVX2 void gradient_rows(const GradientArgs& a, int y0, int y1) {
  for (int y = y0; y < y1; ++y) {
    const std::size_t row = static_cast<std::size_t>(y + a.pad + kHalo) * a.stride + a.pad + kHalo;
    double* acc = a.accumulator + static_cast<std::size_t>(y) * a.nx;
    int x = 0;
    for (; x + 4 <= a.nx; x += 4) {
      const std::size_t i = row + x;
      const __m256d term = _mm256_mul_pd(_mm256_loadu_pd(a.adjoint + i), laplacian4(a.frame, a.stride, i));
      _mm256_storeu_pd(acc + x, _mm256_add_pd(_mm256_loadu_pd(acc + x), term));
    }
    for (; x < a.nx; ++x) {
      const std::size_t i = row + x;
      acc[x] = acc[x] + a.adjoint[i] * laplacian_point(a.frame, a.stride, i);
    }
  }
}

USCT_AVX2 void axpy(double s, const double* x, double* y, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(sv, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + s * x[i];
}

USCT_AVX2 void narrow(const double* in, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm_storeu_ps(out + i, _mm256_cvtpd_ps(_mm256_loadu_pd(in + i)));
  for (; i < n; ++i) out[i] = static_cast<float>(in[i]);
}

const KernelTable kTable{Isa::Avx2, &leapfrog_rows, &gradient_rows, &axpy, &narrow};

}  // namespace

const KernelTable* avx2_table() { return &kTable; }

}  // namespace usct::simd::detail

#else

namespace usct::simd::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace usct::simd::detail

#endif
