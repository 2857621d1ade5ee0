// SPDX-License-Identifier: Apache-2.0
//
// Single-point forms of the stencil kernels. The scalar table uses them for
// every pixel and the vector variants for row remainders; the vector bodies
// mirror this exact operation order.
#pragma once

#include <cstddef>

#include "usct/simd.hpp"

namespace usct::simd::detail {

template <typename T>
inline double laplacian_point(const T* p, std::size_t s, std::size_t i) {
  const double lx = (static_cast<double>(p[i - 2]) + static_cast<double>(p[i + 2])) * kStencilOuter +
                    (static_cast<double>(p[i - 1]) + static_cast<double>(p[i + 1])) * kStencilInner;
  const double ly =
      (static_cast<double>(p[i - 2 * s]) + static_cast<double>(p[i + 2 * s])) * kStencilOuter +
      (static_cast<double>(p[i - s]) + static_cast<double>(p[i + s])) * kStencilInner;
  return (lx + ly) + static_cast<double>(p[i]) * kStencilCenter2d;
}

inline double leapfrog_point(const double* p, const double* q, const double* beta, const double* g,
                             std::size_t s, std::size_t i) {
  const double lap = laplacian_point(p, s, i);
  const double t = (p[i] * 2.0 - g[i] * q[i]) + beta[i] * lap;
  return g[i] * t;
}

}  // namespace usct::simd::detail
