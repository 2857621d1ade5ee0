// SPDX-License-Identifier: Apache-2.0
#include "kernel_ops.hpp"
#include "usct/simd.hpp"

namespace usct::simd::detail {
namespace {

void leapfrog_rows(const LeapfrogArgs& a, int y0, int y1) {
  for (int y = y0; y < y1; ++y) {
    const std::size_t row = static_cast<std::size_t>(y + kHalo) * a.stride + kHalo;
    for (int x = 0; x < a.n; ++x) {
      const std::size_t i = row + x;
      a.previous[i] = leapfrog_point(a.current, a.previous, a.beta, a.damp, a.stride, i);
    }
  }
}

void gradient_rows(const GradientArgs& a, int y0, int y1) {
  for (int y = y0; y < y1; ++y) {
    const std::size_t row = static_cast<std::size_t>(y + a.pad + kHalo) * a.stride + a.pad + kHalo;
    double* acc = a.accumulator + static_cast<std::size_t>(y) * a.nx;
    for (int x = 0; x < a.nx; ++x) {
      const std::size_t i = row + x;
      acc[x] = acc[x] + a.adjoint[i] * laplacian_point(a.frame, a.stride, i);
    }
  }
}

void axpy(double s, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + s * x[i];
}

void narrow(const double* in, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(in[i]);
}

const KernelTable kTable{Isa::Scalar, &leapfrog_rows, &gradient_rows, &axpy, &narrow};

}  // namespace

const KernelTable& scalar_table() { return kTable; }

}  // namespace usct::simd::detail
