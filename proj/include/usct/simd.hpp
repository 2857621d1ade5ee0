// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops of the solver, in a scalar reference version and
// vectorized variants picked at runtime. Every variant performs the same
// floating-point operations in the same order (no FMA contraction), so all of
// them produce bit-identical results; tests/unit/test_simd.cpp enforces that.
#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace usct::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

/// Whether this binary carries the variant and the CPU can run it.
bool supported(Isa isa);
/// Best supported variant.
Isa detected_isa();
/// Variant used by the solver: an override from set_isa(), else the
/// USCT_SIMD environment variable ("scalar", "avx2", "neon"), else detected.
Isa active_isa();
void set_isa(std::optional<Isa> isa);

// 4th-order central second difference, without the 1/dx^2 factor.
inline constexpr double kStencilOuter = -1.0 / 12.0;
inline constexpr double kStencilInner = 4.0 / 3.0;
inline constexpr double kStencilCenter2d = -5.0;  // two axes of -5/2

/// Fields live on a padded layout with a 2-pixel zero halo: row stride is
/// n + 4 and interior pixel (x, y) sits at (y + 2) * stride + (x + 2).
inline constexpr int kHalo = 2;

struct LeapfrogArgs {
  const double* current;  // p^k
  double* previous;       // p^{k-1} on entry, p^{k+1} on exit
  const double* beta;     // (c dt / dx)^2
  const double* damp;     // sponge multiplier, 1 in the interior
  std::size_t stride;
  int n;                  // interior pixels per axis
};

/// Interior rows [y0, y1) of one leapfrog step:
///   next = g * ((2 p - g * prev) + beta * L p)
using LeapfrogRowsFn = void (*)(const LeapfrogArgs& args, int y0, int y1);

struct GradientArgs {
  const float* frame;     // stored forward field, padded layout
  const double* adjoint;  // adjoint field, padded layout
  double* accumulator;    // image-region accumulator, row-major nx * nx
  std::size_t stride;
  int pad;                // image offset inside the interior
  int nx;
};

/// accumulator(x, y) += adjoint * L frame over image rows [y0, y1).
using GradientRowsFn = void (*)(const GradientArgs& args, int y0, int y1);

/// y += a * x
using AxpyFn = void (*)(double a, const double* x, double* y, std::size_t n);

/// out = float(in)
using NarrowFn = void (*)(const double* in, float* out, std::size_t n);

struct KernelTable {
  Isa isa;
  LeapfrogRowsFn leapfrog_rows;
  GradientRowsFn gradient_rows;
  AxpyFn axpy;
  NarrowFn narrow;
};

/// Throws InvalidArgument when the variant is not supported here.
const KernelTable& kernels(Isa isa);
const KernelTable& active_kernels();

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();
}  // namespace detail

}  // namespace usct::simd
