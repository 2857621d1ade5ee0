// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <vector>

#include "desk.hpp"
#include "doctest.h"
#include "usct/rng.hpp"
#include "usct/simd.hpp"
#include "usct/wave.hpp"

using namespace usct;

namespace {

std::vector<double> random_field(std::size_t n, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<simd::Isa> vector_isas() {
  std::vector<simd::Isa> out;
  for (simd::Isa isa : {simd::Isa::Avx2, simd::Isa::Neon}) {
    if (simd::supported(isa)) out.push_back(isa);
  }
  return out;
}

}  // namespace

TEST_CASE("isa names round trip") {
  for (simd::Isa isa : {simd::Isa::Scalar, simd::Isa::Avx2, simd::Isa::Neon}) {
    CHECK(simd::parse_isa(simd::to_string(isa)) == isa);
  }
  CHECK_FALSE(simd::parse_isa("sse9"));
  CHECK(simd::supported(simd::Isa::Scalar));
}

TEST_CASE("vector leapfrog matches scalar bit for bit") {
  // Odd sizes exercise the scalar remainder paths.
  for (int n : {5, 17, 64, 83}) {
    const std::size_t stride = static_cast<std::size_t>(n) + 4;
    const std::size_t size = stride * stride;
    const auto cur = random_field(size, 1, -1.0, 1.0);
    const auto prev0 = random_field(size, 2, -1.0, 1.0);
    const auto beta = random_field(size, 3, 0.0, 0.3);
    const auto damp = random_field(size, 4, 0.5, 1.0);

    auto ref = prev0;
    simd::LeapfrogArgs a{cur.data(), ref.data(), beta.data(), damp.data(), stride, n};
    simd::kernels(simd::Isa::Scalar).leapfrog_rows(a, 0, n);

    for (simd::Isa isa : vector_isas()) {
      auto out = prev0;
      a.previous = out.data();
      simd::kernels(isa).leapfrog_rows(a, 0, n);
      CHECK(same_bits(ref, out));
    }
  }
}

TEST_CASE("vector gradient, axpy and narrow match scalar") {
  const int nx = 23;
  const int pad = 3;
  const std::size_t stride = nx + 2 * pad + 4;
  const auto frame_d = random_field(stride * stride, 5, -1.0, 1.0);
  std::vector<float> frame(frame_d.begin(), frame_d.end());
  const auto adj = random_field(stride * stride, 6, -1.0, 1.0);
  const auto acc0 = random_field(static_cast<std::size_t>(nx) * nx, 7, -1.0, 1.0);

  auto ref = acc0;
  simd::GradientArgs g{frame.data(), adj.data(), ref.data(), stride, pad, nx};
  simd::kernels(simd::Isa::Scalar).gradient_rows(g, 0, nx);

  const auto x = random_field(101, 8, -1.0, 1.0);
  auto y_ref = random_field(101, 9, -1.0, 1.0);
  const auto y0 = y_ref;
  simd::kernels(simd::Isa::Scalar).axpy(0.37, x.data(), y_ref.data(), x.size());
  std::vector<float> n_ref(x.size());
  simd::kernels(simd::Isa::Scalar).narrow(x.data(), n_ref.data(), x.size());

  for (simd::Isa isa : vector_isas()) {
    auto out = acc0;
    g.accumulator = out.data();
    simd::kernels(isa).gradient_rows(g, 0, nx);
    CHECK(same_bits(ref, out));

    auto y = y0;
    simd::kernels(isa).axpy(0.37, x.data(), y.data(), x.size());
    CHECK(same_bits(y_ref, y));

    std::vector<float> n_out(x.size());
    simd::kernels(isa).narrow(x.data(), n_out.data(), x.size());
    CHECK(std::memcmp(n_ref.data(), n_out.data(), n_ref.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("forward solve is identical under every kernel variant") {
  const auto cfg = testing::desk_config(16, 8, 120);
  const auto c = testing::blob_phantom(cfg.grid, 2e-3, -3e-3, 4e-3, 40.0);
  simd::set_isa(simd::Isa::Scalar);
  const auto ref = forward_solve(c, cfg, 0).traces;
  for (simd::Isa isa : vector_isas()) {
    simd::set_isa(isa);
    CHECK(same_bits(ref, forward_solve(c, cfg, 0).traces));
  }
  simd::set_isa(std::nullopt);
}
