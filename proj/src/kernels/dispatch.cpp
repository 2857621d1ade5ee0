// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string>

#include "usct/error.hpp"
#include "usct/simd.hpp"

namespace usct::simd {
namespace {

// -1 means "no override".
std::atomic<int> g_override{-1};

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "neon") return Isa::Neon;
  return std::nullopt;
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return detail::avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon: return detail::neon_table() != nullptr;
  }
  return false;
}

Isa detected_isa() {
  if (supported(Isa::Avx2)) return Isa::Avx2;
  if (supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() {
  const int forced = g_override.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Isa>(forced);
  if (const char* env = std::getenv("USCT_SIMD")) {
    if (auto isa = parse_isa(env); isa && supported(*isa)) return *isa;
  }
  return detected_isa();
}

void set_isa(std::optional<Isa> isa) {
  if (isa && !supported(*isa)) {
    fail(ErrorCode::InvalidArgument, "SIMD variant " + std::string(to_string(*isa)) + " not supported here");
  }
  g_override.store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

const KernelTable& kernels(Isa isa) {
  if (!supported(isa)) {
    fail(ErrorCode::InvalidArgument, "SIMD variant " + std::string(to_string(isa)) + " not supported here");
  }
  switch (isa) {
    case Isa::Avx2: return *detail::avx2_table();
    case Isa::Neon: return *detail::neon_table();
    case Isa::Scalar: break;
  }
  return detail::scalar_table();
}

const KernelTable& active_kernels() { return kernels(active_isa()); }

}  // namespace usct::simd
