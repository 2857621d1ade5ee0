// SPDX-License-Identifier: Apache-2.0
//
// Stochastic 2D breast phantoms: a skin-wrapped disk of fat with smooth
// fibroglandular structure and elliptical tumors, plus truth labels.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "usct/core.hpp"

namespace usct {

enum class DensityClass { A, B, C, D };

std::string_view to_string(DensityClass c);
std::optional<DensityClass> parse_density_class(std::string_view name);

enum Tissue : std::uint8_t { kWater = 0, kFat = 1, kSkin = 2, kFibroglandular = 3, kTumor = 4 };
inline constexpr int kTissueCount = 5;

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct TissueSpeed {
  double mean = 1500.0;
  double spread = 0.0;  // uniform jitter half-width
};

struct PhantomSpec {
  DensityClass density_class = DensityClass::B;
  Range breast_radius{0.070, 0.095};  // m
  double skin_thickness = 2.0e-3;     // m
  Range fibroglandular_fraction{0.15, 0.35};
  int min_tumors = 0;
  int max_tumors = 3;
  Range tumor_radius{2.5e-3, 6.0e-3};  // semi-axis range, m
  TissueSpeed speeds[kTissueCount] = {
      {1500.0, 0.0}, {1460.0, 20.0}, {1625.0, 25.0}, {1545.0, 35.0}, {1575.0, 25.0}};
  double blob_scale = 4.0e-3;  // smoothing length of the fibroglandular texture, m
  std::uint64_t seed = 0;

  /// Defaults with the fibroglandular fraction range of a density class.
  static PhantomSpec for_class(DensityClass c, std::uint64_t seed = 0);
  /// Throws InvalidArgument.
  void validate() const;
};

Range default_fraction_range(DensityClass c);

struct LabeledPhantom {
  SoundSpeedMap map;
  std::vector<std::uint8_t> labels;      // Tissue per image pixel
  std::vector<std::uint8_t> tumor_mask;  // 0/1

  /// Throws InvariantViolation when the labels, mask and speeds disagree.
  void validate() const;
  bool operator==(const LabeledPhantom&) const = default;
};

/// Deterministic per spec (seed included). Throws InfeasibleSpec when the
/// breast does not fit the grid or tumors cannot be placed.
LabeledPhantom generate_phantom(const PhantomSpec& spec, const Grid2D& grid);

double fibroglandular_fraction(const LabeledPhantom& p);

/// stem.sos (speed), stem.lbl (labels), stem.msk (tumor mask).
void write_phantom(const std::filesystem::path& stem, const LabeledPhantom& p);
LabeledPhantom load_raster(const std::filesystem::path& stem, double dx = 0.6e-3, int pad = 40);

std::filesystem::path with_suffix(const std::filesystem::path& stem, std::string_view suffix);

}  // namespace usct
