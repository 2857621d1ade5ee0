// SPDX-License-Identifier: Apache-2.0
//
// Small acquisition setups shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <vector>

#include "usct/core.hpp"

namespace usct::testing {

/// 60 px at 0.6 mm with a 16- or 32-element ring just outside the image.
inline AcquisitionConfig desk_config(int n_receivers = 16, int tx_stride = 8, int n_steps = 200) {
  AcquisitionConfig cfg;
  cfg.grid = Grid2D::centered(60, 0.6e-3, 20);
  cfg.array = TransducerArray::ring(32 * 0.6e-3, n_receivers, tx_stride);
  cfg.n_steps = n_steps;
  return cfg;
}

/// Water with one soft circular inclusion; the profile is smooth so the
/// map is differentiable and free of staircase artefacts.
inline SoundSpeedMap blob_phantom(const Grid2D& grid, double cx, double cy, double radius, double contrast) {
  std::vector<double> v(static_cast<std::size_t>(grid.nx) * grid.nx);
  for (int qy = 0; qy < grid.nx; ++qy) {
    for (int qx = 0; qx < grid.nx; ++qx) {
      const Point2 p = grid.pixel_center(qx, qy);
      const double r2 = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
      v[static_cast<std::size_t>(qy) * grid.nx + qx] = kWaterSpeed + contrast * std::exp(-r2 / (radius * radius));
    }
  }
  return SoundSpeedMap(grid, std::move(v));
}

}  // namespace usct::testing
