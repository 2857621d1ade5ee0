// SPDX-License-Identifier: Apache-2.0
#include "usct/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "usct/error.hpp"
#include "usct/io.hpp"
#include "usct/rng.hpp"

namespace usct {

std::string_view to_string(DensityClass c) {
  switch (c) {
    case DensityClass::A: return "A";
    case DensityClass::B: return "B";
    case DensityClass::C: return "C";
    case DensityClass::D: return "D";
  }
  return "?";
}

std::optional<DensityClass> parse_density_class(std::string_view name) {
  if (name == "A" || name == "a") return DensityClass::A;
  if (name == "B" || name == "b") return DensityClass::B;
  if (name == "C" || name == "c") return DensityClass::C;
  if (name == "D" || name == "d") return DensityClass::D;
  return std::nullopt;
}

Range default_fraction_range(DensityClass c) {
  switch (c) {
    case DensityClass::A: return {0.05, 0.15};
    case DensityClass::B: return {0.15, 0.35};
    case DensityClass::C: return {0.35, 0.60};
    case DensityClass::D: return {0.60, 0.85};
  }
  return {0.0, 0.0};
}

PhantomSpec PhantomSpec::for_class(DensityClass c, std::uint64_t seed) {
  PhantomSpec s;
  s.density_class = c;
  s.fibroglandular_fraction = default_fraction_range(c);
  s.seed = seed;
  return s;
}

void PhantomSpec::validate() const {
  auto ordered = [](Range r) { return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi; };
  if (!ordered(breast_radius) || !(breast_radius.lo > 0.0)) {
    fail(ErrorCode::InvalidArgument, "breast radius range must be positive and ordered");
  }
  if (!(skin_thickness > 0.0) || skin_thickness >= breast_radius.lo) {
    fail(ErrorCode::InvalidArgument, "skin thickness must be positive and thinner than the breast");
  }
  if (!ordered(fibroglandular_fraction) || fibroglandular_fraction.lo < 0.0 || fibroglandular_fraction.hi > 1.0) {
    fail(ErrorCode::InvalidArgument, "fibroglandular fraction range must lie in [0, 1]");
  }
  if (min_tumors < 0 || min_tumors > max_tumors) fail(ErrorCode::InvalidArgument, "tumor count range is invalid");
  if (!ordered(tumor_radius) || !(tumor_radius.lo > 0.0)) {
    fail(ErrorCode::InvalidArgument, "tumor radius range must be positive and ordered");
  }
  for (const auto& s : speeds) {
    if (!(s.mean > 0.0) || !(s.spread >= 0.0) || s.spread >= s.mean) {
      fail(ErrorCode::InvalidArgument, "tissue speeds must be positive with spread below the mean");
    }
  }
  if (!(blob_scale > 0.0)) fail(ErrorCode::InvalidArgument, "blob scale must be > 0");
}

void LabeledPhantom::validate() const {
  const auto n = map.values().size();
  if (labels.size() != n || tumor_mask.size() != n) {
    fail(ErrorCode::InvariantViolation, "label and mask rasters must match the map size");
  }
  for (std::size_t q = 0; q < n; ++q) {
    if (labels[q] >= kTissueCount) fail(ErrorCode::InvariantViolation, "unknown tissue label");
    if (tumor_mask[q] > 1) fail(ErrorCode::InvariantViolation, "tumor mask must be binary");
    if (tumor_mask[q] && labels[q] != kTumor) {
      fail(ErrorCode::InvariantViolation, "tumor mask pixel " + std::to_string(q) + " is not labeled tumor");
    }
  }
}

namespace {

// Separable Gaussian filter with zero boundary, radius 3 sigma.
std::vector<double> gaussian_blur(const std::vector<double>& in, int nx, double sigma_px) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  for (int i = -r; i <= r; ++i) k[i + r] = std::exp(-0.5 * i * i / (sigma_px * sigma_px));
  const double norm = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= norm;

  std::vector<double> tmp(in.size(), 0.0);
  std::vector<double> out(in.size(), 0.0);
  for (int y = 0; y < nx; ++y) {
    for (int x = 0; x < nx; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < nx) s += k[i + r] * in[static_cast<std::size_t>(y) * nx + xx];
      }
      tmp[static_cast<std::size_t>(y) * nx + x] = s;
    }
  }
  for (int y = 0; y < nx; ++y) {
    for (int x = 0; x < nx; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < nx) s += k[i + r] * tmp[static_cast<std::size_t>(yy) * nx + x];
      }
      out[static_cast<std::size_t>(y) * nx + x] = s;
    }
  }
  return out;
}

struct Ellipse {
  double cx, cy, a, b, theta;

  bool contains(Point2 p) const {
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double u = (c * dx + s * dy) / a;
    const double v = (-s * dx + c * dy) / b;
    return u * u + v * v <= 1.0;
  }
};

Point2 random_point_in_disk(Rng& rng, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double t = 2.0 * kPi * rng.uniform();
  return {r * std::cos(t), r * std::sin(t)};
}

constexpr int kPlacementAttempts = 500;
constexpr int kBlobCount = 48;

}  // namespace

LabeledPhantom generate_phantom(const PhantomSpec& spec, const Grid2D& grid) {
  spec.validate();
  grid.validate();
  const int nx = grid.nx;
  const double half_fov = 0.5 * (nx - 1) * grid.dx;
  if (spec.breast_radius.hi > half_fov) {
    fail(ErrorCode::InfeasibleSpec, "breast radius " + std::to_string(spec.breast_radius.hi) +
                                        " m does not fit the " + std::to_string(2 * half_fov) + " m image");
  }

  Rng rng(spec.seed);
  const double radius = rng.uniform(spec.breast_radius.lo, spec.breast_radius.hi);
  const double fraction = rng.uniform(spec.fibroglandular_fraction.lo, spec.fibroglandular_fraction.hi);
  const int n_tumors = static_cast<int>(rng.uniform_int(spec.min_tumors, spec.max_tumors));
  const double inner = radius - spec.skin_thickness;

  const std::size_t n = static_cast<std::size_t>(nx) * nx;
  std::vector<std::uint8_t> labels(n, kWater);
  std::vector<Point2> centers(n);
  for (int qy = 0; qy < nx; ++qy) {
    for (int qx = 0; qx < nx; ++qx) {
      const std::size_t q = static_cast<std::size_t>(qy) * nx + qx;
      const Point2 p = grid.pixel_center(qx, qy);
      centers[q] = {p.x - grid.center().x, p.y - grid.center().y};
      const double r = std::hypot(centers[q].x, centers[q].y);
      if (r <= inner) {
        labels[q] = kFat;
      } else if (r <= radius) {
        labels[q] = kSkin;
      }
    }
  }

  // Tumors: non-touching ellipses (a one-pixel gutter keeps them separate
  // components under 8-connectivity) fully inside the skin.
  std::vector<std::uint8_t> mask(n, 0);
  std::vector<int> tumor_id(n, -1);
  for (int t = 0; t < n_tumors; ++t) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      Ellipse e{0, 0, rng.uniform(spec.tumor_radius.lo, spec.tumor_radius.hi),
                rng.uniform(spec.tumor_radius.lo, spec.tumor_radius.hi), kPi * rng.uniform()};
      const double reach = std::max(e.a, e.b);
      if (reach + grid.dx >= inner) continue;
      const Point2 c = random_point_in_disk(rng, inner - reach - grid.dx);
      e.cx = c.x;
      e.cy = c.y;
      std::vector<std::size_t> pixels;
      bool ok = true;
      for (int qy = 0; qy < nx && ok; ++qy) {
        for (int qx = 0; qx < nx && ok; ++qx) {
          const std::size_t q = static_cast<std::size_t>(qy) * nx + qx;
          if (!e.contains(centers[q])) continue;
          if (labels[q] != kFat) {
            ok = false;
            break;
          }
          for (int dy = -1; dy <= 1 && ok; ++dy) {
            for (int dx = -1; dx <= 1 && ok; ++dx) {
              const int x = qx + dx;
              const int y = qy + dy;
              if (x >= 0 && y >= 0 && x < nx && y < nx && mask[static_cast<std::size_t>(y) * nx + x]) ok = false;
            }
          }
          pixels.push_back(q);
        }
      }
      if (!ok || pixels.size() < 4) continue;
      for (std::size_t q : pixels) {
        mask[q] = 1;
        labels[q] = kTumor;
        tumor_id[q] = t;
      }
      placed = true;
    }
    if (!placed) {
      fail(ErrorCode::InfeasibleSpec, "could not place tumor " + std::to_string(t + 1) + " of " +
                                          std::to_string(n_tumors) + " after " +
                                          std::to_string(kPlacementAttempts) + " attempts");
    }
  }

  // Fibroglandular texture: smoothed random elliptical blobs, thresholded
  // at the level that hits the drawn area fraction.
  std::vector<double> field(n, 0.0);
  for (int b = 0; b < kBlobCount; ++b) {
    const Point2 c = random_point_in_disk(rng, inner);
    const Ellipse e{c.x, c.y, rng.uniform(0.5, 2.0) * spec.blob_scale, rng.uniform(0.5, 2.0) * spec.blob_scale,
                    kPi * rng.uniform()};
    for (std::size_t q = 0; q < n; ++q) {
      if (e.contains(centers[q])) field[q] += 1.0;
    }
  }
  field = gaussian_blur(field, nx, 0.5 * spec.blob_scale / grid.dx);

  std::vector<std::size_t> candidates;
  std::size_t breast = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (labels[q] != kWater) ++breast;
    if (labels[q] == kFat) candidates.push_back(q);
  }
  const double nb = static_cast<double>(breast);
  auto target = static_cast<std::size_t>(std::llround(fraction * nb));
  target = std::max(target, static_cast<std::size_t>(std::ceil(spec.fibroglandular_fraction.lo * nb)));
  target = std::min(target, static_cast<std::size_t>(std::floor(spec.fibroglandular_fraction.hi * nb)));
  if (target > candidates.size()) {
    fail(ErrorCode::InfeasibleSpec, "fibroglandular fraction cannot be met with the placed tumors");
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return field[a] > field[b]; });
  for (std::size_t m = 0; m < target; ++m) labels[candidates[m]] = kFibroglandular;

  double tissue_speed[kTissueCount];
  for (int t = 0; t < kTissueCount; ++t) {
    tissue_speed[t] = spec.speeds[t].mean + rng.uniform(-spec.speeds[t].spread, spec.speeds[t].spread);
  }
  std::vector<double> tumor_speed(static_cast<std::size_t>(n_tumors));
  for (double& v : tumor_speed) {
    v = spec.speeds[kTumor].mean + rng.uniform(-spec.speeds[kTumor].spread, spec.speeds[kTumor].spread);
  }
  std::vector<double> values(n);
  for (std::size_t q = 0; q < n; ++q) {
    values[q] = labels[q] == kTumor ? tumor_speed[static_cast<std::size_t>(tumor_id[q])] : tissue_speed[labels[q]];
    // Files hold float32; rounding here makes write/load lossless.
    values[q] = static_cast<double>(static_cast<float>(values[q]));
  }
  LabeledPhantom out{SoundSpeedMap(grid, std::move(values)), std::move(labels), std::move(mask)};
  out.validate();
  return out;
}

double fibroglandular_fraction(const LabeledPhantom& p) {
  std::size_t fibro = 0;
  std::size_t breast = 0;
  for (std::uint8_t l : p.labels) {
    if (l != kWater) ++breast;
    if (l == kFibroglandular) ++fibro;
  }
  return breast ? static_cast<double>(fibro) / static_cast<double>(breast) : 0.0;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, std::string_view suffix) {
  std::filesystem::path p = stem;
  p += suffix;
  return p;
}

void write_phantom(const std::filesystem::path& stem, const LabeledPhantom& p) {
  p.validate();
  const int nx = p.map.grid().nx;
  io::save(with_suffix(stem, ".sos"), io::pack_map(p.map));
  io::save(with_suffix(stem, ".lbl"), io::pack_mask(nx, p.labels));
  io::save(with_suffix(stem, ".msk"), io::pack_mask(nx, p.tumor_mask));
}

LabeledPhantom load_raster(const std::filesystem::path& stem, double dx, int pad) {
  const auto sos = io::load(with_suffix(stem, ".sos"), io::ContainerKind::SoundSpeed);
  int nx = 0;
  const auto values = io::unpack_image(sos, &nx);
  for (std::size_t q = 0; q < values.size(); ++q) {
    if (!(values[q] > 0.0) || !std::isfinite(values[q])) {
      fail(ErrorCode::InvariantViolation, "speed at pixel " + std::to_string(q) + " is not positive");
    }
  }
  int nl = 0;
  int nm = 0;
  auto labels = io::unpack_mask(io::load(with_suffix(stem, ".lbl"), io::ContainerKind::Mask), &nl);
  auto mask = io::unpack_mask(io::load(with_suffix(stem, ".msk"), io::ContainerKind::Mask), &nm);
  if (nl != nx || nm != nx) fail(ErrorCode::InvariantViolation, "phantom rasters have different sizes");
  LabeledPhantom p{SoundSpeedMap(Grid2D::centered(nx, dx, pad), values), std::move(labels), std::move(mask)};
  p.validate();
  return p;
}

}  // namespace usct
