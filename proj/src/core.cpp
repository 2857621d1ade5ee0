// SPDX-License-Identifier: Apache-2.0
#include "usct/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "usct/error.hpp"

namespace usct {

Grid2D Grid2D::centered(int nx, double dx, int pad) {
  Grid2D g;
  g.nx = nx;
  g.dx = dx;
  g.pad = pad;
  g.origin = {-0.5 * (nx - 1) * dx, -0.5 * (nx - 1) * dx};
  return g;
}

void Grid2D::validate() const {
  if (nx < 16) fail(ErrorCode::InvalidShape, "grid nx must be >= 16, got " + std::to_string(nx));
  if (!(dx > 0.0) || !std::isfinite(dx)) fail(ErrorCode::InvalidArgument, "grid dx must be > 0");
  if (pad < 0) fail(ErrorCode::InvalidShape, "grid pad must be >= 0");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) {
    fail(ErrorCode::InvalidArgument, "grid origin must be finite");
  }
}

SoundSpeedMap::SoundSpeedMap(Grid2D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  const auto expected = static_cast<std::size_t>(grid_.nx) * grid_.nx;
  if (values_.size() != expected) {
    fail(ErrorCode::ShapeMismatch, "sound speed map has " + std::to_string(values_.size()) +
                                       " values, grid needs " + std::to_string(expected));
  }
  min_ = std::numeric_limits<double>::infinity();
  max_ = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < values_.size(); ++q) {
    const double c = values_[q];
    if (!(c > 0.0) || !std::isfinite(c)) {
      fail(ErrorCode::InvalidMedium,
           "non-positive or non-finite speed " + std::to_string(c) + " at pixel " + std::to_string(q));
    }
    min_ = std::min(min_, c);
    max_ = std::max(max_, c);
  }
}

SoundSpeedMap SoundSpeedMap::uniform(Grid2D grid, double speed) {
  return SoundSpeedMap(grid, std::vector<double>(static_cast<std::size_t>(grid.nx) * grid.nx, speed));
}

TransducerArray::TransducerArray(double radius, int n_receivers, std::vector<int> transmitter_indices)
    : radius_(radius), n_receivers_(n_receivers), transmitters_(std::move(transmitter_indices)) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    fail(ErrorCode::InvalidArgument, "ring radius must be > 0");
  }
  if (n_receivers < 1) fail(ErrorCode::InvalidShape, "ring needs at least one receiver");
  if (transmitters_.empty()) fail(ErrorCode::InvalidShape, "ring needs at least one transmitter");
  for (std::size_t i = 0; i < transmitters_.size(); ++i) {
    if (transmitters_[i] < 0 || transmitters_[i] >= n_receivers) {
      fail(ErrorCode::InvalidShape, "transmitter index out of range");
    }
    if (i > 0 && transmitters_[i] <= transmitters_[i - 1]) {
      fail(ErrorCode::InvalidShape, "transmitter indices must be strictly increasing");
    }
  }
}

TransducerArray TransducerArray::ring(double radius, int n_receivers, int stride) {
  if (stride < 1) fail(ErrorCode::InvalidArgument, "transmitter stride must be >= 1");
  std::vector<int> tx;
  for (int j = 0; j < n_receivers; j += stride) tx.push_back(j);
  return TransducerArray(radius, n_receivers, std::move(tx));
}

double TransducerArray::angle(int j) const {
  return 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_receivers_);
}

Point2 transducer_position(const TransducerArray& array, int j) {
  const int n = array.n_receivers();
  const double r = array.radius();
  if (n % 4 != 0) {
    const double a = array.angle(j);
    return {r * std::cos(a), r * std::sin(a)};
  }
  // Evaluate in the first quadrant and rotate by exact quarter turns, so the
  // ring is symmetric under 90 degree rotation to the last bit.
  const int quarter = n / 4;
  const double a = 2.0 * kPi * static_cast<double>(j % quarter) / static_cast<double>(n);
  Point2 p{r * std::cos(a), r * std::sin(a)};
  for (int q = 0; q < j / quarter; ++q) p = {-p.y, p.x};
  return p;
}

std::vector<Point2> transducer_positions(const TransducerArray& array) {
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(array.n_receivers()));
  for (int j = 0; j < array.n_receivers(); ++j) out.push_back(transducer_position(array, j));
  return out;
}

namespace {

// Offset from the grid center in pixels -> index offset from the center
// index n_c = (n - 1) / 2. Rounding is odd-symmetric about the center, and
// the one unavoidable tie (a point on a center line of an even grid) is
// broken counterclockwise so quarter-turn rotations map pixels to pixels.
double center_offset(double u, bool even, double tie_sign) {
  if (!even) return std::round(u);
  if (u == 0.0) return 0.5 * tie_sign;
  return std::copysign(std::floor(std::abs(u)) + 0.5, u);
}

}  // namespace

std::optional<PixelIndex> nearest_comp_pixel(const Grid2D& grid, Point2 offset) {
  const int n = grid.n_total();
  const bool even = n % 2 == 0;
  const double nc = 0.5 * (n - 1);
  const double vx = center_offset(offset.x / grid.dx, even, offset.y > 0.0 ? 1.0 : -1.0);
  const double vy = center_offset(offset.y / grid.dx, even, offset.x > 0.0 ? -1.0 : 1.0);
  const double fx = nc + vx;
  const double fy = nc + vy;
  if (!(fx >= 0.0 && fy >= 0.0 && fx < n && fy < n)) return std::nullopt;
  return PixelIndex{static_cast<int>(fx), static_cast<int>(fy)};
}

void ExcitationPulse::validate() const {
  if (!(f0 > 0.0) || !std::isfinite(f0)) fail(ErrorCode::InvalidArgument, "pulse f0 must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorCode::InvalidArgument, "pulse sigma must be > 0");
  if (!(t0 >= 0.0) || !std::isfinite(t0)) fail(ErrorCode::InvalidArgument, "pulse t0 must be >= 0");
  if (!std::isfinite(amplitude)) fail(ErrorCode::InvalidArgument, "pulse amplitude must be finite");
}

double pulse_eval(const ExcitationPulse& pulse, double t) {
  const double u = t - pulse.t0;
  return pulse.amplitude * std::exp(-(u * u) / (2.0 * pulse.sigma * pulse.sigma)) *
         std::sin(2.0 * kPi * pulse.f0 * t);
}

namespace {

// Distance (in pixels) from a computational pixel to the nearest grid edge.
int edge_distance(const Grid2D& grid, PixelIndex p) {
  const int n = grid.n_total();
  return std::min({p.ix, p.iy, n - 1 - p.ix, n - 1 - p.iy});
}

// Pixels between the outermost transducer and the grid edge, minus the stencil
// reach, so no transducer pixel or its stencil sees damping.
int clear_width(const AcquisitionConfig& config) {
  int closest = config.grid.n_total();
  for (const Point2& p : transducer_positions(config.array)) {
    const auto pix = nearest_comp_pixel(config.grid, p);
    if (!pix) return 0;
    closest = std::min(closest, edge_distance(config.grid, *pix));
  }
  return std::max(0, closest - 2);
}

}  // namespace

int resolved_sponge_width(const AcquisitionConfig& config) {
  if (!config.sponge.enabled) return 0;
  if (config.sponge.width >= 0) return config.sponge.width;
  return std::min(config.grid.pad, clear_width(config));
}

void AcquisitionConfig::validate() const {
  grid.validate();
  pulse.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::InvalidArgument, "dt must be > 0");
  if (n_steps < 2) fail(ErrorCode::InvalidArgument, "n_steps must be >= 2");
  if (!(c_ref > 0.0)) fail(ErrorCode::InvalidArgument, "c_ref must be > 0");
  const double cfl = std::max(c_ref, kWaterSpeed) * dt / grid.dx;
  if (cfl > kCflLimit) {
    std::ostringstream os;
    os << "CFL number " << cfl << " exceeds limit " << kCflLimit;
    fail(ErrorCode::UnstableTimestep, os.str());
  }
  for (int j = 0; j < array.n_receivers(); ++j) {
    if (!nearest_comp_pixel(grid, transducer_position(array, j))) {
      fail(ErrorCode::InvalidShape,
           "transducer " + std::to_string(j) + " lies outside the computational grid");
    }
  }
  if (sponge.enabled) {
    if (!(sponge.strength >= 0.0) || !std::isfinite(sponge.strength)) {
      fail(ErrorCode::InvalidArgument, "sponge strength must be >= 0");
    }
    if (sponge.width > grid.pad) fail(ErrorCode::InvalidShape, "sponge width exceeds pad");
    if (sponge.width >= 0 && sponge.width > clear_width(*this)) {
      fail(ErrorCode::InvalidShape, "sponge layer overlaps transducer pixels");
    }
  }
}

AcquisitionConfig default_config() {
  AcquisitionConfig c;
  c.grid = Grid2D::centered(360, 0.6e-3, 40);
  c.array = TransducerArray::ring(110.4e-3, 256, 4);
  c.pulse = ExcitationPulse{};
  c.dt = 0.2e-6;
  c.n_steps = 640;
  c.c_ref = 1590.0;
  return c;
}

double points_per_wavelength(const AcquisitionConfig& config, double c_min) {
  return c_min / (config.pulse.f0 * config.grid.dx);
}

double cfl_check(const SoundSpeedMap& map, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "dt must be > 0");
  // The map validates positivity on construction; re-check so a corrupted
  // copy cannot slip through.
  if (!(map.min() > 0.0)) fail(ErrorCode::InvalidMedium, "non-positive speed in medium");
  const double cfl = map.max() * dt / map.grid().dx;
  if (cfl > kCflLimit) {
    std::ostringstream os;
    os << "CFL number " << cfl << " exceeds limit " << kCflLimit;
    fail(ErrorCode::UnstableTimestep, os.str());
  }
  return cfl;
}

MeasurementTensor::MeasurementTensor(int n_sources, int n_steps, int n_receivers, bool encoded)
    : MeasurementTensor(n_sources, n_steps, n_receivers,
                        std::vector<double>(static_cast<std::size_t>(std::max(n_sources, 0)) *
                                            std::max(n_steps, 0) * std::max(n_receivers, 0)),
                        encoded) {}

MeasurementTensor::MeasurementTensor(int n_sources, int n_steps, int n_receivers,
                                     std::vector<double> values, bool encoded)
    : n_sources_(n_sources),
      n_steps_(n_steps),
      n_receivers_(n_receivers),
      values_(std::move(values)),
      encoded_(encoded) {
  if (n_sources < 1 || n_steps < 1 || n_receivers < 1) {
    fail(ErrorCode::InvalidShape, "measurement tensor dimensions must be positive");
  }
  if (values_.size() != static_cast<std::size_t>(n_sources) * n_steps * n_receivers) {
    fail(ErrorCode::ShapeMismatch, "measurement tensor value count does not match its shape");
  }
}

void MeasurementTensor::validate() const {
  for (std::size_t q = 0; q < values_.size(); ++q) {
    if (!std::isfinite(values_[q])) {
      fail(ErrorCode::NumericalBlowup, "non-finite measurement at flat index " + std::to_string(q));
    }
  }
}

}  // namespace usct
