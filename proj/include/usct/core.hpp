// SPDX-License-Identifier: Apache-2.0
//
// Shared data model: grids, media, the transducer ring, the excitation pulse
// and waveform tensors. Every type here is immutable once validated.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace usct {

/// von Neumann bound for the 4th-order-space / 2nd-order-time leapfrog in 2D.
inline constexpr double kCflLimit = 0.61237243569579452;  // sqrt(3/8)
inline constexpr double kWaterSpeed = 1500.0;             // m/s
inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Square image grid plus an absorbing pad on every side. Image indices
/// (qx, qy) run over [0, nx); computational indices over [0, nx + 2*pad).
struct Grid2D {
  int nx = 360;
  double dx = 0.6e-3;
  int pad = 40;
  Point2 origin{};  // center of image pixel (0,0), meters

  /// Grid whose image center sits at the physical origin.
  static Grid2D centered(int nx, double dx, int pad);

  int n_total() const { return nx + 2 * pad; }
  double field_of_view() const { return nx * dx; }
  Point2 pixel_center(int qx, int qy) const {
    return {origin.x + qx * dx, origin.y + qy * dx};
  }
  Point2 center() const {
    return {origin.x + 0.5 * (nx - 1) * dx, origin.y + 0.5 * (nx - 1) * dx};
  }
  /// Row-major flat index into the computational grid for image pixel (qx,qy).
  std::size_t comp_index(int qx, int qy) const {
    return static_cast<std::size_t>(qy + pad) * n_total() + (qx + pad);
  }

  void validate() const;
  bool operator==(const Grid2D&) const = default;
};

/// Pixelized speed of sound over the image region, m/s. Row-major, y slowest.
class SoundSpeedMap {
 public:
  SoundSpeedMap(Grid2D grid, std::vector<double> values);
  static SoundSpeedMap uniform(Grid2D grid, double speed);

  const Grid2D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double at(int qx, int qy) const { return values_[static_cast<std::size_t>(qy) * grid_.nx + qx]; }
  double min() const { return min_; }
  double max() const { return max_; }

  bool operator==(const SoundSpeedMap& o) const {
    return grid_ == o.grid_ && values_ == o.values_;
  }

 private:
  Grid2D grid_;
  std::vector<double> values_;
  double min_ = 0.0;
  double max_ = 0.0;
};

/// Equispaced ring of point transducers; a subset also transmits.
class TransducerArray {
 public:
  TransducerArray(double radius, int n_receivers, std::vector<int> transmitter_indices);
  /// Every `stride`-th receiver transmits, starting with receiver 0.
  static TransducerArray ring(double radius, int n_receivers, int stride = 4);

  double radius() const { return radius_; }
  int n_receivers() const { return n_receivers_; }
  int n_transmitters() const { return static_cast<int>(transmitters_.size()); }
  std::span<const int> transmitter_indices() const { return transmitters_; }
  /// Receiver 0 sits on +x; angles increase counterclockwise.
  double angle(int j) const;

  bool operator==(const TransducerArray&) const = default;

 private:
  double radius_;
  int n_receivers_;
  std::vector<int> transmitters_;
};

/// Position of transducer j relative to the ring center, meters.
Point2 transducer_position(const TransducerArray& array, int j);
/// Positions relative to the ring center, meters.
std::vector<Point2> transducer_positions(const TransducerArray& array);

struct PixelIndex {
  int ix = 0;
  int iy = 0;
  bool operator==(const PixelIndex&) const = default;
};

/// Nearest computational-grid pixel to a point given relative to the image
/// center; nullopt when it falls outside the computational grid. Rounding
/// is symmetric about the grid center.
std::optional<PixelIndex> nearest_comp_pixel(const Grid2D& grid, Point2 offset);

/// Gaussian-windowed sinusoid.
struct ExcitationPulse {
  double f0 = 0.5e6;
  double t0 = 3.2e-6;
  double sigma = 2.0e-6;
  double amplitude = 1.0;

  void validate() const;
  bool operator==(const ExcitationPulse&) const = default;
};

double pulse_eval(const ExcitationPulse& pulse, double t);

struct SpongeSettings {
  double strength = 0.3;  // damping exponent scale at the outer edge
  int width = -1;          // pixels; -1 picks the widest layer clear of the ring
  bool enabled = true;
  bool operator==(const SpongeSettings&) const = default;
};

struct AcquisitionConfig {
  Grid2D grid;
  TransducerArray array = TransducerArray::ring(110.4e-3, 256, 4);
  ExcitationPulse pulse;
  double dt = 0.2e-6;
  int n_steps = 640;
  double c_ref = 1590.0;  // assumed maximum speed for up-front CFL validation
  SpongeSettings sponge;

  double acquisition_time() const { return n_steps * dt; }
  /// Throws UnstableTimestep, InvalidArgument or InvalidShape.
  void validate() const;
  bool operator==(const AcquisitionConfig&) const = default;
};

/// Sponge width after resolving the automatic setting against the ring.
int resolved_sponge_width(const AcquisitionConfig& config);

/// Virtual imaging system defaults (360 px at 0.6 mm, 256/64 ring, 0.5 MHz).
AcquisitionConfig default_config();

double points_per_wavelength(const AcquisitionConfig& config, double c_min);

/// c_max * dt / dx for the medium; throws InvalidMedium or UnstableTimestep.
double cfl_check(const SoundSpeedMap& map, double dt);

/// Pressure samples indexed (source, time, receiver); source axis slowest.
class MeasurementTensor {
 public:
  MeasurementTensor() = default;
  MeasurementTensor(int n_sources, int n_steps, int n_receivers, bool encoded = false);
  MeasurementTensor(int n_sources, int n_steps, int n_receivers, std::vector<double> values,
                    bool encoded = false);

  int n_sources() const { return n_sources_; }
  int n_steps() const { return n_steps_; }
  int n_receivers() const { return n_receivers_; }
  bool encoded() const { return encoded_; }
  void set_encoded(bool encoded) { encoded_ = encoded; }

  std::size_t channel_size() const {
    return static_cast<std::size_t>(n_steps_) * n_receivers_;
  }
  double& at(int i, int k, int j) { return values_[index(i, k, j)]; }
  double at(int i, int k, int j) const { return values_[index(i, k, j)]; }
  std::span<double> channel(int i) { return {values_.data() + i * channel_size(), channel_size()}; }
  std::span<const double> channel(int i) const {
    return {values_.data() + i * channel_size(), channel_size()};
  }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Throws NumericalBlowup on any non-finite entry.
  void validate() const;
  bool operator==(const MeasurementTensor&) const = default;

 private:
  std::size_t index(int i, int k, int j) const {
    return (static_cast<std::size_t>(i) * n_steps_ + k) * n_receivers_ + j;
  }

  int n_sources_ = 0;
  int n_steps_ = 0;
  int n_receivers_ = 0;
  std::vector<double> values_;
  bool encoded_ = false;
};

}  // namespace usct
