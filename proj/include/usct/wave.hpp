// SPDX-License-Identifier: Apache-2.0
//
// Constant-density acoustic wave solver: 4th-order Laplacian, leapfrog in
// time, exponential sponge, nearest-pixel point sources and receivers.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "usct/core.hpp"

namespace usct {

/// Receiver pixels as flat row-major indices into the computational grid.
class SamplingOperator {
 public:
  SamplingOperator(std::vector<std::size_t> pixels, int n_total);
  static SamplingOperator from_array(const Grid2D& grid, const TransducerArray& array);

  std::span<const std::size_t> pixels() const { return pixels_; }
  int size() const { return static_cast<int>(pixels_.size()); }
  int n_total() const { return n_total_; }

 private:
  std::vector<std::size_t> pixels_;
  int n_total_;
};

/// Source density injected at one computational pixel; series[k] is s(k dt).
struct PointSource {
  std::size_t pixel = 0;
  std::vector<double> series;
};
using SourceTerm = std::vector<PointSource>;

/// Computational pixel of a transducer.
std::size_t transducer_pixel(const AcquisitionConfig& config, int receiver);

/// sum_i weights[i] * s_i: every transmitter's pulse at its nearest pixel,
/// scaled by 1/dx^2 (2D delta). Pixels shared by several emitters are merged.
SourceTerm weighted_transmitter_source(const AcquisitionConfig& config, std::span<const double> weights);
SourceTerm transmitter_source(const AcquisitionConfig& config, int transmitter, double amplitude = 1.0);

/// Full space-time history in float, padded layout (see simd.hpp).
class FrameStore {
 public:
  FrameStore(int n_total, int n_steps);

  int n_total() const { return n_total_; }
  int n_steps() const { return n_steps_; }
  std::size_t stride() const { return static_cast<std::size_t>(n_total_) + 4; }
  std::size_t frame_size() const { return stride() * stride(); }
  std::span<float> frame(int k) { return {data_.data() + k * frame_size(), frame_size()}; }
  std::span<const float> frame(int k) const { return {data_.data() + k * frame_size(), frame_size()}; }
  /// Value at computational pixel (flat row-major, no halo) and level k.
  float at(int k, std::size_t comp_pixel) const;

 private:
  int n_total_;
  int n_steps_;
  std::vector<float> data_;
};

struct WaveField {
  Grid2D grid;
  int n_steps = 0;
  int n_receivers = 0;
  std::vector<double> traces;  // K x J, time slowest
  std::optional<FrameStore> frames;

  double trace(int k, int j) const { return traces[static_cast<std::size_t>(k) * n_receivers + j]; }
};

/// Padded medium and time stepper shared by forward and adjoint solves.
class Propagator {
 public:
  /// Throws InvalidMedium / UnstableTimestep when the medium violates CFL.
  Propagator(const SoundSpeedMap& map, const AcquisitionConfig& config);

  const AcquisitionConfig& config() const { return config_; }
  int n_total() const { return n_total_; }
  std::size_t stride() const { return stride_; }
  std::size_t padded_index(std::size_t comp_pixel) const;
  std::span<const double> damping() const { return damp_; }

  /// Steps p^0 = p^{-1} = 0 through level K-1. After producing level k the
  /// observer sees the padded field p^k. Throws NumericalBlowup.
  using LevelObserver = std::function<void(int k, std::span<const double> field)>;
  void run(const SourceTerm& source, const LevelObserver& observer) const;

 private:
  AcquisitionConfig config_;
  int n_total_;
  std::size_t stride_;
  std::vector<double> beta_;   // (c dt / dx)^2
  std::vector<double> alpha_;  // (c dt)^2
  std::vector<double> damp_;
};

struct SolveOptions {
  bool store_frames = false;
  std::optional<SamplingOperator> receivers;  // defaults to the config's ring
};

WaveField forward_solve(const Propagator& propagator, const SourceTerm& source,
                        const SolveOptions& options = {});
WaveField forward_solve(const SoundSpeedMap& map, const AcquisitionConfig& config,
                        const SourceTerm& source, const SolveOptions& options = {});
WaveField forward_solve(const SoundSpeedMap& map, const AcquisitionConfig& config, int transmitter,
                        const SolveOptions& options = {});
/// Simultaneous firing of all transmitters weighted by `weights` (length I).
WaveField forward_solve(const SoundSpeedMap& map, const AcquisitionConfig& config,
                        std::span<const double> weights, const SolveOptions& options = {});

/// K x J traces read from stored frames.
std::vector<double> sample_traces(const FrameStore& frames, const SamplingOperator& op);

/// One independent solve per transmitter; I x K x J tensor.
MeasurementTensor simulate_acquisition(const SoundSpeedMap& map, const AcquisitionConfig& config,
                                       int threads = 0);

}  // namespace usct
