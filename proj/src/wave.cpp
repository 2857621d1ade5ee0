// SPDX-License-Identifier: Apache-2.0
#include "usct/wave.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "usct/error.hpp"
#include "usct/parallel.hpp"
#include "usct/simd.hpp"

namespace usct {

SamplingOperator::SamplingOperator(std::vector<std::size_t> pixels, int n_total)
    : pixels_(std::move(pixels)), n_total_(n_total) {
  const auto limit = static_cast<std::size_t>(n_total) * n_total;
  for (std::size_t p : pixels_) {
    if (p >= limit) fail(ErrorCode::InvalidShape, "receiver pixel index out of range");
  }
}

SamplingOperator SamplingOperator::from_array(const Grid2D& grid, const TransducerArray& array) {
  std::vector<std::size_t> pixels;
  pixels.reserve(static_cast<std::size_t>(array.n_receivers()));
  for (const Point2& pos : transducer_positions(array)) {
    const auto pix = nearest_comp_pixel(grid, pos);
    if (!pix) fail(ErrorCode::InvalidShape, "transducer outside the computational grid");
    pixels.push_back(static_cast<std::size_t>(pix->iy) * grid.n_total() + pix->ix);
  }
  return SamplingOperator(std::move(pixels), grid.n_total());
}

std::size_t transducer_pixel(const AcquisitionConfig& config, int receiver) {
  const auto pix = nearest_comp_pixel(config.grid, transducer_position(config.array, receiver));
  if (!pix) fail(ErrorCode::InvalidShape, "transducer outside the computational grid");
  return static_cast<std::size_t>(pix->iy) * config.grid.n_total() + pix->ix;
}

SourceTerm weighted_transmitter_source(const AcquisitionConfig& config, std::span<const double> weights) {
  const int n_tx = config.array.n_transmitters();
  if (static_cast<int>(weights.size()) != n_tx) {
    fail(ErrorCode::ShapeMismatch, "encoding weights have length " + std::to_string(weights.size()) +
                                       ", expected " + std::to_string(n_tx));
  }
  std::vector<double> pulse(static_cast<std::size_t>(config.n_steps));
  const double inv_area = 1.0 / (config.grid.dx * config.grid.dx);
  for (int k = 0; k < config.n_steps; ++k) pulse[k] = pulse_eval(config.pulse, k * config.dt) * inv_area;

  // Ordered by pixel so merged emitters sum in a fixed order.
  std::map<std::size_t, std::vector<double>> merged;
  for (int i = 0; i < n_tx; ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const std::size_t pixel = transducer_pixel(config, config.array.transmitter_indices()[i]);
    auto [it, inserted] = merged.try_emplace(pixel, std::vector<double>(pulse.size(), 0.0));
    auto& series = it->second;
    for (std::size_t k = 0; k < pulse.size(); ++k) series[k] += w * pulse[k];
  }
  SourceTerm out;
  out.reserve(merged.size());
  for (auto& [pixel, series] : merged) out.push_back({pixel, std::move(series)});
  return out;
}

SourceTerm transmitter_source(const AcquisitionConfig& config, int transmitter, double amplitude) {
  if (transmitter < 0 || transmitter >= config.array.n_transmitters()) {
    fail(ErrorCode::InvalidArgument, "transmitter index " + std::to_string(transmitter) + " out of range");
  }
  std::vector<double> w(static_cast<std::size_t>(config.array.n_transmitters()), 0.0);
  w[static_cast<std::size_t>(transmitter)] = amplitude;
  return weighted_transmitter_source(config, w);
}

FrameStore::FrameStore(int n_total, int n_steps)
    : n_total_(n_total), n_steps_(n_steps), data_(static_cast<std::size_t>(n_steps) * frame_size(), 0.0f) {}

float FrameStore::at(int k, std::size_t comp_pixel) const {
  const std::size_t iy = comp_pixel / static_cast<std::size_t>(n_total_);
  const std::size_t ix = comp_pixel % static_cast<std::size_t>(n_total_);
  return frame(k)[(iy + simd::kHalo) * stride() + ix + simd::kHalo];
}

Propagator::Propagator(const SoundSpeedMap& map, const AcquisitionConfig& config)
    : config_(config), n_total_(config.grid.n_total()), stride_(static_cast<std::size_t>(n_total_) + 4) {
  config_.validate();
  const Grid2D& g = config_.grid;
  if (map.grid().nx != g.nx || map.grid().dx != g.dx) {
    fail(ErrorCode::ShapeMismatch, "sound speed map grid does not match the acquisition grid");
  }
  cfl_check(map, config_.dt);

  const std::size_t size = stride_ * stride_;
  beta_.assign(size, 0.0);
  alpha_.assign(size, 0.0);
  damp_.assign(size, 0.0);
  const int width = resolved_sponge_width(config_);
  const double dt2 = config_.dt * config_.dt;
  for (int iy = 0; iy < n_total_; ++iy) {
    for (int ix = 0; ix < n_total_; ++ix) {
      const int qx = ix - g.pad;
      const int qy = iy - g.pad;
      const bool image = qx >= 0 && qy >= 0 && qx < g.nx && qy < g.nx;
      const double c = image ? map.at(qx, qy) : kWaterSpeed;
      const std::size_t i = (static_cast<std::size_t>(iy) + simd::kHalo) * stride_ + ix + simd::kHalo;
      alpha_[i] = c * c * dt2;
      beta_[i] = alpha_[i] / (g.dx * g.dx);
      const int edge = std::min({ix, iy, n_total_ - 1 - ix, n_total_ - 1 - iy});
      double damping = 1.0;
      if (edge < width) {
        const double depth = static_cast<double>(width - edge) / width;
        const double a = config_.sponge.strength * depth;
        damping = std::exp(-(a * a));
      }
      damp_[i] = damping;
    }
  }
}

std::size_t Propagator::padded_index(std::size_t comp_pixel) const {
  const std::size_t n = static_cast<std::size_t>(n_total_);
  return (comp_pixel / n + simd::kHalo) * stride_ + comp_pixel % n + simd::kHalo;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void Propagator::run(const SourceTerm& source, const LevelObserver& observer) const {
  const std::size_t limit = static_cast<std::size_t>(n_total_) * n_total_;
  std::vector<std::size_t> src_index;
  src_index.reserve(source.size());
  for (const auto& s : source) {
    if (s.pixel >= limit) fail(ErrorCode::InvalidShape, "source pixel out of range");
    src_index.push_back(padded_index(s.pixel));
  }

  std::vector<double> current(stride_ * stride_, 0.0);
  std::vector<double> previous(stride_ * stride_, 0.0);
  const simd::KernelTable& kern = simd::active_kernels();
  simd::LeapfrogArgs args{nullptr, nullptr, beta_.data(), damp_.data(), stride_, n_total_};

  observer(0, current);
  const int levels = config_.n_steps;
  for (int k = 0; k + 1 < levels; ++k) {
    args.current = current.data();
    args.previous = previous.data();
    kern.leapfrog_rows(args, 0, n_total_);
    for (std::size_t s = 0; s < source.size(); ++s) {
      const auto& series = source[s].series;
      if (static_cast<std::size_t>(k) >= series.size()) continue;
      const std::size_t i = src_index[s];
      previous[i] += damp_[i] * (alpha_[i] * series[static_cast<std::size_t>(k)]);
    }
    current.swap(previous);
    if (((k + 1) % 64 == 0 || k + 2 == levels) && !all_finite(current)) {
      fail(ErrorCode::NumericalBlowup, "non-finite pressure at time level " + std::to_string(k + 1));
    }
    observer(k + 1, current);
  }
}

WaveField forward_solve(const SoundSpeedMap& map, const AcquisitionConfig& config, const SourceTerm& source,
                        const SolveOptions& options) {
  return forward_solve(Propagator(map, config), source, options);
}

WaveField forward_solve(const Propagator& prop, const SourceTerm& source, const SolveOptions& options) {
  const AcquisitionConfig& config = prop.config();
  const SamplingOperator receivers =
      options.receivers ? *options.receivers : SamplingOperator::from_array(config.grid, config.array);
  if (receivers.n_total() != prop.n_total()) {
    fail(ErrorCode::ShapeMismatch, "sampling operator built for a different grid");
  }

  WaveField field;
  field.grid = config.grid;
  field.n_steps = config.n_steps;
  field.n_receivers = receivers.size();
  field.traces.assign(static_cast<std::size_t>(field.n_steps) * field.n_receivers, 0.0);
  if (options.store_frames) field.frames.emplace(prop.n_total(), config.n_steps);

  std::vector<std::size_t> rx;
  for (std::size_t p : receivers.pixels()) rx.push_back(prop.padded_index(p));
  const simd::KernelTable& kern = simd::active_kernels();

  prop.run(source, [&](int k, std::span<const double> p) {
    double* row = field.traces.data() + static_cast<std::size_t>(k) * field.n_receivers;
    for (std::size_t j = 0; j < rx.size(); ++j) row[j] = p[rx[j]];
    if (field.frames) kern.narrow(p.data(), field.frames->frame(k).data(), p.size());
  });
  return field;
}

WaveField forward_solve(const SoundSpeedMap& map, const AcquisitionConfig& config, int transmitter,
                        const SolveOptions& options) {
  return forward_solve(map, config, transmitter_source(config, transmitter), options);
}

WaveField forward_solve(const SoundSpeedMap& map, const AcquisitionConfig& config,
                        std::span<const double> weights, const SolveOptions& options) {
  return forward_solve(map, config, weighted_transmitter_source(config, weights), options);
}

std::vector<double> sample_traces(const FrameStore& frames, const SamplingOperator& op) {
  if (op.n_total() != frames.n_total()) {
    fail(ErrorCode::ShapeMismatch, "sampling operator built for a different grid");
  }
  const auto j_count = static_cast<std::size_t>(op.size());
  std::vector<double> out(static_cast<std::size_t>(frames.n_steps()) * j_count);
  for (int k = 0; k < frames.n_steps(); ++k) {
    for (std::size_t j = 0; j < j_count; ++j) out[k * j_count + j] = frames.at(k, op.pixels()[j]);
  }
  return out;
}

MeasurementTensor simulate_acquisition(const SoundSpeedMap& map, const AcquisitionConfig& config, int threads) {
  config.validate();
  const int n_tx = config.array.n_transmitters();
  MeasurementTensor out(n_tx, config.n_steps, config.array.n_receivers());
  parallel_for(static_cast<std::size_t>(n_tx), threads, [&](std::size_t i) {
    try {
      const WaveField f = forward_solve(map, config, static_cast<int>(i));
      std::copy(f.traces.begin(), f.traces.end(), out.channel(static_cast<int>(i)).begin());
    } catch (const Error& e) {
      throw Error(e.code(), "source " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace usct
