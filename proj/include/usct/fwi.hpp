// SPDX-License-Identifier: Apache-2.0
//
// Full-waveform inversion: least-squares data misfit, its adjoint-state
// gradient with respect to the speed of sound, the source-encoded stochastic
// variant, first-order optimizers and the projected reconstruction loop.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "usct/core.hpp"
#include "usct/encoding.hpp"
#include "usct/error.hpp"

namespace usct {

struct Bounds {
  double lo = 1300.0;
  double hi = 1700.0;
};

struct FwiProblem {
  MeasurementTensor data;  // unencoded, I x K x J
  AcquisitionConfig config;
  SoundSpeedMap initial_guess;
  Bounds bounds;

  void validate() const;
};

/// 1/2 sum (observed - predicted)^2.
double misfit(std::span<const double> predicted, std::span<const double> observed);

struct Evaluation {
  double loss = 0.0;
  std::vector<double> gradient;  // dJ/dc over the image region, row-major
};

/// Evaluates sum_l scale * 1/2 ||d_{w_l} - M H^c s_{w_l}||^2 over the given
/// encoding rows, or the unencoded objective (all I sources) when `rows` is
/// empty. Channels run on up to `threads` workers and are reduced in order.
Evaluation evaluate(const FwiProblem& problem, const SoundSpeedMap& c,
                    const std::vector<std::vector<double>>& rows, bool want_gradient, double scale = 1.0,
                    int threads = 1);

/// 1/2 sum_i ||d_i - M H^c s_i||^2.
double objective(const FwiProblem& problem, const SoundSpeedMap& c, int threads = 1);
/// 1/2 ||d_w - M H^c s_w||^2 for one encoding vector.
double objective(const FwiProblem& problem, const SoundSpeedMap& c, std::span<const double> w);
/// Sum of the per-row encoded objectives (identity W reproduces the full one).
double objective(const FwiProblem& problem, const SoundSpeedMap& c, const EncodingMatrix& w, int threads = 1);

/// Adjoint-state gradient (ascent direction). Empty `w` means all sources.
std::vector<double> gradient(const FwiProblem& problem, const SoundSpeedMap& c, std::span<const double> w = {},
                             int threads = 1);

enum class OptimizerKind { Sgd, Momentum, Nesterov, Adam };

std::string_view to_string(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer_kind(std::string_view name);

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::Adam;
  double step_size = 1.0;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class OptimizerState {
 public:
  OptimizerState(OptimizerSettings settings, std::size_t size);

  const OptimizerSettings& settings() const { return settings_; }
  std::int64_t iteration() const { return iteration_; }

  /// Descends along -g in place. Buffers must match the parameter size.
  void step(std::span<double> x, std::span<const double> g);

 private:
  OptimizerSettings settings_;
  std::int64_t iteration_ = 0;
  std::vector<double> first_;   // velocity or Adam first moment
  std::vector<double> second_;  // Adam second moment
};

struct ReconstructOptions {
  int n_iters = 300;
  /// Rademacher or Gaussian draws a fresh encoding each iteration; nullopt
  /// runs deterministic full-batch iterations over every source.
  std::optional<EncoderKind> encoder = EncoderKind::Rademacher;
  int channels_per_iter = 1;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;       // at the iterate before the update
  double step_norm = 0.0;  // ||c_{t+1} - c_t||_2 after projection
  double wall_time = 0.0;  // seconds since the start of reconstruct()
};

struct ReconstructionResult {
  SoundSpeedMap estimate;
  std::vector<IterationRecord> log;
  std::optional<Error> error;  // set when the loop stopped early on a failure
};

/// Return false to stop after the current iteration.
using IterationCallback = std::function<bool(const IterationRecord&, const SoundSpeedMap&)>;

ReconstructionResult reconstruct(const FwiProblem& problem, const OptimizerSettings& optimizer,
                                 const ReconstructOptions& options, const IterationCallback& callback = {});

/// One "iteration loss step_norm wall_time" line per record.
void write_convergence_log(std::ostream& out, std::span<const IterationRecord> log);

}  // namespace usct
