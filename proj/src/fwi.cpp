// SPDX-License-Identifier: Apache-2.0
#include "usct/fwi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "usct/parallel.hpp"
#include "usct/simd.hpp"
#include "usct/wave.hpp"

namespace usct {

void FwiProblem::validate() const {
  config.validate();
  if (data.encoded()) fail(ErrorCode::InvalidArgument, "FWI expects unencoded per-source data");
  if (data.n_sources() != config.array.n_transmitters() || data.n_steps() != config.n_steps ||
      data.n_receivers() != config.array.n_receivers()) {
    fail(ErrorCode::ShapeMismatch, "data shape does not match the acquisition config");
  }
  if (!(bounds.lo < bounds.hi) || !(bounds.lo > 0.0)) {
    fail(ErrorCode::InvalidArgument, "bounds must satisfy 0 < lo < hi");
  }
  if (!(initial_guess.grid() == config.grid)) {
    fail(ErrorCode::ShapeMismatch, "initial guess grid does not match the acquisition grid");
  }
  if (initial_guess.min() < bounds.lo || initial_guess.max() > bounds.hi) {
    fail(ErrorCode::InvalidArgument, "initial guess lies outside the box constraints");
  }
}

double misfit(std::span<const double> predicted, std::span<const double> observed) {
  if (predicted.size() != observed.size()) fail(ErrorCode::ShapeMismatch, "misfit operands differ in size");
  double sum = 0.0;
  for (std::size_t n = 0; n < predicted.size(); ++n) {
    const double r = observed[n] - predicted[n];
    sum += r * r;
  }
  return 0.5 * sum;
}

namespace {

struct ChannelResult {
  double loss = 0.0;
  std::vector<double> gradient;
};

// Forward solve for one (encoded) source, misfit against `observed`, and when
// requested the time-reversed adjoint solve. With y the adjoint field driven
// by the reversed residual, the discrete gradient is
//   dJ/dc = (2/c) sum_k y^{k+1} (L p^k + s^k)
// which is exact for this leapfrog scheme including the sponge.
ChannelResult solve_channel(const Propagator& prop, const SoundSpeedMap& c, const SourceTerm& source,
                            std::span<const double> observed, bool want_gradient) {
  const AcquisitionConfig& config = prop.config();
  SolveOptions opts;
  opts.store_frames = want_gradient;
  const WaveField fwd = forward_solve(prop, source, opts);

  ChannelResult out;
  out.loss = misfit(fwd.traces, observed);
  if (!want_gradient) return out;

  const int K = config.n_steps;
  const int J = fwd.n_receivers;
  const Grid2D& g = config.grid;
  SourceTerm adjoint_source;
  adjoint_source.reserve(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) {
    PointSource ps;
    ps.pixel = transducer_pixel(config, j);
    ps.series.resize(static_cast<std::size_t>(K));
    for (int m = 0; m < K; ++m) {
      const std::size_t n = static_cast<std::size_t>(K - 1 - m) * J + j;
      ps.series[static_cast<std::size_t>(m)] = fwd.traces[n] - observed[n];
    }
    adjoint_source.push_back(std::move(ps));
  }

  // Forward sources that sit inside the image contribute s^k to L p^k + s^k.
  struct ImageSource {
    std::size_t image_index;
    std::size_t padded_index;
    const std::vector<double>* series;
  };
  std::vector<ImageSource> image_sources;
  for (const auto& s : source) {
    const int ix = static_cast<int>(s.pixel % static_cast<std::size_t>(g.n_total())) - g.pad;
    const int iy = static_cast<int>(s.pixel / static_cast<std::size_t>(g.n_total())) - g.pad;
    if (ix >= 0 && iy >= 0 && ix < g.nx && iy < g.nx) {
      image_sources.push_back({static_cast<std::size_t>(iy) * g.nx + ix, prop.padded_index(s.pixel), &s.series});
    }
  }

  const std::size_t n_image = static_cast<std::size_t>(g.nx) * g.nx;
  std::vector<double> stencil_acc(n_image, 0.0);
  std::vector<double> source_acc(n_image, 0.0);
  const simd::KernelTable& kern = simd::active_kernels();
  simd::GradientArgs args{nullptr, nullptr, stencil_acc.data(), prop.stride(), g.pad, g.nx};

  prop.run(adjoint_source, [&](int level, std::span<const double> y) {
    // Adjoint level `level` is y^{k+1} for forward step k = K-1-level.
    const int k = K - 1 - level;
    if (level < 1 || k < 0) return;
    args.frame = fwd.frames->frame(k).data();
    args.adjoint = y.data();
    kern.gradient_rows(args, 0, g.nx);
    for (const auto& s : image_sources) {
      if (static_cast<std::size_t>(k) < s.series->size()) {
        source_acc[s.image_index] += y[s.padded_index] * (*s.series)[static_cast<std::size_t>(k)];
      }
    }
  });

  const double inv_dx2 = 1.0 / (g.dx * g.dx);
  const auto cv = c.values();
  out.gradient.resize(n_image);
  for (std::size_t q = 0; q < n_image; ++q) {
    out.gradient[q] = (2.0 / cv[q]) * (stencil_acc[q] * inv_dx2 + source_acc[q]);
  }
  return out;
}

}  // namespace

Evaluation evaluate(const FwiProblem& problem, const SoundSpeedMap& c, const std::vector<std::vector<double>>& rows,
                    bool want_gradient, double scale, int threads) {
  const Propagator prop(c, problem.config);
  const bool full = rows.empty();
  const std::size_t n_channels = full ? static_cast<std::size_t>(problem.data.n_sources()) : rows.size();

  std::vector<ChannelResult> results(n_channels);
  parallel_for(n_channels, threads, [&](std::size_t ch) {
    if (full) {
      const int i = static_cast<int>(ch);
      results[ch] = solve_channel(prop, c, transmitter_source(problem.config, i), problem.data.channel(i),
                                  want_gradient);
    } else {
      const auto observed = encode_channel(rows[ch], problem.data);
      results[ch] = solve_channel(prop, c, encode_source(problem.config, rows[ch]), observed, want_gradient);
    }
  });

  Evaluation ev;
  if (want_gradient) ev.gradient.assign(static_cast<std::size_t>(c.grid().nx) * c.grid().nx, 0.0);
  for (const auto& r : results) {
    ev.loss += scale * r.loss;
    for (std::size_t q = 0; q < r.gradient.size(); ++q) ev.gradient[q] += scale * r.gradient[q];
  }
  return ev;
}

double objective(const FwiProblem& problem, const SoundSpeedMap& c, int threads) {
  return evaluate(problem, c, {}, false, 1.0, threads).loss;
}

double objective(const FwiProblem& problem, const SoundSpeedMap& c, std::span<const double> w) {
  return evaluate(problem, c, {std::vector<double>(w.begin(), w.end())}, false).loss;
}

double objective(const FwiProblem& problem, const SoundSpeedMap& c, const EncodingMatrix& w, int threads) {
  std::vector<std::vector<double>> rows;
  for (int l = 0; l < w.l_channels(); ++l) rows.emplace_back(w.row(l).begin(), w.row(l).end());
  return evaluate(problem, c, rows, false, 1.0, threads).loss;
}

std::vector<double> gradient(const FwiProblem& problem, const SoundSpeedMap& c, std::span<const double> w,
                             int threads) {
  std::vector<std::vector<double>> rows;
  if (!w.empty()) rows.emplace_back(w.begin(), w.end());
  return evaluate(problem, c, rows, true, 1.0, threads).gradient;
}

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Momentum: return "momentum";
    case OptimizerKind::Nesterov: return "nesterov";
    case OptimizerKind::Adam: return "adam";
  }
  return "unknown";
}

std::optional<OptimizerKind> parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "momentum") return OptimizerKind::Momentum;
  if (name == "nesterov") return OptimizerKind::Nesterov;
  if (name == "adam") return OptimizerKind::Adam;
  return std::nullopt;
}

OptimizerState::OptimizerState(OptimizerSettings settings, std::size_t size)
    : settings_(settings), first_(size, 0.0) {
  if (!(settings_.step_size > 0.0)) fail(ErrorCode::InvalidArgument, "optimizer step size must be > 0");
  if (settings_.kind == OptimizerKind::Adam) second_.assign(size, 0.0);
}

void OptimizerState::step(std::span<double> x, std::span<const double> g) {
  if (x.size() != first_.size() || g.size() != first_.size()) {
    fail(ErrorCode::ShapeMismatch, "optimizer buffers do not match the parameter size");
  }
  ++iteration_;
  const double lr = settings_.step_size;
  switch (settings_.kind) {
    case OptimizerKind::Sgd:
      for (std::size_t q = 0; q < x.size(); ++q) x[q] -= lr * g[q];
      break;
    case OptimizerKind::Momentum: {
      const double mu = settings_.momentum;
      for (std::size_t q = 0; q < x.size(); ++q) {
        first_[q] = mu * first_[q] + g[q];
        x[q] -= lr * first_[q];
      }
      break;
    }
    case OptimizerKind::Nesterov: {
      // Look-ahead form that only needs the gradient at the current iterate.
      const double mu = settings_.momentum;
      for (std::size_t q = 0; q < x.size(); ++q) {
        const double v_prev = first_[q];
        first_[q] = mu * first_[q] - lr * g[q];
        x[q] += -mu * v_prev + (1.0 + mu) * first_[q];
      }
      break;
    }
    case OptimizerKind::Adam: {
      const double b1 = settings_.beta1;
      const double b2 = settings_.beta2;
      const double t = static_cast<double>(iteration_);
      const double c1 = 1.0 - std::pow(b1, t);
      const double c2 = 1.0 - std::pow(b2, t);
      for (std::size_t q = 0; q < x.size(); ++q) {
        first_[q] = b1 * first_[q] + (1.0 - b1) * g[q];
        second_[q] = b2 * second_[q] + (1.0 - b2) * g[q] * g[q];
        const double m_hat = first_[q] / c1;
        const double v_hat = second_[q] / c2;
        x[q] -= lr * m_hat / (std::sqrt(v_hat) + settings_.epsilon);
      }
      break;
    }
  }
}

ReconstructionResult reconstruct(const FwiProblem& problem, const OptimizerSettings& optimizer,
                                 const ReconstructOptions& options, const IterationCallback& callback) {
  problem.validate();
  if (options.n_iters < 1) fail(ErrorCode::InvalidArgument, "n_iters must be >= 1");
  if (options.encoder && *options.encoder != EncoderKind::Rademacher && *options.encoder != EncoderKind::Gaussian) {
    fail(ErrorCode::InvalidArgument, "stochastic FWI needs a rademacher or gaussian encoder");
  }
  if (options.channels_per_iter < 1) fail(ErrorCode::InvalidArgument, "channels_per_iter must be >= 1");

  const auto start = std::chrono::steady_clock::now();
  const Grid2D grid = problem.initial_guess.grid();
  std::vector<double> c(problem.initial_guess.values().begin(), problem.initial_guess.values().end());
  OptimizerState state(optimizer, c.size());
  Rng rng(options.seed);
  ReconstructionResult result{problem.initial_guess, {}, std::nullopt};

  for (int it = 0; it < options.n_iters; ++it) {
    try {
      const SoundSpeedMap current(grid, c);
      std::vector<std::vector<double>> rows;
      double scale = 1.0;
      if (options.encoder) {
        for (int l = 0; l < options.channels_per_iter; ++l) {
          rows.push_back(draw_encoding_vector(*options.encoder, problem.data.n_sources(), rng));
        }
        scale = 1.0 / options.channels_per_iter;
      }
      const Evaluation ev = evaluate(problem, current, rows, true, scale, options.threads);

      const std::vector<double> before = c;
      state.step(c, ev.gradient);
      double step2 = 0.0;
      for (std::size_t q = 0; q < c.size(); ++q) {
        c[q] = std::clamp(c[q], problem.bounds.lo, problem.bounds.hi);
        const double d = c[q] - before[q];
        step2 += d * d;
      }
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.log.push_back({it, ev.loss, std::sqrt(step2), elapsed});
      result.estimate = SoundSpeedMap(grid, c);
      if (callback && !callback(result.log.back(), result.estimate)) break;
    } catch (const Error& e) {
      result.error = Error(e.code(), "iteration " + std::to_string(it) + ": " + e.what());
      break;
    }
  }
  return result;
}

void write_convergence_log(std::ostream& out, std::span<const IterationRecord> log) {
  char line[160];
  for (const auto& r : log) {
    std::snprintf(line, sizeof line, "%d %.17g %.17g %.6f\n", r.iteration, r.loss, r.step_norm, r.wall_time);
    out << line;
  }
}

}  // namespace usct
