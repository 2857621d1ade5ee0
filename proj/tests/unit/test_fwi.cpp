// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>
#include <string>

#include "desk.hpp"
#include "doctest.h"
#include "usct/error.hpp"
#include "usct/fwi.hpp"
#include "usct/rng.hpp"
#include "usct/wave.hpp"

using namespace usct;

namespace {

FwiProblem toy_problem(int n_receivers = 16, int tx_stride = 8) {
  const auto cfg = testing::desk_config(n_receivers, tx_stride);
  const auto truth = testing::blob_phantom(cfg.grid, 3e-3, -2e-3, 4e-3, 45.0);
  return {simulate_acquisition(truth, cfg, 1), cfg, SoundSpeedMap::uniform(cfg.grid, kWaterSpeed), {}};
}

/// Smooth random perturbation: a few Gaussian bumps with random signs.
std::vector<double> smooth_direction(const Grid2D& g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> d(static_cast<std::size_t>(g.nx) * g.nx, 0.0);
  for (int b = 0; b < 4; ++b) {
    const double cx = rng.uniform(-12e-3, 12e-3);
    const double cy = rng.uniform(-12e-3, 12e-3);
    const double a = rng.normal();
    for (int qy = 0; qy < g.nx; ++qy) {
      for (int qx = 0; qx < g.nx; ++qx) {
        const Point2 p = g.pixel_center(qx, qy);
        const double r2 = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
        d[static_cast<std::size_t>(qy) * g.nx + qx] += a * std::exp(-r2 / (16e-6));
      }
    }
  }
  return d;
}

SoundSpeedMap shifted(const SoundSpeedMap& c, const std::vector<double>& d, double h) {
  std::vector<double> v(c.values().begin(), c.values().end());
  for (std::size_t q = 0; q < v.size(); ++q) v[q] += h * d[q];
  return SoundSpeedMap(c.grid(), std::move(v));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

}  // namespace

TEST_CASE("misfit of hand-filled residuals") {
  const std::vector<double> obs = {1, 2, 2, 0, 1, 0};
  const std::vector<double> pred(6, 0.0);
  CHECK(misfit(pred, obs) == 5.0);
  CHECK(misfit(obs, obs) == 0.0);
  CHECK_THROWS_AS(misfit(pred, std::vector<double>(5)), Error);
}

TEST_CASE("objective and gradient vanish at the truth") {
  const auto cfg = testing::desk_config();
  const auto truth = testing::blob_phantom(cfg.grid, 0.0, 0.0, 5e-3, 30.0);
  const FwiProblem p{simulate_acquisition(truth, cfg, 1), cfg, truth, {}};
  CHECK(objective(p, truth) < 1e-20);
  for (double g : gradient(p, truth)) CHECK(g == 0.0);
}

TEST_CASE("adjoint gradient matches central differences") {
  const auto p = toy_problem();
  const auto& c = p.initial_guess;
  const auto g = gradient(p, c);
  const auto d = smooth_direction(c.grid(), 11);
  const double gd = dot(g, d);
  REQUIRE(std::abs(gd) > 0.0);
  for (double h : {1e-1, 1e-2}) {
    const double fd = (objective(p, shifted(c, d, h)) - objective(p, shifted(c, d, -h))) / (2 * h);
    CHECK(std::abs(fd - gd) / std::abs(gd) < 1e-4);
  }
}

TEST_CASE("encoded gradient with a unit vector is the single-source gradient") {
  const auto p = toy_problem();
  const std::vector<double> e1 = {0.0, 1.0};
  const auto ge = gradient(p, p.initial_guess, e1);
  const auto gs = evaluate(p, p.initial_guess, {}, true).gradient;
  const auto g0 = gradient(p, p.initial_guess, std::vector<double>{1.0, 0.0});
  for (std::size_t q = 0; q < gs.size(); ++q) {
    CHECK(ge[q] + g0[q] == doctest::Approx(gs[q]).epsilon(1e-12).scale(1e-30));
  }
  CHECK(objective(p, p.initial_guess, e1) + objective(p, p.initial_guess, std::vector<double>{1.0, 0.0}) ==
        doctest::Approx(objective(p, p.initial_guess)).epsilon(1e-13));
  const auto id = make_encoder(EncoderKind::Identity, 2, 2, 0);
  CHECK(objective(p, p.initial_guess, id) == doctest::Approx(objective(p, p.initial_guess)).epsilon(1e-13));
}

TEST_CASE("threaded evaluation is bit-identical") {
  const auto p = toy_problem(16, 4);
  const auto a = evaluate(p, p.initial_guess, {}, true, 1.0, 1);
  const auto b = evaluate(p, p.initial_guess, {}, true, 1.0, 3);
  CHECK(a.loss == b.loss);
  CHECK(a.gradient == b.gradient);
}

TEST_CASE("optimizers minimize a quadratic") {
  for (OptimizerKind kind :
       {OptimizerKind::Sgd, OptimizerKind::Momentum, OptimizerKind::Nesterov, OptimizerKind::Adam}) {
    CHECK(parse_optimizer_kind(to_string(kind)) == kind);
    OptimizerSettings s;
    s.kind = kind;
    s.step_size = kind == OptimizerKind::Adam ? 0.05 : 0.1;
    OptimizerState st(s, 2);
    std::vector<double> x = {3.0, -2.0};
    for (int it = 0; it < 500; ++it) {
      const std::vector<double> g = {x[0], 4.0 * x[1]};
      st.step(x, g);
    }
    CHECK(std::abs(x[0]) < 1e-2);
    CHECK(std::abs(x[1]) < 1e-2);
    CHECK(st.iteration() == 500);
  }
  CHECK_FALSE(parse_optimizer_kind("lbfgs"));
  OptimizerState st(OptimizerSettings{}, 2);
  std::vector<double> x(3);
  CHECK_THROWS_AS(st.step(x, std::vector<double>(3)), Error);
}

TEST_CASE("reconstruction stays at the truth") {
  const auto cfg = testing::desk_config();
  const auto truth = testing::blob_phantom(cfg.grid, 0.0, 0.0, 5e-3, 30.0);
  const FwiProblem p{simulate_acquisition(truth, cfg, 1), cfg, truth, {}};
  ReconstructOptions o;
  o.n_iters = 3;
  o.encoder = std::nullopt;
  const auto r = reconstruct(p, OptimizerSettings{}, o);
  CHECK_FALSE(r.error);
  for (const auto& rec : r.log) CHECK(rec.step_norm == 0.0);
  CHECK(r.estimate == truth);

  // Encoded data and encoded solves sum in different orders, so the
  // stochastic path only stays at the truth up to roundoff.
  o.encoder = EncoderKind::Rademacher;
  const auto rs = reconstruct(p, OptimizerSettings{}, o);
  for (std::size_t q = 0; q < truth.values().size(); ++q) {
    CHECK(std::abs(rs.estimate.values()[q] - truth.values()[q]) < 1e-6);
  }
}

TEST_CASE("full-batch gradient descent decreases the loss") {
  const auto p = toy_problem();
  // Step sized from the gradient so the first update moves about 1 m/s.
  const auto g = gradient(p, p.initial_guess);
  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  OptimizerSettings s;
  s.kind = OptimizerKind::Sgd;
  s.step_size = 1.0 / gmax;
  ReconstructOptions o;
  o.n_iters = 8;
  o.encoder = std::nullopt;
  const auto r = reconstruct(p, s, o);
  REQUIRE(r.log.size() == 8);
  for (std::size_t t = 1; t < r.log.size(); ++t) CHECK(r.log[t].loss < r.log[t - 1].loss);
}

TEST_CASE("stochastic reconstruction is reproducible and projected") {
  auto p = toy_problem();
  p.bounds = {1490.0, 1510.0};
  OptimizerSettings s;
  s.step_size = 2.0;
  ReconstructOptions o;
  o.n_iters = 5;
  o.seed = 99;
  const auto a = reconstruct(p, s, o);
  const auto b = reconstruct(p, s, o);
  REQUIRE(a.log.size() == 5);
  for (std::size_t t = 0; t < a.log.size(); ++t) {
    CHECK(a.log[t].loss == b.log[t].loss);
    CHECK(a.log[t].step_norm == b.log[t].step_norm);
  }
  CHECK(a.estimate == b.estimate);
  CHECK(a.estimate.min() >= 1490.0);
  CHECK(a.estimate.max() <= 1510.0);

  std::ostringstream os;
  write_convergence_log(os, a.log);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("problem validation") {
  auto p = toy_problem();
  p.bounds = {1600.0, 1700.0};
  CHECK_THROWS_AS(p.validate(), Error);
  p = toy_problem();
  p.data.set_encoded(true);
  CHECK_THROWS_AS(p.validate(), Error);
  p = toy_problem();
  ReconstructOptions o;
  o.n_iters = 0;
  CHECK_THROWS_AS(reconstruct(p, OptimizerSettings{}, o), Error);
}
