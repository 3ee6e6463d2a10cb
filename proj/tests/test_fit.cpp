// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rpcmpi/error.hpp"
#include "rpcmpi/fit.hpp"
#include "rpcmpi/parallel.hpp"
#include "support.hpp"

using namespace rpcmpi;
using namespace rpcmpi::test;

namespace {

double weighted_output(const RenderOutput& r, const RenderAdjoint& up) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.rgb.data.size(); ++i) s += r.rgb.data[i] * up.rgb.data[i];
  for (std::size_t i = 0; i < r.pan.data.size(); ++i) s += r.pan.data[i] * up.pan.data[i];
  for (std::size_t i = 0; i < r.altitude.data.size(); ++i) s += r.altitude.data[i] * up.altitude.data[i];
  return s;
}

RenderAdjoint random_adjoint(Rng& rng, int w, int h) {
  RenderAdjoint up(w, h);
  up.rgb = random_image(rng, w, h, 3, -1, 1);
  up.pan = random_image(rng, w, h, 1, -1, 1);
  up.altitude = random_image(rng, w, h, 1, -0.1, 0.1);
  return up;
}

}  // namespace

TEST_SUITE("fit") {

TEST_CASE("activation inverses") {
  for (double y : {1e-6, 0.01, 0.5, 1.0, 7.0, 40.0}) CHECK(softplus(inverse_softplus(y)) == doctest::Approx(y).epsilon(1e-12));
  for (double p : {1e-6, 0.02, 0.5, 0.98}) CHECK(sigmoid(logit(p)) == doctest::Approx(p).epsilon(1e-12));
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(std::isfinite(softplus(800.0)));
  CHECK(sigmoid(-800.0) == 0.0);
}

TEST_CASE("zero upstream adjoint gives zero gradient") {
  Rng rng(71);
  const Mpi m = random_mpi(rng, 4, 3, 3);
  const PlaneSpacing s = random_spacing(rng, 4, 3, 3);
  const Mpi g = composite_backward(m, s, RenderAdjoint(3, 3));
  for (double v : g.rgb) CHECK(v == 0.0);
  for (double v : g.pan) CHECK(v == 0.0);
  for (double v : g.sigma) CHECK(v == 0.0);
}

TEST_CASE("single-plane color gradient is the plane opacity") {
  Mpi m(std::vector<double>{5.0}, 1, 1);
  m.sigma = {0.7};
  m.rgb = {0.1, 0.2, 0.3};
  const PlaneSpacing s(1, 1, 1, 2.0);
  RenderAdjoint up(1, 1);
  up.rgb.data = {1.0, 0.0, 0.0};
  const Mpi g = composite_backward(m, s, up);
  CHECK(g.rgb[0] == doctest::Approx(1.0 - std::exp(-1.4)).epsilon(1e-14));
  CHECK(g.rgb[1] == 0.0);
  // d/dsigma of c (1 - e^{-sigma delta}) = c delta e^{-sigma delta}
  CHECK(g.sigma[0] == doctest::Approx(0.1 * 2.0 * std::exp(-1.4)).epsilon(1e-12));
}

TEST_CASE("compositing gradient matches central differences") {
  for_all(72, 10, [](Rng& rng, int) {
    const int n = uniform_int(rng, 1, 6);
    const PlaneSpacing s = random_spacing(rng, n, 4, 4);
    MpiParams p(std::vector<double>(n, 0.0), 4, 4);
    for (int i = 0; i < n; ++i) p.plane_heights[i] = 30.0 - 2.0 * i;
    for (std::size_t i = 0; i < p.size(); ++i) p.flat(i) = uniform(rng, -2, 2);
    const RenderAdjoint up = random_adjoint(rng, 4, 4);
    const MpiParams g = grad_composite(p, s, up);
    MpiParams probe = p;
    const double h = 1e-4;
    for (std::size_t i = 0; i < p.size(); ++i) {
      probe.flat(i) = p.flat(i) + h;
      const double hi = weighted_output(composite(to_mpi(probe), s), up);
      probe.flat(i) = p.flat(i) - h;
      const double lo = weighted_output(composite(to_mpi(probe), s), up);
      probe.flat(i) = p.flat(i);
      const double fd = (hi - lo) / (2 * h);
      const double err = std::abs(g.flat(i) - fd) / std::max({std::abs(g.flat(i)), std::abs(fd), 1e-6});
      CHECK(err < 1e-4);
    }
  });
}

TEST_CASE("scene objective gradient matches central differences") {
  const LossWeights weights{1.0, 1.0, 10.0, 0.5};
  SUBCASE("with target views") {
    for_all(73, 3, [&](Rng& rng, int) {
      const FitScene scene = small_scene(rng, 4, true, true);
      const SceneObjective obj(scene, weights, 3);
      CHECK(obj.target_mask(0).count() > 0);
      CHECK(max_gradient_error(obj, random_params(rng, obj.sampling(), 4)) < 1e-4);
    });
  }
  SUBCASE("single view") {
    for_all(74, 3, [&](Rng& rng, int) {
      const FitScene scene = small_scene(rng, 4, false, true);
      const SceneObjective obj(scene, weights, 3);
      CHECK(max_gradient_error(obj, random_params(rng, obj.sampling(), 4)) < 1e-4);
    });
  }
}

TEST_CASE("depth term is reported but only drives gradients when weighted") {
  Rng rng(75);
  const FitScene scene = small_scene(rng, 4, true, true);
  const SceneObjective off(scene, LossWeights{1, 1, 10, 0}, 3);
  const SceneObjective on(scene, LossWeights{1, 1, 10, 1}, 3);
  const MpiParams p = random_params(rng, off.sampling(), 4);
  const Evaluation a = off.evaluate(p, true), b = on.evaluate(p, true);
  CHECK(a.report.depth > 0.0);
  CHECK(a.report.depth == b.report.depth);
  CHECK(b.report.total == doctest::Approx(a.report.total + b.report.depth).epsilon(1e-12));
  CHECK(a.grad.rgb == b.grad.rgb);
  CHECK(a.grad.sigma != b.grad.sigma);
}

TEST_CASE("gradient descent fits a single pixel color") {
  const double target[3] = {0.3, 0.6, 0.85};
  MpiParams p(std::vector<double>{10.0}, 1, 1);
  p.sigma = {inverse_softplus(3.0)};
  const PlaneSpacing s(1, 1, 1, 1.0);
  const int iters = 500;
  double err = 0.0;
  for (int it = 0; it < iters; ++it) {
    const RenderOutput r = composite(to_mpi(p), s);
    RenderAdjoint up(1, 1);
    err = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = r.rgb.data[c] - target[c];
      err = std::max(err, std::abs(d));
      up.rgb.data[c] = (d > 0) - (d < 0);
    }
    const MpiParams g = grad_composite(p, s, up);
    const double lr = 0.5 * 0.1 * (1.0 + std::cos(std::numbers::pi * it / iters));
    for (std::size_t i = 0; i < p.size(); ++i) p.flat(i) -= lr * g.flat(i);
  }
  CHECK(err < 1e-3);
}

TEST_CASE("fitting is deterministic across runs and thread counts") {
  Rng rng(76);
  const FitScene scene = small_scene(rng, 8, true, false);
  FitConfig cfg;
  cfg.iterations = 15;
  cfg.n_planes = 4;
  cfg.seed = 9;
  cfg.optimizer = Optimizer::Adam;
  cfg.density_grad_blur = 1.0;
  set_thread_count(1);
  const FitTrace a = fit(scene, cfg);
  set_thread_count(3);
  const FitTrace b = fit(scene, cfg);
  set_thread_count(0);
  REQUIRE(a.history.size() == 15);
  for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].total == b.history[i].total);
  CHECK(a.mpi.sigma == b.mpi.sigma);
  CHECK(a.mpi.rgb == b.mpi.rgb);
  CHECK(trace_csv(a) == trace_csv(b));
}

TEST_CASE("fitted volumes stay within their constraints and the loss drops") {
  Rng rng(77);
  const FitScene scene = small_scene(rng, 8, true, false);
  FitConfig cfg;
  cfg.iterations = 40;
  cfg.n_planes = 4;
  cfg.learning_rate = 0.5;
  const FitTrace t = fit(scene, cfg);
  CHECK_NOTHROW(t.mpi.validate());
  CHECK(t.history.back().total < t.history.front().total);
  CHECK(t.psnr_src.size() == t.history.size());
}

TEST_CASE("a non-finite loss raises Divergence") {
  Rng rng(78);
  FitScene scene = small_scene(rng, 4, true, false);
  for (double& v : scene.targets[0].rgb.data) v = std::numeric_limits<double>::quiet_NaN();
  FitConfig cfg;
  cfg.iterations = 3;
  cfg.n_planes = 3;
  CHECK_THROWS_AS(fit(scene, cfg), Divergence);
}

TEST_CASE("initial parameters follow the source images") {
  Rng rng(79);
  const FitScene scene = small_scene(rng, 4, true, false);
  FitConfig cfg;
  cfg.n_planes = 5;
  cfg.init_noise = 0.0;
  const Mpi m = to_mpi(initial_params(scene, cfg));
  const RenderOutput r = composite(m, SceneObjective(scene, cfg.weights, 5).source_spacing());
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      double total = 0.0;
      for (int i = 0; i < 5; ++i) {
        total += r.weights[m.cell(i, x, y)];
        CHECK(r.weights[m.cell(i, x, y)] == doctest::Approx(cfg.init_opacity / 5).epsilon(1e-9));
      }
      CHECK(total == doctest::Approx(cfg.init_opacity).epsilon(1e-9));
      const double p = std::clamp(scene.pan.at(x, y), 0.02, 0.98);
      CHECK(m.pan[m.cell(0, x, y)] == doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("configuration validation and parsing") {
  FitConfig c;
  CHECK_NOTHROW(c.validate());
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), InvariantViolation);

  const FitConfig p = parse_fit_config(
      R"({"iterations": 12, "learning_rate": 0.2, "optimizer": "adam", "weights": {"reproject": 0, "depth": 2}})");
  CHECK(p.iterations == 12);
  CHECK(p.learning_rate == 0.2);
  CHECK(p.optimizer == Optimizer::Adam);
  CHECK(p.weights.reproject == 0.0);
  CHECK(p.weights.depth == 2.0);
  CHECK(p.weights.pan == 1.0);
  CHECK_THROWS_AS(parse_fit_config(R"({"iteratons": 3})"), InvariantViolation);
  CHECK_THROWS_AS(parse_fit_config(R"({"optimizer": "sgd"})"), InvariantViolation);
  CHECK_THROWS(parse_fit_config("{"));
}

TEST_CASE("trace CSV has one row per iteration") {
  FitTrace t;
  t.history.resize(2);
  t.psnr_src = {10.0, 11.0};
  const std::string csv = trace_csv(t);
  CHECK(csv.rfind("iter,pan,color,reproject,depth,total,psnr_src\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

}  // TEST_SUITE
