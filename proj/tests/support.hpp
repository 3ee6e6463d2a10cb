// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// Shared generators and independent reference implementations for tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "rpcmpi/fit.hpp"
#include "rpcmpi/image.hpp"
#include "rpcmpi/mpi.hpp"
#include "rpcmpi/render.hpp"
#include "rpcmpi/synth.hpp"

namespace rpcmpi::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Runs `body(rng, case_index)` for `count` generated cases.
template <typename F>
void for_all(std::uint64_t seed, int count, F&& body) {
  Rng rng(seed);
  for (int i = 0; i < count; ++i) body(rng, i);
}

inline Mpi random_mpi(Rng& rng, int n, int h, int w, double sigma_max = 2.0) {
  std::vector<double> heights(n);
  double top = uniform(rng, 10.0, 40.0);
  for (int i = 0; i < n; ++i) {
    heights[i] = top;
    top -= uniform(rng, 0.5, 2.0);
  }
  Mpi m(heights, h, w);
  for (double& v : m.rgb) v = uniform(rng, 0.0, 1.0);
  for (double& v : m.pan) v = uniform(rng, 0.0, 1.0);
  for (double& v : m.sigma) v = uniform(rng, 0.0, sigma_max);
  return m;
}

inline PlaneSpacing random_spacing(Rng& rng, int n, int h, int w) {
  PlaneSpacing s(n, h, w);
  for (double& d : s.delta) d = uniform(rng, 0.2, 2.0);
  return s;
}

inline Image random_image(Rng& rng, int w, int h, int c, double lo = 0.0, double hi = 1.0) {
  Image img(w, h, c);
  for (double& v : img.data) v = uniform(rng, lo, hi);
  return img;
}

/// Product-form compositing: alpha_i = 1 - exp(-sigma_i delta_i),
/// T_i = prod_{j<i} (1 - alpha_j), w_i = T_i alpha_i.
struct NaivePixel {
  double rgb[3] = {0, 0, 0};
  double pan = 0;
  double altitude = 0;
  std::vector<double> t, w;
};

inline NaivePixel naive_composite_pixel(const Mpi& m, const PlaneSpacing& s, int x, int y) {
  NaivePixel out;
  double t = 1.0;
  for (int i = 0; i < m.n_planes; ++i) {
    const std::size_t c = m.cell(i, x, y);
    const double alpha = 1.0 - std::exp(-m.sigma[c] * s.delta[c]);
    const double w = t * alpha;
    out.t.push_back(t);
    out.w.push_back(w);
    for (int k = 0; k < 3; ++k) out.rgb[k] += w * m.rgb[3 * c + k];
    out.pan += w * m.pan[c];
    out.altitude += w * m.plane_heights[i];
    t *= 1.0 - alpha;
  }
  return out;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

/// Small in-memory scene on a size x size grid whose planes sit close to the
/// reference height, so target parallax stays within a pixel or two.
/// Without targets the source camera is oblique so that single-view
/// reprojection moves pixels.
inline FitScene small_scene(Rng& rng, int size, bool with_targets, bool with_altitude) {
  const SceneSpec spec = standard_scene_spec(size);
  FitScene s(make_affine_rpc(with_targets ? spec.source : spec.targets[0]), random_image(rng, size, size, 1));
  s.lr_factor = 2;
  s.rgb_hr = random_image(rng, size, size, 3);
  s.lr_rgb = random_image(rng, size / 2, size / 2, 3);
  if (with_targets)
    for (const AffineViewParams& v : spec.targets) s.targets.push_back({make_affine_rpc(v), random_image(rng, size, size, 3)});
  s.h_near = spec.geo_ref.hei + 1.5;
  s.h_far = spec.geo_ref.hei - 1.5;
  s.geo_ref = spec.geo_ref;
  if (with_altitude) s.altitude_truth = random_image(rng, size, size, 1, s.h_far, s.h_near);
  return s;
}

inline MpiParams random_params(Rng& rng, const AltitudeSampling& sampling, int size) {
  MpiParams p(sampling.heights, size, size);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : p.rgb) v = n(rng);
  for (double& v : p.pan) v = n(rng);
  for (double& v : p.sigma) v = n(rng) - 0.5;
  return p;
}

/// Largest |a - n| / max(|a|, |n|, 1e-6) over every parameter, comparing
/// analytic gradients with central differences of step `step`. Reprojection
/// coordinates are pinned to those of `params`.
inline double max_gradient_error(const SceneObjective& objective, const MpiParams& params, double step = 1e-4) {
  const Reprojection frozen = objective.reprojection(params);
  const Evaluation ev = objective.evaluate(params, true, &frozen);
  double worst = 0.0;
  MpiParams probe = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = probe.flat(i);
    probe.flat(i) = saved + step;
    const double up = objective.evaluate(probe, false, &frozen).report.total;
    probe.flat(i) = saved - step;
    const double down = objective.evaluate(probe, false, &frozen).report.total;
    probe.flat(i) = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = ev.grad.flat(i);
    const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, err);
  }
  return worst;
}

inline std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("rpcmpi_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace rpcmpi::test
