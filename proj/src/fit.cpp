// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "rpcmpi/fit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rpcmpi/error.hpp"
#include "rpcmpi/parallel.hpp"
#include "rpcmpi/synth.hpp"

namespace rpcmpi {

using nlohmann::json;

MpiParams::MpiParams(std::vector<double> heights, int h, int w)
    : n_planes(static_cast<int>(heights.size())), height(h), width(w), plane_heights(std::move(heights)) {
  rgb.assign(cells() * 3, 0.0);
  pan.assign(cells(), 0.0);
  sigma.assign(cells(), 0.0);
}

double& MpiParams::flat(std::size_t i) {
  const std::size_t n = cells();
  if (i < 3 * n) return rgb[i];
  if (i < 4 * n) return pan[i - 3 * n];
  return sigma[i - 4 * n];
}

double MpiParams::flat(std::size_t i) const { return const_cast<MpiParams&>(*this).flat(i); }

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw InvalidRange("inverse_softplus needs a positive value");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidRange("logit needs a value in (0, 1)");
  return std::log(p / (1.0 - p));
}

Mpi to_mpi(const MpiParams& params) {
  Mpi m(params.plane_heights, params.height, params.width);
  for (std::size_t i = 0; i < m.rgb.size(); ++i) m.rgb[i] = sigmoid(params.rgb[i]);
  for (std::size_t i = 0; i < m.pan.size(); ++i) m.pan[i] = sigmoid(params.pan[i]);
  for (std::size_t i = 0; i < m.sigma.size(); ++i) m.sigma[i] = softplus(params.sigma[i]);
  return m;
}

Mpi composite_backward(const Mpi& mpi, const PlaneSpacing& spacing, const RenderAdjoint& up) {
  if (spacing.n_planes != mpi.n_planes || spacing.height != mpi.height || spacing.width != mpi.width)
    throw ShapeMismatch("composite_backward: spacing grid does not match MPI");
  if (up.rgb.width != mpi.width || up.rgb.height != mpi.height || up.pan.width != mpi.width ||
      up.pan.height != mpi.height || up.altitude.width != mpi.width || up.altitude.height != mpi.height)
    throw ShapeMismatch("composite_backward: adjoint size does not match MPI");
  const int n = mpi.n_planes, h = mpi.height, w = mpi.width;
  Mpi grad(mpi.plane_heights, h, w);

  parallel_for(0, h, [&](int y) {
    std::vector<double> t(n), wi(n), e(n), v(n);
    for (int x = 0; x < w; ++x) {
      const double gr = up.rgb.at(x, y, 0), gg = up.rgb.at(x, y, 1), gb = up.rgb.at(x, y, 2);
      const double gp = up.pan.at(x, y), gh = up.altitude.at(x, y);
      double optical_depth = 0.0;
      for (int i = 0; i < n; ++i) {
        const std::size_t c = mpi.cell(i, x, y);
        const double a = mpi.sigma[c] * spacing.delta[c];
        t[i] = std::exp(-optical_depth);
        e[i] = std::exp(-a);
        wi[i] = t[i] * -std::expm1(-a);
        // Upstream-weighted value of plane i.
        v[i] = gr * mpi.rgb[3 * c] + gg * mpi.rgb[3 * c + 1] + gb * mpi.rgb[3 * c + 2] + gp * mpi.pan[c] +
               gh * mpi.plane_heights[i];
        optical_depth += a;

        grad.rgb[3 * c] = wi[i] * gr;
        grad.rgb[3 * c + 1] = wi[i] * gg;
        grad.rgb[3 * c + 2] = wi[i] * gb;
        grad.pan[c] = wi[i] * gp;
      }
      // dO/da_j = T_j e^{-a_j} v_j - sum_{i>j} w_i v_i
      double suffix = 0.0;
      for (int j = n - 1; j >= 0; --j) {
        const std::size_t c = mpi.cell(j, x, y);
        const double d_a = t[j] * e[j] * v[j] - suffix;
        grad.sigma[c] = d_a * spacing.delta[c];
        suffix += wi[j] * v[j];
      }
    }
  });
  return grad;
}

MpiParams chain_to_params(const MpiParams& params, const Mpi& g) {
  MpiParams out(params.plane_heights, params.height, params.width);
  for (std::size_t i = 0; i < out.rgb.size(); ++i) {
    const double s = sigmoid(params.rgb[i]);
    out.rgb[i] = g.rgb[i] * s * (1.0 - s);
  }
  for (std::size_t i = 0; i < out.pan.size(); ++i) {
    const double s = sigmoid(params.pan[i]);
    out.pan[i] = g.pan[i] * s * (1.0 - s);
  }
  for (std::size_t i = 0; i < out.sigma.size(); ++i) out.sigma[i] = g.sigma[i] * sigmoid(params.sigma[i]);
  return out;
}

MpiParams grad_composite(const MpiParams& params, const PlaneSpacing& spacing, const RenderAdjoint& upstream) {
  return chain_to_params(params, composite_backward(to_mpi(params), spacing, upstream));
}

FitScene load_scene(const SceneManifest& m) {
  m.validate();
  FitScene s(read_rpc_file(m.resolve(m.rpc)), read_pfm(m.resolve(m.pan)));
  if (s.pan.channels != 1) throw ShapeMismatch("HR-PAN must have one channel");
  if (s.pan.width != m.width || s.pan.height != m.height)
    throw ShapeMismatch("HR-PAN size differs from the manifest");
  if (!m.rgb.empty()) {
    s.rgb_hr = read_pfm(m.resolve(m.rgb));
    if (s.rgb_hr->width != m.width || s.rgb_hr->height != m.height || s.rgb_hr->channels != 3)
      throw ShapeMismatch("HR-RGB must be W x H x 3");
  }
  if (!m.lr_rgb.empty()) {
    s.lr_rgb = read_pfm(m.resolve(m.lr_rgb));
    if (s.lr_rgb->width * m.lr_factor != m.width || s.lr_rgb->height * m.lr_factor != m.height ||
        s.lr_rgb->channels != 3)
      throw ShapeMismatch("LR-RGB must be (W / lr_factor) x (H / lr_factor) x 3");
  }
  if (!s.rgb_hr && !s.lr_rgb) throw InvariantViolation("scene needs an HR-RGB or LR-RGB image");
  s.lr_factor = m.lr_factor;
  for (const ViewEntry& v : m.targets) {
    TargetView t{read_rpc_file(m.resolve(v.rpc)), read_pfm(m.resolve(v.rgb))};
    if (t.rgb.channels != 3) throw ShapeMismatch("target image must have three channels");
    s.targets.push_back(std::move(t));
  }
  s.h_near = m.h_near;
  s.h_far = m.h_far;
  s.geo_ref = m.geo_ref;
  if (!m.altitude_truth.empty()) {
    s.altitude_truth = read_pfm(m.resolve(m.altitude_truth));
    if (s.altitude_truth->width != m.width || s.altitude_truth->height != m.height ||
        s.altitude_truth->channels != 1)
      throw ShapeMismatch("altitude truth must be W x H x 1");
  }
  s.dsm_grid = m.dsm_grid;
  return s;
}

void FitConfig::validate() const {
  if (iterations < 1) throw InvariantViolation("iterations must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw InvariantViolation("learning rate must be positive");
  weights.validate();
  if (n_planes < 2) throw InvariantViolation("need at least two planes");
  if (sigma_parameterization != "softplus")
    throw InvariantViolation("unsupported sigma parameterization '" + sigma_parameterization + "'");
  if (!(init_opacity > 0.0 && init_opacity < 1.0)) throw InvariantViolation("initial opacity must lie in (0, 1)");
  if (!(init_noise >= 0.0)) throw InvariantViolation("initial noise must be non-negative");
  if (!(appearance_lr_scale >= 0.0)) throw InvariantViolation("appearance step scale must be non-negative");
  if (!(density_grad_blur >= 0.0)) throw InvariantViolation("density gradient blur must be non-negative");
}

FitConfig FitConfig::stereo_preset() {
  FitConfig c;
  c.iterations = 600;
  c.learning_rate = 0.05;
  c.optimizer = Optimizer::Adam;
  c.cosine_decay = true;
  c.init_opacity = 0.95;
  c.appearance_lr_scale = 0.3;
  c.density_grad_blur = 6.0;
  return c;
}

namespace {

Image upsample_adjoint(const Image& g_lr, int factor) {
  Image out(g_lr.width * factor, g_lr.height * factor, g_lr.channels);
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < out.channels; ++c) out.at(x, y, c) = g_lr.at(x / factor, y / factor, c) * inv;
  return out;
}

Image sample_at(const Reprojection& coords, const Image& rgb) {
  Image out(rgb.width, rgb.height, 3);
  for (int y = 0; y < rgb.height; ++y)
    for (int x = 0; x < rgb.width; ++x) {
      if (!coords.mask.at(x, y)) continue;
      const std::size_t p = static_cast<std::size_t>(y) * rgb.width + x;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = sample_bilinear(rgb, coords.samp[p], coords.line[p], c);
    }
  return out;
}

void add_into(Mpi& acc, const Mpi& g) {
  for (std::size_t i = 0; i < acc.rgb.size(); ++i) acc.rgb[i] += g.rgb[i];
  for (std::size_t i = 0; i < acc.pan.size(); ++i) acc.pan[i] += g.pan[i];
  for (std::size_t i = 0; i < acc.sigma.size(); ++i) acc.sigma[i] += g.sigma[i];
}

}  // namespace

SceneObjective::SceneObjective(const FitScene& scene, const LossWeights& weights, int n_planes)
    : scene_(scene), weights_(weights), sampling_(sample_altitudes(scene.h_near, scene.h_far, n_planes)) {
  weights_.validate();
  const int w = scene.width(), h = scene.height();
  src_spacing_ = plane_spacing(scene.src_rpc, sampling_, h, w, scene.geo_ref);
  for (const TargetView& t : scene.targets) {
    TargetGeometry g;
    g.field = src_to_tgt_field(sampling_.heights, scene.src_rpc, w, h, t.rpc, t.rgb.width, t.rgb.height);
    g.spacing = plane_spacing(t.rpc, sampling_, t.rgb.height, t.rgb.width, scene.geo_ref);
    g.mask = full_coverage_mask(g.field);
    targets_.push_back(std::move(g));
  }
}

RenderOutput SceneObjective::render_target(const Mpi& mpi, std::size_t target) const {
  return composite(resample_mpi(mpi, targets_.at(target).field), targets_.at(target).spacing);
}

Reprojection SceneObjective::reprojection(const MpiParams& params) const {
  return reproject_source(composite(to_mpi(params), src_spacing_), scene_.src_rpc, scene_.geo_ref);
}

Evaluation SceneObjective::evaluate(const MpiParams& params, bool with_grad, const Reprojection* frozen) const {
  const int w = scene_.width(), h = scene_.height();
  if (params.width != w || params.height != h || params.n_planes != sampling_.n_planes)
    throw ShapeMismatch("parameters do not match the scene grid");
  const Mpi mpi = to_mpi(params);
  Evaluation ev;
  ev.source = composite(mpi, src_spacing_);
  const RenderOutput& src = ev.source;
  const Mask all;
  RenderAdjoint adj(w, h);
  LossTerms terms;

  terms.pan = l1_masked(src.pan, scene_.pan, all);
  if (with_grad) l1_masked_grad(src.pan, scene_.pan, all, weights_.pan, adj.pan);

  if (scene_.lr_rgb) {
    const Image down = box_downsample(src.rgb, scene_.lr_factor);
    terms.color = l1_masked(down, *scene_.lr_rgb, all);
    if (with_grad) {
      Image g(down.width, down.height, 3);
      l1_masked_grad(down, *scene_.lr_rgb, all, weights_.color, g);
      const Image up = upsample_adjoint(g, scene_.lr_factor);
      for (std::size_t i = 0; i < up.data.size(); ++i) adj.rgb.data[i] += up.data[i];
    }
  } else {
    terms.color = l1_masked(src.rgb, *scene_.rgb_hr, all);
    if (with_grad) l1_masked_grad(src.rgb, *scene_.rgb_hr, all, weights_.color, adj.rgb);
  }

  Mpi value_grad;
  if (with_grad) value_grad = Mpi(mpi.plane_heights, h, w);

  if (!targets_.empty()) {
    const double per_target = 1.0 / static_cast<double>(targets_.size());
    for (std::size_t k = 0; k < targets_.size(); ++k) {
      const TargetGeometry& g = targets_[k];
      const Image& truth = scene_.targets[k].rgb;
      const Mpi warped = resample_mpi(mpi, g.field);
      const RenderOutput r = composite(warped, g.spacing);
      terms.reproject += per_target * l1_masked(r.rgb, truth, g.mask);
      if (with_grad && weights_.reproject > 0.0) {
        RenderAdjoint ta(truth.width, truth.height);
        l1_masked_grad(r.rgb, truth, g.mask, weights_.reproject * per_target, ta.rgb);
        resample_mpi_adjoint(g.field, composite_backward(warped, g.spacing, ta), value_grad);
      }
    }
  } else {
    // Self-consistency: the rendering sampled at the reprojected coordinates
    // must agree with the rendering itself.
    Reprojection rep;
    const Reprojection* coords = frozen;
    if (!coords) {
      rep = reproject_source(src, scene_.src_rpc, scene_.geo_ref);
      coords = &rep;
    }
    const Image projected = frozen ? sample_at(*frozen, src.rgb) : rep.image;
    terms.reproject = l1_masked(projected, src.rgb, coords->mask);
    if (with_grad && weights_.reproject > 0.0) {
      Image g(w, h, 3);
      l1_masked_grad(projected, src.rgb, coords->mask, weights_.reproject, g);
      reproject_source_adjoint(*coords, g, adj.rgb);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (coords->mask.at(x, y))
            for (int c = 0; c < 3; ++c) adj.rgb.at(x, y, c) -= g.at(x, y, c);
    }
  }

  if (scene_.altitude_truth) {
    terms.depth = l1_masked(src.altitude, *scene_.altitude_truth, all);
    if (with_grad && weights_.depth > 0.0)
      l1_masked_grad(src.altitude, *scene_.altitude_truth, all, weights_.depth, adj.altitude);
  }

  ev.report = total_loss(terms, weights_);
  if (with_grad) {
    add_into(value_grad, composite_backward(mpi, src_spacing_, adj));
    ev.grad = chain_to_params(params, value_grad);
  }
  return ev;
}

MpiParams initial_params(const FitScene& scene, const FitConfig& config) {
  const AltitudeSampling sampling = sample_altitudes(scene.h_near, scene.h_far, config.n_planes);
  const int w = scene.width(), h = scene.height();
  MpiParams p(sampling.heights, h, w);
  // Plane i takes alpha_i = (c / N) / (1 - c i / N), giving every plane the
  // compositing weight c / N along a ray.
  std::vector<double> theta_sigma(p.n_planes);
  for (int i = 0; i < p.n_planes; ++i) {
    const double share = config.init_opacity / p.n_planes;
    const double alpha = share / (1.0 - share * i);
    theta_sigma[i] = inverse_softplus(-std::log1p(-alpha) / sampling.spacing());
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto jitter = [&] { return config.init_noise > 0.0 ? config.init_noise * noise(rng) : 0.0; };
  const auto clamped_logit = [](double v) { return logit(std::clamp(v, 0.02, 0.98)); };

  // Every plane starts with the source colors: the source view is matched
  // from the start and only correctly placed density also matches the
  // targets.
  const auto source_rgb = [&](int x, int y, int c) {
    if (!config.init_from_source) return 0.0;
    if (scene.lr_rgb) return clamped_logit(scene.lr_rgb->at(x / scene.lr_factor, y / scene.lr_factor, c));
    return clamped_logit(scene.rgb_hr->at(x, y, c));
  };
  for (int i = 0; i < p.n_planes; ++i)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t c = (static_cast<std::size_t>(i) * h + y) * w + x;
        for (int k = 0; k < 3; ++k) p.rgb[3 * c + k] = source_rgb(x, y, k) + jitter();
        p.pan[c] = (config.init_from_source ? clamped_logit(scene.pan.at(x, y)) : 0.0) + jitter();
        p.sigma[c] = theta_sigma[i] + jitter();
      }
  return p;
}

namespace {

double source_psnr(const FitScene& scene, const RenderOutput& render) {
  if (scene.rgb_hr) return psnr(render.rgb, *scene.rgb_hr);
  return psnr(box_downsample(render.rgb, scene.lr_factor), *scene.lr_rgb);
}

bool finite_report(const LossReport& r) {
  return std::isfinite(r.total) && std::isfinite(r.pan) && std::isfinite(r.color) &&
         std::isfinite(r.reproject) && std::isfinite(r.depth);
}

// Separable Gaussian blur of every plane of a plane-major N x H x W field.
void blur_planes(std::vector<double>& field, int n, int h, int w, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
  std::vector<double> tmp(static_cast<std::size_t>(h) * w);
  for (int i = 0; i < n; ++i) {
    double* plane = field.data() + static_cast<std::size_t>(i) * h * w;
    // Renormalized at the borders so constant fields stay constant.
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0, norm = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int xx = x + k;
          if (xx < 0 || xx >= w) continue;
          acc += kernel[k + radius] * plane[y * w + xx];
          norm += kernel[k + radius];
        }
        tmp[static_cast<std::size_t>(y) * w + x] = acc / norm;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0, norm = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int yy = y + k;
          if (yy < 0 || yy >= h) continue;
          acc += kernel[k + radius] * tmp[static_cast<std::size_t>(yy) * w + x];
          norm += kernel[k + radius];
        }
        plane[static_cast<std::size_t>(y) * w + x] = acc / norm;
      }
  }
}

}  // namespace

FitTrace fit(const FitScene& scene, const FitConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const SceneObjective objective(scene, config.weights, config.n_planes);
  MpiParams params = initial_params(scene, config);
  const std::size_t n = params.size();
  const std::size_t appearance = params.cells() * 4;  // rgb and pan come first

  // Adam moments.
  std::vector<double> m1, m2;
  if (config.optimizer == Optimizer::Adam) {
    m1.assign(n, 0.0);
    m2.assign(n, 0.0);
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  FitTrace trace;
  for (int it = 0; it < config.iterations; ++it) {
    Evaluation ev = objective.evaluate(params, true);
    if (!finite_report(ev.report))
      throw Divergence("loss became non-finite at iteration " + std::to_string(it));
    trace.history.push_back(ev.report);
    trace.psnr_src.push_back(source_psnr(scene, ev.source));
    if (config.log_every > 0 && it % config.log_every == 0)
      std::fprintf(stderr, "iter %d total %.6f psnr %.2f\n", it, ev.report.total, trace.psnr_src.back());

    if (config.density_grad_blur > 0.0)
      blur_planes(ev.grad.sigma, params.n_planes, params.height, params.width, config.density_grad_blur);

    double lr = config.learning_rate;
    if (config.cosine_decay)
      lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * it / static_cast<double>(config.iterations)));
    if (config.optimizer == Optimizer::Adam) {
      const double c1 = 1.0 - std::pow(kBeta1, it + 1), c2 = 1.0 - std::pow(kBeta2, it + 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double g = ev.grad.flat(i);
        const double step = i < appearance ? lr * config.appearance_lr_scale : lr;
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * g;
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * g * g;
        params.flat(i) -= step * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + kEps);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i)
        params.flat(i) -= (i < appearance ? lr * config.appearance_lr_scale : lr) * ev.grad.flat(i);
    }
  }

  const Evaluation last = objective.evaluate(params, false);
  if (!finite_report(last.report)) throw Divergence("loss became non-finite after the final step");
  trace.mpi = to_mpi(params);
  trace.render = last.source;
  trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

FitTrace fit(const SceneManifest& manifest, const FitConfig& config) {
  const FitScene scene = load_scene(manifest);
  return fit(scene, config);
}

FitConfig parse_fit_config(std::string_view text, FitConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("fit config: ") + e.what());
  }
  if (!j.is_object()) throw InvariantViolation("fit config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "iterations") base.iterations = v.get<int>();
      else if (key == "learning_rate") base.learning_rate = v.get<double>();
      else if (key == "n_planes") base.n_planes = v.get<int>();
      else if (key == "sigma_parameterization") base.sigma_parameterization = v.get<std::string>();
      else if (key == "seed") base.seed = v.get<std::uint64_t>();
      else if (key == "log_every") base.log_every = v.get<int>();
      else if (key == "cosine_decay") base.cosine_decay = v.get<bool>();
      else if (key == "init_opacity") base.init_opacity = v.get<double>();
      else if (key == "init_noise") base.init_noise = v.get<double>();
      else if (key == "init_from_source") base.init_from_source = v.get<bool>();
      else if (key == "appearance_lr_scale") base.appearance_lr_scale = v.get<double>();
      else if (key == "density_grad_blur") base.density_grad_blur = v.get<double>();
      else if (key == "optimizer") {
        const auto name = v.get<std::string>();
        if (name == "gd") base.optimizer = Optimizer::GradientDescent;
        else if (name == "adam") base.optimizer = Optimizer::Adam;
        else throw InvariantViolation("unknown optimizer '" + name + "'");
      } else if (key == "weights") {
        if (!v.is_object()) throw InvariantViolation("fit config: weights must be an object");
        for (const auto& [wk, wv] : v.items()) {
          if (wk == "pan") base.weights.pan = wv.get<double>();
          else if (wk == "color") base.weights.color = wv.get<double>();
          else if (wk == "reproject") base.weights.reproject = wv.get<double>();
          else if (wk == "depth") base.weights.depth = wv.get<double>();
          else throw InvariantViolation("fit config: unknown weight '" + wk + "'");
        }
      } else {
        throw InvariantViolation("fit config: unknown key '" + key + "'");
      }
    }
  } catch (const json::type_error& e) {
    throw InvariantViolation(std::string("fit config: ") + e.what());
  }
  base.validate();
  return base;
}

std::string trace_csv(const FitTrace& trace) {
  std::ostringstream os;
  os << "iter,pan,color,reproject,depth,total,psnr_src\n";
  char buf[256];
  for (std::size_t i = 0; i < trace.history.size(); ++i) {
    const LossReport& r = trace.history[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, r.pan, r.color,
                  r.reproject, r.depth, r.total, trace.psnr_src[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace rpcmpi
