// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rpcmpi/error.hpp"
#include "rpcmpi/fit.hpp"
#include "rpcmpi/objective.hpp"
#include "rpcmpi/render.hpp"
#include "rpcmpi/rpc.hpp"
#include "rpcmpi/ssconv.hpp"
#include "rpcmpi/synth.hpp"
#include "rpcmpi/warp.hpp"
#include "support.hpp"

using namespace rpcmpi;
using namespace rpcmpi::test;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// RPC round trip -----------------------------------------------------------

Outcome rpc_round_trip() {
  const auto t0 = Clock::now();
  const RpcModel rpc = make_affine_rpc(standard_scene_spec().targets[0]);
  const RpcModel newton_only = rpc.without_localization();
  Rng rng(1001);
  double worst = 0.0, worst_newton = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const GeoPoint pn{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
    const ImagePoint in = project_normalized(rpc, pn);
    const GeoPoint back = localize_normalized(rpc, in, pn.hei);
    worst = std::max({worst, std::abs(back.lat - pn.lat), std::abs(back.lon - pn.lon)});
    if (i % 10 == 0) {
      const GeoPoint nw = localize_normalized(newton_only, in, pn.hei, i, LocalizeMethod::Newton);
      worst_newton = std::max({worst_newton, std::abs(nw.lat - back.lat), std::abs(nw.lon - back.lon)});
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && worst_newton <= 1e-5 && secs < 5.0,
          fmt("max round-trip %.2e, newton vs tensor %.2e, %.2f s", worst, worst_newton, secs)};
}

// Compositing --------------------------------------------------------------

Outcome composite_oracle() {
  double worst = 0.0;
  bool invariants = true;
  Rng rng(1002);
  for (int n : {1, 2, 4, 32})
    for (int k = 0; k < 5; ++k) {
      const Mpi m = random_mpi(rng, n, 8, 8, 3.0);
      const PlaneSpacing s = random_spacing(rng, n, 8, 8);
      const RenderOutput r = composite(m, s);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          const NaivePixel p = naive_composite_pixel(m, s, x, y);
          for (int c = 0; c < 3; ++c) worst = std::max(worst, rel_diff(r.rgb.at(x, y, c), p.rgb[c]));
          worst = std::max({worst, rel_diff(r.pan.at(x, y), p.pan), rel_diff(r.altitude.at(x, y), p.altitude)});
          for (int i = 0; i < n; ++i) worst = std::max(worst, rel_diff(r.weights[m.cell(i, x, y)], p.w[i]));
        }
    }
  for (int k = 0; k < 100; ++k) {
    const int n = uniform_int(rng, 1, 32);
    const Mpi m = random_mpi(rng, n, 8, 8, 5.0);
    const PlaneSpacing s = random_spacing(rng, n, 8, 8);
    const RenderOutput r = composite(m, s);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
          const std::size_t c = m.cell(i, x, y);
          sum += r.weights[c];
          if (i + 1 < n) {
            const double next = r.transmittance[c] * std::exp(-m.sigma[c] * s.delta[c]);
            if (rel_diff(r.transmittance[m.cell(i + 1, x, y)], next) > 1e-12) invariants = false;
          }
        }
        if (r.transmittance[m.cell(0, x, y)] != 1.0 || sum > 1.0 + 1e-12) invariants = false;
      }
  }
  return {worst <= 1e-12 && invariants,
          fmt("max relative deviation %.2e, invariants ", worst) + (invariants ? "hold" : "violated")};
}

// Gradients ----------------------------------------------------------------

Outcome gradient_check() {
  const auto t0 = Clock::now();
  Rng rng(1003);
  const LossWeights weights{1.0, 1.0, 10.0, 0.5};
  double worst = 0.0;
  const int instances = 20;
  for (int k = 0; k < instances; ++k) {
    const bool with_targets = k % 2 == 0;
    const FitScene scene = small_scene(rng, 4, with_targets, true);
    const SceneObjective obj(scene, weights, uniform_int(rng, 2, 4));
    worst = std::max(worst, max_gradient_error(obj, random_params(rng, obj.sampling(), 4)));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0, fmt("%.0f instances, max relative error %.2e, %.2f s", instances, worst, secs)};
}

// Warp identity ------------------------------------------------------------

Outcome warp_identity() {
  const SceneSpec spec = standard_scene_spec();
  Rng rng(1004);
  Mpi m(sample_altitudes(spec.h_near, spec.h_far, 32), 64, 64);
  for (double& v : m.rgb) v = uniform(rng, 0, 1);
  for (double& v : m.pan) v = uniform(rng, 0, 1);
  for (double& v : m.sigma) v = uniform(rng, 0, 1);
  double worst_psnr = kPsnrCap;
  bool exact = true;
  for (const AffineViewParams& view : {spec.source, spec.targets[0], spec.targets[1]}) {
    const RpcModel rpc = make_affine_rpc(view);
    const WarpResult w = warp_src_to_tgt(m, rpc, rpc, spec.geo_ref);
    exact = exact && w.mpi.rgb == m.rgb && w.mpi.pan == m.pan && w.mpi.sigma == m.sigma;
    worst_psnr = std::min(worst_psnr, psnr(w.render.rgb, render_view(m, rpc, spec.geo_ref).rgb));
  }
  return {worst_psnr > 40.0 && exact, fmt("min PSNR %.1f dB, cells ", worst_psnr) + (exact ? "exact" : "inexact")};
}

// Stereo disparity ---------------------------------------------------------

Outcome stereo_disparity() {
  const SceneSpec spec = standard_scene_spec();
  const RpcModel src = make_affine_rpc(spec.source);
  const SyntheticSurface surface = standard_ramp_surface(spec);
  const RaycastResult truth = raycast_render(surface, src, 64, 64, 1);
  double worst = 0.0;
  for (const AffineViewParams& tv : spec.targets) {
    const RpcModel tgt = make_affine_rpc(tv);
    const AffineCoefficients k = affine_coefficients(tv);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const double h = truth.altitude.at(x, y);
        const ImagePoint p = project(tgt, localize(src, {double(x), double(y)}, h));
        const double dh_n = (h - tv.norm.hei_off) / tv.norm.hei_scale;
        worst = std::max(worst, std::abs(p.samp - (x + k.a2 * dh_n * tv.norm.samp_scale)));
        worst = std::max(worst, std::abs(p.line - (y + k.b2 * dh_n * tv.norm.line_scale)));
      }
  }
  return {worst <= 1e-6, fmt("max disparity error %.2e px", worst)};
}

// Fits ---------------------------------------------------------------------

struct FitFixture {
  SceneManifest manifest;
  FitScene scene;
  RpcModel holdout_rpc;  // view never seen by the fit
  Image holdout_rgb;
};

FitFixture load_fixture(const SyntheticSurface& surface, const SceneSpec& spec, const std::string& name) {
  const SceneManifest m = make_scene(surface, spec, temp_dir(name));
  AffineViewParams holdout = spec.targets[0];
  holdout.slope = 0.35;
  holdout.azimuth_deg = 45.0;
  const RpcModel rpc = make_affine_rpc(holdout);
  Image rgb = raycast_render(surface, rpc, spec.width, spec.height, spec.supersample).rgb;
  return {m, load_scene(m), rpc, std::move(rgb)};
}

struct FitStats {
  double psnr_src = 0.0;
  double dsm_mae = 0.0;
  double dsm_me = 0.0;
  double target_psnr = 0.0;   // training target views
  double holdout_psnr = 0.0;
  double seconds = 0.0;
};

FitStats run_fit(const FitFixture& f, const FitConfig& cfg) {
  const FitTrace t = fit(f.scene, cfg);
  FitStats s;
  s.seconds = t.wall_seconds;
  s.psnr_src = psnr(t.render.rgb, *f.scene.rgb_hr);
  const Dsm pred = dsm_from_altitude(t.render, f.scene.src_rpc, *f.manifest.dsm_grid);
  const Dsm truth = read_dsm(f.manifest.resolve(f.manifest.dsm_truth));
  const Mask overlap = dsm_overlap(pred, truth);
  s.dsm_mae = mae(pred.heights, truth.heights, overlap);
  s.dsm_me = me(pred.heights, truth.heights, overlap);
  const SceneObjective obj(f.scene, cfg.weights, cfg.n_planes);
  for (std::size_t k = 0; k < f.scene.targets.size(); ++k)
    s.target_psnr += psnr_masked(obj.render_target(t.mpi, k).rgb, f.scene.targets[k].rgb, obj.target_mask(k));
  s.target_psnr /= static_cast<double>(f.scene.targets.size());
  const WarpResult held = warp_src_to_tgt(t.mpi, f.scene.src_rpc, f.holdout_rpc, f.scene.geo_ref);
  s.holdout_psnr = psnr_masked(held.render.rgb, f.holdout_rgb, held.mask);
  return s;
}

struct FitResults {
  FitStats flat, ramp, flat_no_reproject, flat_depth;
  double spacing = 0.0;
};

FitResults run_fits() {
  const SceneSpec spec = standard_scene_spec();
  const FitFixture flat = load_fixture(standard_flat_surface(spec), spec, "acceptance_flat");
  const FitFixture ramp = load_fixture(standard_ramp_surface(spec), spec, "acceptance_ramp");
  const FitConfig base = FitConfig::stereo_preset();
  FitResults r;
  r.spacing = sample_altitudes(spec.h_near, spec.h_far, base.n_planes).spacing();
  r.flat = run_fit(flat, base);
  r.ramp = run_fit(ramp, base);
  FitConfig no_reproject = base;
  no_reproject.weights.reproject = 0.0;
  r.flat_no_reproject = run_fit(flat, no_reproject);
  FitConfig depth = base;
  depth.weights.depth = 1.0;
  r.flat_depth = run_fit(flat, depth);
  return r;
}

Outcome end_to_end(const FitResults& r) {
  bool ok = true;
  std::string detail;
  for (const auto& [name, s] : {std::pair{"flat", r.flat}, std::pair{"ramp", r.ramp}}) {
    ok = ok && s.psnr_src > 30.0 && s.dsm_mae < r.spacing && std::abs(s.dsm_me) <= s.dsm_mae && s.seconds < 300.0;
    detail += std::string(name) +
              fmt(" PSNR %.2f dB, DSM MAE %.3f m, ME %.3f m, %.0f s; ", s.psnr_src, s.dsm_mae, s.dsm_me, s.seconds);
  }
  return {ok, detail + fmt("plane spacing %.3f m", r.spacing)};
}

Outcome reprojection_ablation(const FitResults& r) {
  return {r.flat.holdout_psnr > r.flat_no_reproject.holdout_psnr,
          fmt("held-out view PSNR %.2f dB with reprojection, %.2f dB without; ", r.flat.holdout_psnr,
              r.flat_no_reproject.holdout_psnr) +
              fmt("training targets %.2f / %.2f dB", r.flat.target_psnr, r.flat_no_reproject.target_psnr)};
}

Outcome depth_lever(const FitResults& r) {
  return {r.flat_depth.dsm_mae < r.flat.dsm_mae,
          fmt("DSM MAE %.3f m with depth supervision, %.3f m without", r.flat_depth.dsm_mae, r.flat.dsm_mae)};
}

// SSConv -------------------------------------------------------------------

FeatureMap ssconv_reference(const FeatureMap& f, const KernelBank& k, int r) {
  FeatureMap out(f.w * r, f.h * r, f.c);
  for (int j = 0; j < f.h; ++j)
    for (int i = 0; i < f.w; ++i)
      for (int kk = 0; kk < f.c; ++kk)
        for (int c1 = 0; c1 < r; ++c1)
          for (int c2 = 0; c2 < r; ++c2) {
            const int n = kk * r * r + c1 * r + c2;
            double acc = 0.0;
            for (int u = 0; u < 3; ++u)
              for (int v = 0; v < 3; ++v)
                for (int ch = 0; ch < f.c; ++ch) {
                  const int ii = i + u - 1, jj = j + v - 1;
                  if (ii < 0 || jj < 0 || ii >= f.w || jj >= f.h) continue;
                  acc += k.at(n, u, v, ch) * f.at(ii, jj, ch);
                }
            out.at(r * i + c1, r * j + c2, kk) = acc;
          }
  return out;
}

Outcome ssconv_exact() {
  Rng rng(1009);
  int mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    const int c = uniform_int(rng, 1, 4);
    FeatureMap f(uniform_int(rng, 1, 8), uniform_int(rng, 1, 8), c);
    for (double& v : f.values) v = uniform(rng, -1, 1);
    KernelBank k(4 * c, c);
    for (double& v : k.weights) v = uniform(rng, -1, 1);
    if (ssconv(f, k, 2).values != ssconv_reference(f, k, 2).values) ++mismatches;
  }
  const int c = 3;
  FeatureMap f(6, 5, c);
  for (double& v : f.values) v = uniform(rng, -1, 1);
  KernelBank delta(4 * c, c);
  for (int kk = 0; kk < c; ++kk)
    for (int sub = 0; sub < 4; ++sub) delta.at(kk * 4 + sub, 1, 1, kk) = 1.0;
  const FeatureMap up = ssconv(f, delta, 2);
  bool nearest = true;
  for (int y = 0; y < up.h; ++y)
    for (int x = 0; x < up.w; ++x)
      for (int kk = 0; kk < c; ++kk) nearest = nearest && up.at(x, y, kk) == f.at(x / 2, y / 2, kk);
  return {mismatches == 0 && nearest,
          fmt("%.0f of 50 random inputs differ, delta kernels ", mismatches) + (nearest ? "exact" : "inexact")};
}

// Metrics ------------------------------------------------------------------

Outcome metric_fixtures() {
  Rng rng(1010);
  const Image a = random_image(rng, 16, 16, 3);
  Image b = a;
  for (double& v : b.data) v += 0.1;
  const double p_same = psnr(a, a), s_same = ssim(a, a), p_01 = psnr(a, b);

  const Image truth(4, 4, 1, 10.0);
  const Mask all(4, 4, true);
  Image half = truth;
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x) half.at(x, y) += 2.0;
  Image quarter = truth;
  for (int x = 0; x < 4; ++x) quarter.at(x, 0) += 4.0;
  const double mae_h = mae(half, truth, all), me_h = me(half, truth, all);
  const double mae_q = mae(quarter, truth, all), me_q = me(quarter, truth, all);

  const bool ok = p_same == 99.0 && std::abs(s_same - 1.0) < 1e-12 && std::abs(p_01 - 20.0) < 1e-9 &&
                  std::abs(mae_h - 1.0) < 1e-12 && std::abs(me_h - 1.0) < 1e-12 && std::abs(mae_q - 1.0) < 1e-12 &&
                  std::abs(me_q) < 1e-12;
  return {ok, fmt("identical %.0f dB / SSIM %.4f, MSE 0.01 -> %.4f dB, ", p_same, s_same, p_01) +
                  fmt("offset MAE/ME %.2f/%.2f and %.2f/%.2f m", mae_h, me_h, mae_q, me_q)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %2d  %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "rpc round trip", rpc_round_trip);
  report(2, "compositing oracle", composite_oracle);
  report(3, "gradient check", gradient_check);
  report(4, "warp identity", warp_identity);
  report(5, "stereo disparity", stereo_disparity);

  FitResults fits;
  std::string fit_error;
  try {
    fits = run_fits();
  } catch (const std::exception& e) {
    fit_error = e.what();
  }
  auto with_fits = [&](Outcome (*check)(const FitResults&)) {
    return [&, check]() -> Outcome {
      if (!fit_error.empty()) return {false, "fit threw: " + fit_error};
      return check(fits);
    };
  };
  report(6, "end-to-end fit", with_fits(end_to_end));
  report(7, "reprojection ablation", with_fits(reprojection_ablation));
  report(8, "depth supervision", with_fits(depth_lever));

  report(9, "ssconv exactness", ssconv_exact);
  report(10, "metric fixtures", metric_fixtures);

  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
