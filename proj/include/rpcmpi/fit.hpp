// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// Per-scene MPI fitting by gradient descent on the pan / color / reprojection
// / depth losses.
//
// Parameters are unconstrained logits: sigma = softplus(theta_sigma),
// rgb = sigmoid(theta_rgb), pan = sigmoid(theta_pan). Sampling coordinates of
// every warp are treated as constants: gradients flow through interpolated
// values only.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rpcmpi/geodesy.hpp"
#include "rpcmpi/image.hpp"
#include "rpcmpi/io.hpp"
#include "rpcmpi/mpi.hpp"
#include "rpcmpi/objective.hpp"
#include "rpcmpi/render.hpp"
#include "rpcmpi/rpc.hpp"
#include "rpcmpi/warp.hpp"

namespace rpcmpi {

/// Unconstrained MPI parameters; same layout as Mpi.
struct MpiParams {
  int n_planes = 0;
  int height = 0;
  int width = 0;
  std::vector<double> plane_heights;
  std::vector<double> rgb, pan, sigma;

  MpiParams() = default;
  MpiParams(std::vector<double> heights, int height, int width);
  std::size_t cells() const { return static_cast<std::size_t>(n_planes) * height * width; }
  std::size_t size() const { return cells() * 5; }
  /// Flat view i in [0, size()): rgb, then pan, then sigma.
  double& flat(std::size_t i);
  double flat(std::size_t i) const;
};

double softplus(double x);
double sigmoid(double x);
double inverse_softplus(double y);
double logit(double p);

Mpi to_mpi(const MpiParams& params);

/// Upstream adjoints dL/d(rendered rgb, pan, altitude).
struct RenderAdjoint {
  Image rgb;
  Image pan;
  Image altitude;

  RenderAdjoint() = default;
  RenderAdjoint(int width, int height)
      : rgb(width, height, 3), pan(width, height, 1), altitude(width, height, 1) {}
};

/// dL/d(sigma, rgb, pan) of every cell, in Mpi layout. Color and pan
/// gradients are the compositing weights times the upstream adjoint.
Mpi composite_backward(const Mpi& mpi, const PlaneSpacing& spacing, const RenderAdjoint& upstream);

/// Chains value gradients through softplus / sigmoid to the logits.
MpiParams chain_to_params(const MpiParams& params, const Mpi& value_grad);

/// dL/dtheta for every plane cell.
MpiParams grad_composite(const MpiParams& params, const PlaneSpacing& spacing, const RenderAdjoint& upstream);

struct TargetView {
  RpcModel rpc;
  Image rgb;
};

/// In-memory scene. Color supervision compares the box-downsampled rendering
/// with the LR-RGB; the HR-RGB is evaluation truth and only supervises color
/// when no LR-RGB is given.
struct FitScene {
  FitScene(RpcModel rpc, Image pan_image) : src_rpc(std::move(rpc)), pan(std::move(pan_image)) {}

  RpcModel src_rpc;
  Image pan;
  std::optional<Image> rgb_hr;
  std::optional<Image> lr_rgb;
  int lr_factor = 4;
  std::vector<TargetView> targets;
  double h_near = 0.0;
  double h_far = 0.0;
  GeoRef geo_ref;
  std::optional<Image> altitude_truth;
  std::optional<GridSpec> dsm_grid;

  int width() const { return pan.width; }
  int height() const { return pan.height; }
};

FitScene load_scene(const SceneManifest& manifest);

enum class Optimizer { GradientDescent, Adam };

struct FitConfig {
  int iterations = 1000;
  double learning_rate = 0.05;
  LossWeights weights;
  int n_planes = kDefaultPlanes;
  std::string sigma_parameterization = "softplus";
  std::uint64_t seed = 0;
  int log_every = 0;  // 0 = silent
  Optimizer optimizer = Optimizer::GradientDescent;
  bool cosine_decay = false;
  double init_opacity = 0.95;        // total, spread as equal weights over the planes
  double init_noise = 0.01;          // logit jitter
  bool init_from_source = true;      // plane colors start at the source image
  double appearance_lr_scale = 1.0;  // step multiplier for rgb / pan logits
  double density_grad_blur = 0.0;    // Gaussian sigma (pixels) applied to density gradients, 0 = off

  /// Throws InvariantViolation.
  void validate() const;

  /// Settings that recover geometry on the synthetic stereo scenes: Adam with
  /// cosine decay, slower appearance steps and smoothed density gradients.
  static FitConfig stereo_preset();
};

struct Evaluation {
  LossReport report;
  RenderOutput source;
  MpiParams grad;  // empty unless requested
};

/// Loss system for one scene with every geometric quantity precomputed.
class SceneObjective {
 public:
  SceneObjective(const FitScene& scene, const LossWeights& weights, int n_planes);

  /// Total loss and optionally dL/dtheta. `frozen` pins the single-view
  /// reprojection coordinates (used by finite-difference checks).
  Evaluation evaluate(const MpiParams& params, bool with_grad, const Reprojection* frozen = nullptr) const;

  /// Single-view reprojection coordinates for the given parameters.
  Reprojection reprojection(const MpiParams& params) const;

  const AltitudeSampling& sampling() const { return sampling_; }
  const PlaneSpacing& source_spacing() const { return src_spacing_; }
  const FitScene& scene() const { return scene_; }

  /// Target-view rendering of `mpi` and its full-coverage mask.
  RenderOutput render_target(const Mpi& mpi, std::size_t target) const;
  const Mask& target_mask(std::size_t target) const { return targets_[target].mask; }

 private:
  struct TargetGeometry {
    WarpField field;
    PlaneSpacing spacing;
    Mask mask;
  };

  const FitScene& scene_;
  LossWeights weights_;
  AltitudeSampling sampling_;
  PlaneSpacing src_spacing_;
  std::vector<TargetGeometry> targets_;
};

MpiParams initial_params(const FitScene& scene, const FitConfig& config);

struct FitTrace {
  std::vector<LossReport> history;
  std::vector<double> psnr_src;
  Mpi mpi;
  RenderOutput render;
  double wall_seconds = 0.0;
};

/// Throws Divergence when the loss stops being finite.
FitTrace fit(const FitScene& scene, const FitConfig& config);
FitTrace fit(const SceneManifest& manifest, const FitConfig& config);

/// JSON object with any FitConfig field ("optimizer": "gd" | "adam",
/// "weights": {pan, color, reproject, depth}) applied over `base`. Unknown
/// keys are rejected.
FitConfig parse_fit_config(std::string_view text, FitConfig base = {});

/// CSV with columns iter,pan,color,reproject,depth,total,psnr_src.
std::string trace_csv(const FitTrace& trace);

}  // namespace rpcmpi
