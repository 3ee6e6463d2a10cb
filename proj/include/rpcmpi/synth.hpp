// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic cameras, surfaces and a brute-force ray-casting renderer used as
// ground truth. Nothing here shares code with the MPI renderer or warper.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rpcmpi/geodesy.hpp"
#include "rpcmpi/image.hpp"
#include "rpcmpi/io.hpp"
#include "rpcmpi/rpc.hpp"

namespace rpcmpi {

/// Degree-one camera: samp_n = a1 lon_n + a2 hei_n, line_n = b1 lat_n + b2 hei_n.
/// Raising a ground point by dh moves its ray footprint by slope * dh meters
/// toward `azimuth_deg` (clockwise from north); a1 / b1 are the gains.
struct AffineViewParams {
  double slope = 0.0;
  double azimuth_deg = 90.0;
  double samp_gain = 1.0;  // a1
  double line_gain = 1.0;  // b1
  Normalization norm;
};

struct AffineCoefficients {
  double a1, a2, b1, b2;
};

/// Throws SingularView when a gain is zero.
AffineCoefficients affine_coefficients(const AffineViewParams& params);

/// Exact degree-one RPC with analytically inverted localization tensors.
RpcModel make_affine_rpc(const AffineViewParams& params);

/// Affine RPC plus small random cubic terms in the projection numerators and
/// no localization tensors, so localization goes through Newton.
RpcModel make_perturbed_rpc(const AffineViewParams& params, double magnitude, std::uint64_t seed);

enum class SurfaceKind { Flat, Ramp, GaussianHill };

struct SyntheticSurface {
  SurfaceKind kind = SurfaceKind::Flat;
  GeoRef ref;                   // local tangent plane anchor
  double h0 = 0.0;              // flat height / ramp and hill base
  double grad_east = 0.0;       // ramp, meters per meter
  double grad_north = 0.0;
  double hill_east = 0.0;       // hill center, meters from ref
  double hill_north = 0.0;
  double amplitude = 0.0;
  double width = 1.0;           // hill gaussian sigma, meters
  double h_min = 0.0;           // bounds enclosing the surface
  double h_max = 0.0;
  double checker_size = 4.0;    // meters
  std::uint64_t texture_seed = 1;

  double height(double lat, double lon) const;
  std::array<double, 3> color(double lat, double lon) const;
};

/// Throws InvariantViolation when the surface leaves [h_min, h_max] on a
/// square of half-size `extent_m` around the anchor.
void check_surface_bounds(const SyntheticSurface& s, double extent_m);

struct RaycastResult {
  Image rgb;       // W x H x 3
  Image pan;       // W x H x 1, luminance 0.299 R + 0.587 G + 0.114 B
  Image altitude;  // W x H x 1, hit height of the pixel-center ray
  Mask hit;
};

/// Marches every pixel ray down from h_max to the first surface crossing and
/// bisects to 1e-4 m; supersample^2 rays per pixel are averaged for color.
RaycastResult raycast_render(const SyntheticSurface& surface, const RpcModel& rpc, int width, int height,
                             int supersample);

/// Averages lr_factor x lr_factor blocks. Throws ShapeMismatch when the size
/// is not divisible.
Image box_downsample(const Image& img, int factor);

struct SceneSpec {
  int width = 64;
  int height = 64;
  int lr_factor = 4;
  int supersample = 4;
  AffineViewParams source;
  std::vector<AffineViewParams> targets;
  double h_near = 31.0;
  double h_far = 0.0;
  GeoRef geo_ref;
};

/// size x size (64 by default), 1 m pixels, nadir source and two targets with
/// slope 0.5 looking east and west; planes from 31 m down to 0 m.
SceneSpec standard_scene_spec(int size = 64);
SyntheticSurface standard_flat_surface(const SceneSpec& spec, std::uint64_t seed = 1);
SyntheticSurface standard_ramp_surface(const SceneSpec& spec, std::uint64_t seed = 1);
SyntheticSurface standard_hill_surface(const SceneSpec& spec, std::uint64_t seed = 1);

/// Writes HR-PAN, HR-RGB, LR-RGB, target views, RPC files, the per-pixel
/// altitude truth, a DSM truth grid and manifest.json into `out_dir`.
SceneManifest make_scene(const SyntheticSurface& surface, const SceneSpec& spec, const std::string& out_dir);

}  // namespace rpcmpi
