// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// Planar volume rendering of an MPI.
//
// For pixel (x, y) with per-plane optical depth a_i = sigma_i * delta_i:
//   T_1 = 1,  T_i = exp(-sum_{j<i} a_j),  w_i = T_i * (1 - exp(-a_i))
//   rgb = sum w_i c_i,  pan = sum w_i p_i,  altitude = sum w_i h_i
// Residual transmittance contributes nothing (no background term).

#pragma once

#include <cstddef>
#include <vector>

#include "rpcmpi/geodesy.hpp"
#include "rpcmpi/image.hpp"
#include "rpcmpi/mpi.hpp"
#include "rpcmpi/rpc.hpp"

namespace rpcmpi {

/// Metric distance between consecutive planes along each pixel ray,
/// plane-major N x H x W. The last plane reuses the previous spacing.
struct PlaneSpacing {
  int n_planes = 0;
  int height = 0;
  int width = 0;
  std::vector<double> delta;

  PlaneSpacing() = default;
  PlaneSpacing(int n, int h, int w, double fill = 0.0)
      : n_planes(n), height(h), width(w), delta(static_cast<std::size_t>(n) * h * w, fill) {}

  std::size_t cell(int plane, int x, int y) const {
    return (static_cast<std::size_t>(plane) * height + y) * width + x;
  }
};

struct RenderOutput {
  Image rgb;       // H x W x 3
  Image pan;       // H x W x 1
  Image altitude;  // H x W x 1, meters
  std::vector<double> transmittance;  // N x H x W
  std::vector<double> weights;        // N x H x W
};

/// Localizes every pixel at consecutive plane heights and measures the
/// distance between the two points in the local tangent plane at `ref`.
PlaneSpacing plane_spacing(const RpcModel& rpc, const std::vector<double>& heights, int height,
                           int width, const GeoRef& ref);
PlaneSpacing plane_spacing(const RpcModel& rpc, const AltitudeSampling& sampling, int height,
                           int width, const GeoRef& ref);

/// Throws ShapeMismatch when the spacing grid differs from the MPI grid.
RenderOutput composite(const Mpi& mpi, const PlaneSpacing& spacing);

/// composite(mpi, plane_spacing(rpc, mpi heights, ...)).
RenderOutput render_view(const Mpi& mpi, const RpcModel& rpc, const GeoRef& ref);

}  // namespace rpcmpi
