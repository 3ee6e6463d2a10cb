// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// Cross-view MPI warping through geodetic object space.
//
// Warping is a gather: every cell of the output grid knows where to sample in
// the input raster. warp_src_to_tgt therefore localizes the target frustum
// (target pixels at each plane height), projects those ground points into the
// source view and samples the source MPI bilinearly there.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rpcmpi/geodesy.hpp"
#include "rpcmpi/image.hpp"
#include "rpcmpi/mpi.hpp"
#include "rpcmpi/render.hpp"
#include "rpcmpi/rpc.hpp"

namespace rpcmpi {

/// One geodetic point per MPI cell, plane-major N x H x W.
struct GroundGrid {
  int n_planes = 0;
  int height = 0;
  int width = 0;
  std::vector<double> lat, lon, hei;
  std::vector<std::uint8_t> valid;

  std::size_t cell(int plane, int x, int y) const {
    return (static_cast<std::size_t>(plane) * height + y) * width + x;
  }
};

/// Sampling coordinates (pixels of the sampled raster) per output cell.
struct WarpField {
  int n_planes = 0;
  int height = 0;
  int width = 0;
  std::vector<double> samp, line;
  std::vector<std::uint8_t> valid;

  WarpField() = default;
  WarpField(int n, int h, int w);
  std::size_t cell(int plane, int x, int y) const {
    return (static_cast<std::size_t>(plane) * height + y) * width + x;
  }
};

/// Localizes pixel (x, y) of a height x width raster at every plane height.
/// Localization failures mark the cell invalid instead of throwing.
GroundGrid mpi_to_ground(const std::vector<double>& heights, int height, int width, const RpcModel& rpc);
GroundGrid mpi_to_ground(const AltitudeSampling& sampling, int height, int width, const RpcModel& rpc);

/// Projects the grid with `rpc`; cells outside [0, W) x [0, H) of a
/// view_width x view_height raster or failing projection are invalid.
WarpField ground_to_view(const GroundGrid& grid, const RpcModel& rpc, int view_width, int view_height);

/// Bilinear footprint of a sampling location in a width x height raster.
/// Taps outside the raster are dropped (zero padding). Fractions within
/// 1e-6 px of an integer snap to it so integer coordinates sample exactly.
struct BilinearTaps {
  std::array<std::size_t, 4> pixel{};
  std::array<double, 4> weight{};
  int count = 0;
};
BilinearTaps bilinear_taps(double samp, double line, int width, int height);

/// Bilinear sample of channel `c` with zero padding.
double sample_bilinear(const Image& img, double samp, double line, int c);

/// Per plane, bilinear interpolation of rgb / pan / sigma at the warp
/// coordinates; invalid cells come out as zeros (transparent).
Mpi resample_mpi(const Mpi& src, const WarpField& warp);

/// Adjoint of resample_mpi: accumulates d(out) into d(src). Both gradient
/// MPIs use the value layout of Mpi.
void resample_mpi_adjoint(const WarpField& warp, const Mpi& grad_out, Mpi& grad_src);

/// Pixel is valid when every plane of the field is valid.
Mask full_coverage_mask(const WarpField& warp);

struct WarpResult {
  Mpi mpi;  // source MPI resampled into the target frustum
  RenderOutput render;
  WarpField field;
  PlaneSpacing spacing;
  Mask mask;
};

/// Warp field that resamples a source MPI into the target frustum.
WarpField src_to_tgt_field(const std::vector<double>& heights, const RpcModel& rpc_src, int src_width,
                           int src_height, const RpcModel& rpc_tgt, int tgt_width, int tgt_height);

WarpResult warp_src_to_tgt(const Mpi& mpi, const RpcModel& rpc_src, const RpcModel& rpc_tgt,
                           const GeoRef& ref, int tgt_width, int tgt_height);
inline WarpResult warp_src_to_tgt(const Mpi& mpi, const RpcModel& rpc_src, const RpcModel& rpc_tgt,
                                  const GeoRef& ref) {
  return warp_src_to_tgt(mpi, rpc_src, rpc_tgt, ref, mpi.width, mpi.height);
}

/// Where each source pixel lands when its footprint at the reference height
/// `ref.hei` is lifted to the rendered altitude and projected back.
struct Reprojection {
  Image image;  // H x W x 3
  Mask mask;
  std::vector<double> samp, line;  // per pixel sampling coordinates
};

/// Source-view reprojection from the rendered altitude map. For pixel (x, y)
/// the ground point localize(x, y, ref.hei) is lifted to altitude(x, y),
/// projected into the source view and the rendered RGB is sampled there.
/// Out-of-bounds or failed samples are zero and masked.
Reprojection reproject_source(const RenderOutput& render, const RpcModel& rpc_src, const GeoRef& ref);

/// Adjoint of the sampling step of reproject_source with fixed coordinates.
void reproject_source_adjoint(const Reprojection& rep, const Image& grad_image, Image& grad_rgb);

}  // namespace rpcmpi
