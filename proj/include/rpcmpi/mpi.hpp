// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace rpcmpi {

/// Uniformly spaced plane altitudes, ordered top-down (camera side first).
struct AltitudeSampling {
  double h_near = 0.0;  // highest plane, meters
  double h_far = 0.0;   // lowest plane, meters
  int n_planes = 0;
  std::vector<double> heights;

  double spacing() const { return (h_near - h_far) / (n_planes - 1); }
};

/// heights[i] = h_near - i * (h_near - h_far) / (n_planes - 1).
/// Throws InvalidRange when h_near <= h_far or n_planes < 2.
AltitudeSampling sample_altitudes(double h_near, double h_far, int n_planes);

/// Relative height index i / (n_planes - 1).
double relative_height_index(int i, int n_planes);

/// [sin(2^0 pi h), cos(2^0 pi h), ..., sin(2^{L-1} pi h), cos(2^{L-1} pi h)].
std::vector<double> posenc(double h, int levels);

inline constexpr int kDefaultPlanes = 32;
inline constexpr int kDefaultEncodingLevels = 10;

/// Stack of planes, each holding rgb, pan and volume density per pixel.
/// Storage is plane-major: rgb[(plane * H + y) * W + x) * 3 + c].
struct Mpi {
  int n_planes = 0;
  int height = 0;
  int width = 0;
  std::vector<double> plane_heights;  // strictly decreasing
  std::vector<double> rgb;            // [0, 1]
  std::vector<double> pan;            // [0, 1]
  std::vector<double> sigma;          // >= 0, 1 / meter

  Mpi() = default;
  Mpi(const AltitudeSampling& sampling, int height, int width);
  /// Arbitrary strictly decreasing plane heights; allows a single plane.
  Mpi(std::vector<double> heights, int height, int width);

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t cells() const { return plane_size() * n_planes; }
  std::size_t cell(int plane, int x, int y) const {
    return (static_cast<std::size_t>(plane) * height + y) * width + x;
  }

  bool same_shape(const Mpi& o) const {
    return n_planes == o.n_planes && height == o.height && width == o.width;
  }

  /// Throws InvariantViolation when any channel leaves its range or sizes
  /// disagree.
  void validate() const;
};

/// Little-endian binary: "MPI1", u32 n_planes, u32 H, u32 W, n_planes f64
/// plane heights, then per plane rgb (H*W*3), pan (H*W), sigma (H*W) as f32.
void write_mpi(const std::string& path, const Mpi& mpi);
Mpi read_mpi(const std::string& path);

}  // namespace rpcmpi
