// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// Spectral-to-spatial convolution: a bank of r^2 * c 3x3 kernels followed by
// a depth-to-space rearrangement that upsamples by r.

#pragma once

#include <cstddef>
#include <vector>

namespace rpcmpi {

/// w x h x c feature map addressed as (i, j, k) with i in [0, w), j in [0, h).
struct FeatureMap {
  int w = 0;
  int h = 0;
  int c = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int w_, int h_, int c_, double fill = 0.0);

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(j) * w + i) * c + k;
  }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
};

/// `count` kernels of 3 x 3 x channels weights. Kernel n, tap (u, v) with
/// u, v in [0, 3) along (i, j), input channel k is at(n, u, v, k); the tap
/// reads input position (i + u - 1, j + v - 1).
struct KernelBank {
  int count = 0;
  int channels = 0;
  std::vector<double> weights;

  KernelBank() = default;
  KernelBank(int count_, int channels_, double fill = 0.0);

  std::size_t index(int n, int u, int v, int k) const {
    return ((static_cast<std::size_t>(n) * 3 + u) * 3 + v) * channels + k;
  }
  double& at(int n, int u, int v, int k) { return weights[index(n, u, v, k)]; }
  double at(int n, int u, int v, int k) const { return weights[index(n, u, v, k)]; }
};

/// Output channel n is the 3x3 cross-correlation of f with kernel n; zero
/// padding, stride 1. Throws ShapeMismatch on channel disagreement.
FeatureMap conv_bank(const FeatureMap& f, const KernelBank& k);

/// out[r*i + c1, r*j + c2, k] = in[i, j, k*r^2 + c1*r + c2].
FeatureMap depth_to_space(const FeatureMap& f, int r);
/// Inverse of depth_to_space.
FeatureMap space_to_depth(const FeatureMap& f, int r);

/// depth_to_space(conv_bank(f, k), r). The bank must hold r^2 * f.c kernels.
FeatureMap ssconv(const FeatureMap& f, const KernelBank& k, int r = 2);

}  // namespace rpcmpi
