// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rpcmpi/image.hpp"

namespace rpcmpi {

struct LossWeights {
  double pan = 1.0;        // lambda1
  double color = 1.0;      // lambda2
  double reproject = 10.0; // lambda3
  double depth = 0.0;      // depth supervision, off by default

  /// Throws InvariantViolation for negative or non-finite weights.
  void validate() const;
};

struct LossTerms {
  double pan = 0.0;
  double color = 0.0;
  double reproject = 0.0;
  double depth = 0.0;
};

struct LossReport {
  double pan = 0.0;
  double color = 0.0;
  double reproject = 0.0;
  double depth = 0.0;
  double total = 0.0;
  std::vector<double> per_scale;
};

/// Sum over scales of the mean absolute difference over valid pixels and all
/// channels. `masks` may be empty (everything valid) or hold one mask per
/// scale; an empty Mask also means "all valid".
/// Throws ShapeMismatch, or EmptyMask when a scale has no valid pixel.
double l1_multiscale(std::span<const Image> pred, std::span<const Image> truth,
                     std::span<const Mask> masks, std::vector<double>* per_scale = nullptr);

/// Single-scale masked mean L1.
double l1_masked(const Image& pred, const Image& truth, const Mask& mask);

/// d(l1_masked)/d(pred) scaled by `scale`, accumulated into `grad`.
void l1_masked_grad(const Image& pred, const Image& truth, const Mask& mask, double scale, Image& grad);

double loss_src_reproject(const Image& i_proj_src, const Image& i_src, const Mask& mask);

struct ReprojectionPair {
  const Image* projected;
  const Image* truth;
  const Mask* mask;
};
/// Mean over targets of the masked L1 between projected and truth images.
double loss_tgt_reproject(std::span<const ReprojectionPair> pairs);

/// total = lambda1 pan + lambda2 color + lambda3 reproject + lambda_depth depth.
LossReport total_loss(const LossTerms& terms, const LossWeights& weights);

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(peak^2 / MSE), capped at 99 dB when MSE < 1e-12.
double psnr(const Image& a, const Image& b, double peak = 1.0);
double psnr_masked(const Image& a, const Image& b, const Mask& mask, double peak = 1.0);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, averaged over channels. Windows are placed
/// where they fit entirely inside the image; smaller images shrink the window.
double ssim(const Image& a, const Image& b);

/// Masked mean of |a - b| (meters). Throws EmptyMask.
double mae(const Image& a, const Image& b, const Mask& mask);
/// Masked median of |a - b|; even counts take the mean of the middle pair.
double me(const Image& a, const Image& b, const Mask& mask);

}  // namespace rpcmpi
