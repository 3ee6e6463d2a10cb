// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "rpcmpi/objective.hpp"

#include <algorithm>
#include <cmath>

#include "rpcmpi/error.hpp"

namespace rpcmpi {

namespace {

bool mask_ok(const Mask& m, int x, int y) { return m.valid.empty() || m.at(x, y); }

void check_mask(const Image& img, const Mask& m) {
  if (!m.valid.empty() && (m.width != img.width || m.height != img.height))
    throw ShapeMismatch("mask size differs from image size");
}

void check_pair(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("image shapes differ");
}

std::vector<double> masked_abs_diffs(const Image& a, const Image& b, const Mask& mask) {
  check_pair(a, b);
  check_mask(a, mask);
  std::vector<double> d;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x)
      if (mask_ok(mask, x, y))
        for (int c = 0; c < a.channels; ++c) d.push_back(std::abs(a.at(x, y, c) - b.at(x, y, c)));
  if (d.empty()) throw EmptyMask();
  return d;
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {pan, color, reproject, depth})
    if (!std::isfinite(v) || v < 0.0) throw InvariantViolation("loss weights must be finite and >= 0");
}

double l1_masked(const Image& pred, const Image& truth, const Mask& mask) {
  check_pair(pred, truth);
  check_mask(pred, mask);
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x) {
      if (!mask_ok(mask, x, y)) continue;
      for (int c = 0; c < pred.channels; ++c) sum += std::abs(pred.at(x, y, c) - truth.at(x, y, c));
      count += pred.channels;
    }
  if (count == 0) throw EmptyMask();
  return sum / static_cast<double>(count);
}

void l1_masked_grad(const Image& pred, const Image& truth, const Mask& mask, double scale, Image& grad) {
  check_pair(pred, truth);
  check_pair(pred, grad);
  check_mask(pred, mask);
  std::size_t count = 0;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x)
      if (mask_ok(mask, x, y)) count += pred.channels;
  if (count == 0) throw EmptyMask();
  const double g = scale / static_cast<double>(count);
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x) {
      if (!mask_ok(mask, x, y)) continue;
      for (int c = 0; c < pred.channels; ++c) {
        const double r = pred.at(x, y, c) - truth.at(x, y, c);
        if (r > 0.0) grad.at(x, y, c) += g;
        else if (r < 0.0) grad.at(x, y, c) -= g;
      }
    }
}

double l1_multiscale(std::span<const Image> pred, std::span<const Image> truth,
                     std::span<const Mask> masks, std::vector<double>* per_scale) {
  if (pred.size() != truth.size() || (!masks.empty() && masks.size() != pred.size()))
    throw ShapeMismatch("l1_multiscale: scale lists differ in length");
  if (pred.empty()) throw ShapeMismatch("l1_multiscale: no scales");
  static const Mask all_valid;
  double total = 0.0;
  if (per_scale) per_scale->clear();
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const double v = l1_masked(pred[s], truth[s], masks.empty() ? all_valid : masks[s]);
    if (per_scale) per_scale->push_back(v);
    total += v;
  }
  return total;
}

double loss_src_reproject(const Image& i_proj_src, const Image& i_src, const Mask& mask) {
  return l1_masked(i_proj_src, i_src, mask);
}

double loss_tgt_reproject(std::span<const ReprojectionPair> pairs) {
  if (pairs.empty()) throw ShapeMismatch("loss_tgt_reproject: no target views");
  double sum = 0.0;
  for (const auto& p : pairs) sum += l1_masked(*p.projected, *p.truth, *p.mask);
  return sum / static_cast<double>(pairs.size());
}

LossReport total_loss(const LossTerms& terms, const LossWeights& weights) {
  weights.validate();
  LossReport r;
  r.pan = terms.pan;
  r.color = terms.color;
  r.reproject = terms.reproject;
  r.depth = terms.depth;
  r.total = weights.pan * terms.pan + weights.color * terms.color + weights.reproject * terms.reproject +
            weights.depth * terms.depth;
  return r;
}

double psnr_masked(const Image& a, const Image& b, const Mask& mask, double peak) {
  check_pair(a, b);
  check_mask(a, mask);
  double sse = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      if (!mask_ok(mask, x, y)) continue;
      for (int c = 0; c < a.channels; ++c) {
        const double d = a.at(x, y, c) - b.at(x, y, c);
        sse += d * d;
      }
      count += a.channels;
    }
  if (count == 0) throw EmptyMask();
  const double mse = sse / static_cast<double>(count);
  if (mse < 1e-12) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double psnr(const Image& a, const Image& b, double peak) { return psnr_masked(a, b, Mask{}, peak); }

double ssim(const Image& a, const Image& b) {
  check_pair(a, b);
  if (a.width < 1 || a.height < 1) throw ShapeMismatch("ssim: empty image");
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  const int radius = std::min({5, (a.width - 1) / 2, (a.height - 1) / 2});
  const int size = 2 * radius + 1;
  std::vector<double> win(static_cast<std::size_t>(size) * size);
  double wsum = 0.0;
  for (int v = 0; v < size; ++v)
    for (int u = 0; u < size; ++u) {
      const double dx = u - radius, dy = v - radius;
      const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
      win[static_cast<std::size_t>(v) * size + u] = g;
      wsum += g;
    }
  for (double& g : win) g /= wsum;

  double total = 0.0;
  std::size_t count = 0;
  for (int c = 0; c < a.channels; ++c) {
    double channel_sum = 0.0;
    std::size_t channel_count = 0;
    for (int y = radius; y + radius < a.height; ++y)
      for (int x = radius; x + radius < a.width; ++x) {
        double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
        for (int v = 0; v < size; ++v)
          for (int u = 0; u < size; ++u) {
            const double g = win[static_cast<std::size_t>(v) * size + u];
            const double va = a.at(x + u - radius, y + v - radius, c);
            const double vb = b.at(x + u - radius, y + v - radius, c);
            ma += g * va;
            mb += g * vb;
            saa += g * va * va;
            sbb += g * vb * vb;
            sab += g * va * vb;
          }
        const double var_a = saa - ma * ma;
        const double var_b = sbb - mb * mb;
        const double cov = sab - ma * mb;
        channel_sum += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
                       ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
        ++channel_count;
      }
    total += channel_sum / static_cast<double>(channel_count);
    ++count;
  }
  return total / static_cast<double>(count);
}

double mae(const Image& a, const Image& b, const Mask& mask) {
  const std::vector<double> d = masked_abs_diffs(a, b, mask);
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum / static_cast<double>(d.size());
}

double me(const Image& a, const Image& b, const Mask& mask) {
  std::vector<double> d = masked_abs_diffs(a, b, mask);
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  if (n % 2 == 1) return d[n / 2];
  return 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

}  // namespace rpcmpi
