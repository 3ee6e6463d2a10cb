// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "rpcmpi/ssconv.hpp"

#include <string>

#include "rpcmpi/error.hpp"

namespace rpcmpi {

FeatureMap::FeatureMap(int w_, int h_, int c_, double fill)
    : w(w_), h(h_), c(c_), values(static_cast<std::size_t>(w_) * h_ * c_, fill) {
  if (w_ < 1 || h_ < 1 || c_ < 1) throw InvalidRange("feature map dimensions must be positive");
}

KernelBank::KernelBank(int count_, int channels_, double fill)
    : count(count_), channels(channels_), weights(static_cast<std::size_t>(count_) * 9 * channels_, fill) {
  if (count_ < 1 || channels_ < 1) throw InvalidRange("kernel bank dimensions must be positive");
}

FeatureMap conv_bank(const FeatureMap& f, const KernelBank& k) {
  if (k.channels != f.c)
    throw ShapeMismatch("conv_bank: kernel channels " + std::to_string(k.channels) +
                        " != feature channels " + std::to_string(f.c));
  FeatureMap out(f.w, f.h, k.count);
  for (int j = 0; j < f.h; ++j)
    for (int i = 0; i < f.w; ++i)
      for (int n = 0; n < k.count; ++n) {
        double sum = 0.0;
        for (int u = 0; u < 3; ++u) {
          const int si = i + u - 1;
          if (si < 0 || si >= f.w) continue;
          for (int v = 0; v < 3; ++v) {
            const int sj = j + v - 1;
            if (sj < 0 || sj >= f.h) continue;
            for (int ch = 0; ch < f.c; ++ch) sum += k.at(n, u, v, ch) * f.at(si, sj, ch);
          }
        }
        out.at(i, j, n) = sum;
      }
  return out;
}

FeatureMap depth_to_space(const FeatureMap& f, int r) {
  if (r < 1 || f.c % (r * r) != 0)
    throw ShapeMismatch("depth_to_space: channels not divisible by r^2");
  const int c_out = f.c / (r * r);
  FeatureMap out(f.w * r, f.h * r, c_out);
  for (int j = 0; j < f.h; ++j)
    for (int i = 0; i < f.w; ++i)
      for (int k = 0; k < c_out; ++k)
        for (int c1 = 0; c1 < r; ++c1)
          for (int c2 = 0; c2 < r; ++c2) out.at(r * i + c1, r * j + c2, k) = f.at(i, j, k * r * r + c1 * r + c2);
  return out;
}

FeatureMap space_to_depth(const FeatureMap& f, int r) {
  if (r < 1 || f.w % r != 0 || f.h % r != 0)
    throw ShapeMismatch("space_to_depth: spatial size not divisible by r");
  FeatureMap out(f.w / r, f.h / r, f.c * r * r);
  for (int j = 0; j < out.h; ++j)
    for (int i = 0; i < out.w; ++i)
      for (int k = 0; k < f.c; ++k)
        for (int c1 = 0; c1 < r; ++c1)
          for (int c2 = 0; c2 < r; ++c2) out.at(i, j, k * r * r + c1 * r + c2) = f.at(r * i + c1, r * j + c2, k);
  return out;
}

FeatureMap ssconv(const FeatureMap& f, const KernelBank& k, int r) {
  if (k.count != r * r * f.c) throw ShapeMismatch("ssconv: bank must hold r^2 * c kernels");
  return depth_to_space(conv_bank(f, k), r);
}

}  // namespace rpcmpi
