// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rpcmpi {

/// Interleaved H x W x C image of doubles, row-major. Pixel (x, y) has its
/// center at image coordinate (samp, line) = (x, y).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// Per-pixel validity, 1 = valid. An empty mask means "all valid".
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> valid;

  Mask() = default;
  Mask(int w, int h, bool fill = true)
      : width(w), height(h), valid(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

  bool at(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { valid[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
  }
};

}  // namespace rpcmpi
