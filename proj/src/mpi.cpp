// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "rpcmpi/mpi.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "rpcmpi/error.hpp"
#include "rpcmpi/io.hpp"

namespace rpcmpi {

AltitudeSampling sample_altitudes(double h_near, double h_far, int n_planes) {
  if (!std::isfinite(h_near) || !std::isfinite(h_far) || !(h_near > h_far))
    throw InvalidRange("altitude sampling requires h_near > h_far");
  if (n_planes < 2) throw InvalidRange("altitude sampling requires at least two planes");
  AltitudeSampling s;
  s.h_near = h_near;
  s.h_far = h_far;
  s.n_planes = n_planes;
  s.heights.resize(n_planes);
  const double step = (h_near - h_far) / (n_planes - 1);
  for (int i = 0; i < n_planes; ++i) s.heights[i] = h_near - i * step;
  s.heights.back() = h_far;
  return s;
}

double relative_height_index(int i, int n_planes) {
  if (n_planes < 2) return 0.0;
  return static_cast<double>(i) / (n_planes - 1);
}

std::vector<double> posenc(double h, int levels) {
  if (levels < 1) throw InvalidRange("posenc requires at least one level");
  std::vector<double> out;
  out.reserve(2 * static_cast<std::size_t>(levels));
  double freq = std::numbers::pi;
  for (int l = 0; l < levels; ++l, freq *= 2.0) {
    out.push_back(std::sin(freq * h));
    out.push_back(std::cos(freq * h));
  }
  return out;
}

Mpi::Mpi(const AltitudeSampling& sampling, int h, int w) : Mpi(sampling.heights, h, w) {}

Mpi::Mpi(std::vector<double> heights, int h, int w)
    : n_planes(static_cast<int>(heights.size())), height(h), width(w), plane_heights(std::move(heights)) {
  if (n_planes < 1 || height < 1 || width < 1) throw InvalidRange("MPI dimensions must be positive");
  for (int i = 1; i < n_planes; ++i)
    if (!(plane_heights[i] < plane_heights[i - 1]))
      throw InvariantViolation("MPI plane heights must be strictly decreasing");
  rgb.assign(cells() * 3, 0.0);
  pan.assign(cells(), 0.0);
  sigma.assign(cells(), 0.0);
}

void Mpi::validate() const {
  if (static_cast<int>(plane_heights.size()) != n_planes || rgb.size() != cells() * 3 ||
      pan.size() != cells() || sigma.size() != cells())
    throw InvariantViolation("MPI channel sizes are inconsistent");
  for (double v : sigma)
    if (!std::isfinite(v) || v < 0.0) throw InvariantViolation("MPI sigma must be finite and >= 0");
  for (double v : rgb)
    if (!(v >= 0.0 && v <= 1.0)) throw InvariantViolation("MPI rgb must lie in [0, 1]");
  for (double v : pan)
    if (!(v >= 0.0 && v <= 1.0)) throw InvariantViolation("MPI pan must lie in [0, 1]");
}

void write_mpi(const std::string& path, const Mpi& mpi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write MPI file " + path);
  out.write("MPI1", 4);
  write_u32_le(out, static_cast<std::uint32_t>(mpi.n_planes));
  write_u32_le(out, static_cast<std::uint32_t>(mpi.height));
  write_u32_le(out, static_cast<std::uint32_t>(mpi.width));
  for (double h : mpi.plane_heights) write_f64_le(out, h);
  const std::size_t ps = mpi.plane_size();
  for (int i = 0; i < mpi.n_planes; ++i) {
    for (std::size_t k = 0; k < ps * 3; ++k) write_f32_le(out, static_cast<float>(mpi.rgb[i * ps * 3 + k]));
    for (std::size_t k = 0; k < ps; ++k) write_f32_le(out, static_cast<float>(mpi.pan[i * ps + k]));
    for (std::size_t k = 0; k < ps; ++k) write_f32_le(out, static_cast<float>(mpi.sigma[i * ps + k]));
  }
  if (!out) throw IoError("failed writing MPI file " + path);
}

Mpi read_mpi(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open MPI file " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MPI1", 4) != 0) throw ParseError(1, "bad MPI magic in " + path);
  const auto n = read_u32_le(in);
  const auto h = read_u32_le(in);
  const auto w = read_u32_le(in);
  if (n < 1 || h < 1 || w < 1 || n > 4096 || h > 65536 || w > 65536)
    throw ParseError(1, "implausible MPI dimensions in " + path);
  std::vector<double> heights(n);
  for (double& v : heights) v = read_f64_le(in);
  if (!in) throw ParseError(1, "truncated MPI file " + path);
  Mpi mpi(std::move(heights), static_cast<int>(h), static_cast<int>(w));
  const std::size_t ps = mpi.plane_size();
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < ps * 3; ++k) mpi.rgb[i * ps * 3 + k] = read_f32_le(in);
    for (std::size_t k = 0; k < ps; ++k) mpi.pan[i * ps + k] = read_f32_le(in);
    for (std::size_t k = 0; k < ps; ++k) mpi.sigma[i * ps + k] = read_f32_le(in);
  }
  if (!in) throw ParseError(1, "truncated MPI file " + path);
  return mpi;
}

}  // namespace rpcmpi
