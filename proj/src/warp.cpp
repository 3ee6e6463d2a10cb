// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "rpcmpi/warp.hpp"

#include <cmath>

#include "rpcmpi/error.hpp"
#include "rpcmpi/parallel.hpp"

namespace rpcmpi {

namespace {

constexpr double kSnap = 1e-6;

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < kSnap ? r : v;
}

bool inside(double samp, double line, int width, int height) {
  samp = snap(samp);
  line = snap(line);
  return samp >= 0.0 && samp < width && line >= 0.0 && line < height;
}

}  // namespace

WarpField::WarpField(int n, int h, int w)
    : n_planes(n),
      height(h),
      width(w),
      samp(static_cast<std::size_t>(n) * h * w, 0.0),
      line(static_cast<std::size_t>(n) * h * w, 0.0),
      valid(static_cast<std::size_t>(n) * h * w, 0) {}

GroundGrid mpi_to_ground(const std::vector<double>& heights, int height, int width, const RpcModel& rpc) {
  GroundGrid g;
  g.n_planes = static_cast<int>(heights.size());
  g.height = height;
  g.width = width;
  const std::size_t n = static_cast<std::size_t>(g.n_planes) * height * width;
  g.lat.assign(n, rpc.norm().lat_off);
  g.lon.assign(n, rpc.norm().lon_off);
  g.hei.assign(n, 0.0);
  g.valid.assign(n, 0);
  parallel_for(0, g.n_planes * height, [&](int row) {
    const int i = row / height, y = row % height;
    for (int x = 0; x < width; ++x) {
      const std::size_t c = g.cell(i, x, y);
      g.hei[c] = heights[i];
      try {
        const GeoPoint p = localize(rpc, {static_cast<double>(x), static_cast<double>(y)}, heights[i], c);
        if (std::isfinite(p.lat) && std::isfinite(p.lon)) {
          g.lat[c] = p.lat;
          g.lon[c] = p.lon;
          g.valid[c] = 1;
        }
      } catch (const DenominatorNearZero&) {
      } catch (const NoConvergence&) {
      }
    }
  });
  return g;
}

GroundGrid mpi_to_ground(const AltitudeSampling& sampling, int height, int width, const RpcModel& rpc) {
  return mpi_to_ground(sampling.heights, height, width, rpc);
}

WarpField ground_to_view(const GroundGrid& grid, const RpcModel& rpc, int view_width, int view_height) {
  WarpField f(grid.n_planes, grid.height, grid.width);
  parallel_for(0, grid.n_planes * grid.height, [&](int row) {
    const int i = row / grid.height, y = row % grid.height;
    for (int x = 0; x < grid.width; ++x) {
      const std::size_t c = grid.cell(i, x, y);
      if (!grid.valid[c]) continue;
      try {
        const ImagePoint q = project(rpc, {grid.lat[c], grid.lon[c], grid.hei[c]}, c);
        f.samp[c] = q.samp;
        f.line[c] = q.line;
        f.valid[c] = std::isfinite(q.samp) && std::isfinite(q.line) &&
                     inside(q.samp, q.line, view_width, view_height);
      } catch (const DenominatorNearZero&) {
      }
    }
  });
  return f;
}

BilinearTaps bilinear_taps(double samp, double line, int width, int height) {
  BilinearTaps t;
  const double sx = snap(samp), sy = snap(line);
  const double fx0 = std::floor(sx), fy0 = std::floor(sy);
  const double fx = sx - fx0, fy = sy - fy0;
  const long x0 = static_cast<long>(fx0), y0 = static_cast<long>(fy0);
  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const double w = wx[dx] * wy[dy];
      if (w == 0.0) continue;
      const long x = x0 + dx, y = y0 + dy;
      if (x < 0 || y < 0 || x >= width || y >= height) continue;
      t.pixel[t.count] = static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x);
      t.weight[t.count] = w;
      ++t.count;
    }
  return t;
}

double sample_bilinear(const Image& img, double samp, double line, int c) {
  const BilinearTaps t = bilinear_taps(samp, line, img.width, img.height);
  double v = 0.0;
  for (int k = 0; k < t.count; ++k) v += t.weight[k] * img.data[t.pixel[k] * img.channels + c];
  return v;
}

Mpi resample_mpi(const Mpi& src, const WarpField& warp) {
  if (warp.n_planes != src.n_planes)
    throw ShapeMismatch("resample_mpi: warp field plane count differs from MPI");
  if (warp.samp.size() != static_cast<std::size_t>(warp.n_planes) * warp.height * warp.width)
    throw ShapeMismatch("resample_mpi: malformed warp field");
  Mpi out(src.plane_heights, warp.height, warp.width);
  const std::size_t src_plane = src.plane_size();
  parallel_for(0, warp.n_planes * warp.height, [&](int row) {
    const int i = row / warp.height, y = row % warp.height;
    const std::size_t base = static_cast<std::size_t>(i) * src_plane;
    for (int x = 0; x < warp.width; ++x) {
      const std::size_t c = warp.cell(i, x, y);
      if (!warp.valid[c]) continue;
      const BilinearTaps t = bilinear_taps(warp.samp[c], warp.line[c], src.width, src.height);
      double r = 0.0, g = 0.0, b = 0.0, p = 0.0, s = 0.0;
      for (int k = 0; k < t.count; ++k) {
        const std::size_t sc = base + t.pixel[k];
        const double w = t.weight[k];
        r += w * src.rgb[3 * sc];
        g += w * src.rgb[3 * sc + 1];
        b += w * src.rgb[3 * sc + 2];
        p += w * src.pan[sc];
        s += w * src.sigma[sc];
      }
      out.rgb[3 * c] = r;
      out.rgb[3 * c + 1] = g;
      out.rgb[3 * c + 2] = b;
      out.pan[c] = p;
      out.sigma[c] = s;
    }
  });
  return out;
}

void resample_mpi_adjoint(const WarpField& warp, const Mpi& grad_out, Mpi& grad_src) {
  if (warp.n_planes != grad_src.n_planes || grad_out.n_planes != warp.n_planes ||
      grad_out.height != warp.height || grad_out.width != warp.width)
    throw ShapeMismatch("resample_mpi_adjoint: shapes differ");
  const std::size_t src_plane = grad_src.plane_size();
  // Scatter; sequential so accumulation order is fixed.
  for (int i = 0; i < warp.n_planes; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * src_plane;
    for (int y = 0; y < warp.height; ++y)
      for (int x = 0; x < warp.width; ++x) {
        const std::size_t c = warp.cell(i, x, y);
        if (!warp.valid[c]) continue;
        const BilinearTaps t = bilinear_taps(warp.samp[c], warp.line[c], grad_src.width, grad_src.height);
        for (int k = 0; k < t.count; ++k) {
          const std::size_t sc = base + t.pixel[k];
          const double w = t.weight[k];
          grad_src.rgb[3 * sc] += w * grad_out.rgb[3 * c];
          grad_src.rgb[3 * sc + 1] += w * grad_out.rgb[3 * c + 1];
          grad_src.rgb[3 * sc + 2] += w * grad_out.rgb[3 * c + 2];
          grad_src.pan[sc] += w * grad_out.pan[c];
          grad_src.sigma[sc] += w * grad_out.sigma[c];
        }
      }
  }
}

Mask full_coverage_mask(const WarpField& warp) {
  Mask m(warp.width, warp.height, true);
  for (int i = 0; i < warp.n_planes; ++i)
    for (int y = 0; y < warp.height; ++y)
      for (int x = 0; x < warp.width; ++x)
        if (!warp.valid[warp.cell(i, x, y)]) m.set(x, y, false);
  return m;
}

WarpField src_to_tgt_field(const std::vector<double>& heights, const RpcModel& rpc_src, int src_width,
                           int src_height, const RpcModel& rpc_tgt, int tgt_width, int tgt_height) {
  const GroundGrid grid = mpi_to_ground(heights, tgt_height, tgt_width, rpc_tgt);
  return ground_to_view(grid, rpc_src, src_width, src_height);
}

WarpResult warp_src_to_tgt(const Mpi& mpi, const RpcModel& rpc_src, const RpcModel& rpc_tgt,
                           const GeoRef& ref, int tgt_width, int tgt_height) {
  WarpResult r;
  r.field = src_to_tgt_field(mpi.plane_heights, rpc_src, mpi.width, mpi.height, rpc_tgt, tgt_width,
                             tgt_height);
  r.mpi = resample_mpi(mpi, r.field);
  r.spacing = plane_spacing(rpc_tgt, mpi.plane_heights, tgt_height, tgt_width, ref);
  r.render = composite(r.mpi, r.spacing);
  r.mask = full_coverage_mask(r.field);
  return r;
}

Reprojection reproject_source(const RenderOutput& render, const RpcModel& rpc_src, const GeoRef& ref) {
  const int w = render.rgb.width, h = render.rgb.height;
  if (render.altitude.width != w || render.altitude.height != h)
    throw ShapeMismatch("reproject_source: altitude and rgb sizes differ");
  Reprojection rep;
  rep.image = Image(w, h, 3);
  rep.mask = Mask(w, h, false);
  rep.samp.assign(static_cast<std::size_t>(w) * h, 0.0);
  rep.line.assign(static_cast<std::size_t>(w) * h, 0.0);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      try {
        const GeoPoint g = localize(rpc_src, {static_cast<double>(x), static_cast<double>(y)}, ref.hei, p);
        const ImagePoint q = project(rpc_src, {g.lat, g.lon, render.altitude.at(x, y)}, p);
        rep.samp[p] = q.samp;
        rep.line[p] = q.line;
        if (!inside(q.samp, q.line, w, h)) continue;
        rep.mask.set(x, y, true);
        for (int c = 0; c < 3; ++c) rep.image.at(x, y, c) = sample_bilinear(render.rgb, q.samp, q.line, c);
      } catch (const DenominatorNearZero&) {
      } catch (const NoConvergence&) {
      }
    }
  });
  return rep;
}

void reproject_source_adjoint(const Reprojection& rep, const Image& grad_image, Image& grad_rgb) {
  const int w = grad_rgb.width, h = grad_rgb.height;
  if (!grad_image.same_shape(grad_rgb) || rep.mask.width != w || rep.mask.height != h)
    throw ShapeMismatch("reproject_source_adjoint: shapes differ");
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!rep.mask.at(x, y)) continue;
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const BilinearTaps t = bilinear_taps(rep.samp[p], rep.line[p], w, h);
      for (int k = 0; k < t.count; ++k)
        for (int c = 0; c < 3; ++c)
          grad_rgb.data[t.pixel[k] * 3 + c] += t.weight[k] * grad_image.at(x, y, c);
    }
}

}  // namespace rpcmpi
