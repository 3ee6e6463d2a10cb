// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "rpcmpi/render.hpp"

#include <cmath>

#include "rpcmpi/error.hpp"
#include "rpcmpi/parallel.hpp"

namespace rpcmpi {

PlaneSpacing plane_spacing(const RpcModel& rpc, const std::vector<double>& heights, int height,
                           int width, const GeoRef& ref) {
  const int n = static_cast<int>(heights.size());
  if (n < 2) throw InvalidRange("plane spacing needs at least two planes");
  const LocalTangentPlane ltp(ref);
  PlaneSpacing out(n, height, width);
  parallel_for(0, height, [&](int y) {
    std::vector<Enu> pts(n);
    for (int x = 0; x < width; ++x) {
      const ImagePoint px{static_cast<double>(x), static_cast<double>(y)};
      const std::size_t index = static_cast<std::size_t>(y) * width + x;
      for (int i = 0; i < n; ++i) {
        const GeoPoint g = localize(rpc, px, heights[i], index);
        pts[i] = ltp.to_enu(g.lat, g.lon, g.hei);
      }
      for (int i = 0; i + 1 < n; ++i) {
        const double de = pts[i + 1].east - pts[i].east;
        const double dn = pts[i + 1].north - pts[i].north;
        const double du = pts[i + 1].up - pts[i].up;
        out.delta[out.cell(i, x, y)] = std::sqrt(de * de + dn * dn + du * du);
      }
      out.delta[out.cell(n - 1, x, y)] = out.delta[out.cell(n - 2, x, y)];
    }
  });
  return out;
}

PlaneSpacing plane_spacing(const RpcModel& rpc, const AltitudeSampling& sampling, int height,
                           int width, const GeoRef& ref) {
  return plane_spacing(rpc, sampling.heights, height, width, ref);
}

RenderOutput composite(const Mpi& mpi, const PlaneSpacing& spacing) {
  if (spacing.n_planes != mpi.n_planes || spacing.height != mpi.height || spacing.width != mpi.width ||
      spacing.delta.size() != mpi.cells())
    throw ShapeMismatch("composite: spacing grid does not match MPI");
  const int n = mpi.n_planes, h = mpi.height, w = mpi.width;
  RenderOutput out;
  out.rgb = Image(w, h, 3);
  out.pan = Image(w, h, 1);
  out.altitude = Image(w, h, 1);
  out.transmittance.assign(mpi.cells(), 0.0);
  out.weights.assign(mpi.cells(), 0.0);

  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double optical_depth = 0.0;
      double r = 0.0, g = 0.0, b = 0.0, p = 0.0, alt = 0.0;
      for (int i = 0; i < n; ++i) {
        const std::size_t c = mpi.cell(i, x, y);
        const double t = std::exp(-optical_depth);
        const double a = mpi.sigma[c] * spacing.delta[c];
        const double wi = t * -std::expm1(-a);
        out.transmittance[c] = t;
        out.weights[c] = wi;
        r += wi * mpi.rgb[3 * c];
        g += wi * mpi.rgb[3 * c + 1];
        b += wi * mpi.rgb[3 * c + 2];
        p += wi * mpi.pan[c];
        alt += wi * mpi.plane_heights[i];
        optical_depth += a;
      }
      out.rgb.at(x, y, 0) = r;
      out.rgb.at(x, y, 1) = g;
      out.rgb.at(x, y, 2) = b;
      out.pan.at(x, y) = p;
      out.altitude.at(x, y) = alt;
    }
  });
  return out;
}

RenderOutput render_view(const Mpi& mpi, const RpcModel& rpc, const GeoRef& ref) {
  return composite(mpi, plane_spacing(rpc, mpi.plane_heights, mpi.height, mpi.width, ref));
}

}  // namespace rpcmpi
