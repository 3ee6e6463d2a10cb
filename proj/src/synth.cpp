// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "rpcmpi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "rpcmpi/error.hpp"

namespace rpcmpi {

namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_from_hash(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace

AffineCoefficients affine_coefficients(const AffineViewParams& p) {
  if (p.samp_gain == 0.0 || p.line_gain == 0.0) throw SingularView("affine view gains must be non-zero");
  if (!(p.norm.lat_scale > 0 && p.norm.lon_scale > 0 && p.norm.hei_scale > 0))
    throw InvariantViolation("affine view scales must be positive");
  const MetersPerDegree m = meters_per_degree(p.norm.lat_off);
  const double az = p.azimuth_deg * std::numbers::pi / 180.0;
  // Footprint displacement per normalized height unit, in normalized lat/lon.
  const double dlon_n = p.slope * std::sin(az) * p.norm.hei_scale / (m.lon * p.norm.lon_scale);
  const double dlat_n = p.slope * std::cos(az) * p.norm.hei_scale / (m.lat * p.norm.lat_scale);
  return {p.samp_gain, -p.samp_gain * dlon_n, p.line_gain, -p.line_gain * dlat_n};
}

RpcModel make_affine_rpc(const AffineViewParams& params) {
  const AffineCoefficients k = affine_coefficients(params);
  ProjectionTensors proj;
  proj.samp_num[tensor_index(0, 0, 1)] = k.a1;
  proj.samp_num[tensor_index(1, 0, 0)] = k.a2;
  proj.line_num[tensor_index(0, 1, 0)] = k.b1;
  proj.line_num[tensor_index(1, 0, 0)] = k.b2;
  proj.samp_den[0] = 1.0;
  proj.line_den[0] = 1.0;

  // lon_n = (samp_n - a2 hei_n) / a1, lat_n = (line_n - b2 hei_n) / b1;
  // inverse slots are (hei, samp, line).
  LocalizationTensors loc;
  loc.lon_num[tensor_index(0, 1, 0)] = 1.0 / k.a1;
  loc.lon_num[tensor_index(1, 0, 0)] = -k.a2 / k.a1;
  loc.lat_num[tensor_index(0, 0, 1)] = 1.0 / k.b1;
  loc.lat_num[tensor_index(1, 0, 0)] = -k.b2 / k.b1;
  loc.lat_den[0] = 1.0;
  loc.lon_den[0] = 1.0;
  return RpcModel(params.norm, proj, loc);
}

RpcModel make_perturbed_rpc(const AffineViewParams& params, double magnitude, std::uint64_t seed) {
  const RpcModel base = make_affine_rpc(params);
  ProjectionTensors proj = base.projection();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-magnitude, magnitude);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j)
      for (int k = 0; i + j + k < 4; ++k) {
        if (i + j + k < 2) continue;
        proj.samp_num[tensor_index(i, j, k)] += u(rng);
        proj.line_num[tensor_index(i, j, k)] += u(rng);
      }
  return RpcModel(params.norm, proj, std::nullopt);
}

double SyntheticSurface::height(double lat, double lon) const {
  const Enu e = LocalTangentPlane(ref).to_enu(lat, lon, 0.0);
  switch (kind) {
    case SurfaceKind::Flat:
      return h0;
    case SurfaceKind::Ramp:
      return h0 + grad_east * e.east + grad_north * e.north;
    case SurfaceKind::GaussianHill: {
      const double dx = e.east - hill_east, dy = e.north - hill_north;
      return h0 + amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    }
  }
  return h0;
}

std::array<double, 3> SyntheticSurface::color(double lat, double lon) const {
  const Enu e = LocalTangentPlane(ref).to_enu(lat, lon, 0.0);
  const auto cx = static_cast<std::int64_t>(std::floor(e.east / checker_size));
  const auto cy = static_cast<std::int64_t>(std::floor(e.north / checker_size));
  std::uint64_t h = splitmix64(texture_seed ^ splitmix64(static_cast<std::uint64_t>(cx) * 0x9E3779B1ULL +
                                                         static_cast<std::uint64_t>(cy)));
  const double shade = 0.85 + 0.15 * std::sin(1.7 * e.east + 0.3) * std::cos(1.3 * e.north);
  std::array<double, 3> c{};
  for (double& v : c) {
    h = splitmix64(h);
    v = (0.15 + 0.7 * unit_from_hash(h)) * shade;
  }
  return c;
}

void check_surface_bounds(const SyntheticSurface& s, double extent_m) {
  if (!(s.h_max > s.h_min)) throw InvariantViolation("surface bounds must satisfy h_max > h_min");
  const LocalTangentPlane ltp(s.ref);
  constexpr int kSteps = 64;
  for (int iy = 0; iy <= kSteps; ++iy)
    for (int ix = 0; ix <= kSteps; ++ix) {
      const double east = -extent_m + 2.0 * extent_m * ix / kSteps;
      const double north = -extent_m + 2.0 * extent_m * iy / kSteps;
      const double h = s.height(ltp.lat_of(north), ltp.lon_of(east));
      if (h < s.h_min || h > s.h_max) throw InvariantViolation("surface leaves its height bounds");
    }
}

namespace {

constexpr double kMarchStep = 0.25;      // meters
constexpr double kHitTolerance = 1e-5;   // bisection bracket width, meters

struct Hit {
  bool ok = false;
  double lat = 0.0, lon = 0.0, hei = 0.0;
};

// Height above surface along the ray of image point q at altitude h.
double clearance(const SyntheticSurface& s, const RpcModel& rpc, const ImagePoint& q, double h, GeoPoint& g) {
  g = localize(rpc, q, h);
  return h - s.height(g.lat, g.lon);
}

Hit cast_ray(const SyntheticSurface& s, const RpcModel& rpc, const ImagePoint& q) {
  Hit hit;
  GeoPoint g;
  double hi = s.h_max;
  double f_hi = clearance(s, rpc, q, hi, g);
  if (f_hi <= 0.0) {
    hit = {true, g.lat, g.lon, hi};
    return hit;
  }
  for (double lo = hi - kMarchStep;; lo -= kMarchStep) {
    if (lo < s.h_min) lo = s.h_min;
    const double f_lo = clearance(s, rpc, q, lo, g);
    if (f_lo <= 0.0) {
      double a = lo, b = hi;  // f(a) <= 0 < f(b)
      while (b - a > kHitTolerance) {
        const double mid = 0.5 * (a + b);
        if (clearance(s, rpc, q, mid, g) <= 0.0) a = mid;
        else b = mid;
      }
      const double h = 0.5 * (a + b);
      clearance(s, rpc, q, h, g);
      hit = {true, g.lat, g.lon, h};
      return hit;
    }
    if (lo <= s.h_min) return hit;
    hi = lo;
    f_hi = f_lo;
  }
}

}  // namespace

RaycastResult raycast_render(const SyntheticSurface& surface, const RpcModel& rpc, int width, int height,
                             int supersample) {
  if (width < 1 || height < 1 || supersample < 1) throw InvalidRange("raycast_render: bad raster size");
  RaycastResult r;
  r.rgb = Image(width, height, 3);
  r.pan = Image(width, height, 1);
  r.altitude = Image(width, height, 1);
  r.hit = Mask(width, height, false);
  const double inv = 1.0 / supersample;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Hit center = cast_ray(surface, rpc, {static_cast<double>(x), static_cast<double>(y)});
      if (!center.ok) continue;
      r.altitude.at(x, y) = center.hei;
      std::array<double, 3> acc{};
      int n = 0;
      for (int sy = 0; sy < supersample; ++sy)
        for (int sx = 0; sx < supersample; ++sx) {
          const ImagePoint q{x - 0.5 + (sx + 0.5) * inv, y - 0.5 + (sy + 0.5) * inv};
          const Hit h = supersample == 1 ? center : cast_ray(surface, rpc, q);
          if (!h.ok) continue;
          const auto c = surface.color(h.lat, h.lon);
          for (int k = 0; k < 3; ++k) acc[k] += c[k];
          ++n;
        }
      if (n == 0) continue;
      for (int k = 0; k < 3; ++k) r.rgb.at(x, y, k) = acc[k] / n;
      r.pan.at(x, y) = 0.299 * r.rgb.at(x, y, 0) + 0.587 * r.rgb.at(x, y, 1) + 0.114 * r.rgb.at(x, y, 2);
      r.hit.set(x, y, true);
    }
  return r;
}

Image box_downsample(const Image& img, int factor) {
  if (factor < 1 || img.width % factor != 0 || img.height % factor != 0)
    throw ShapeMismatch("box_downsample: size not divisible by factor");
  Image out(img.width / factor, img.height / factor, img.channels);
  const double norm = 1.0 / (factor * factor);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double s = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) s += img.at(x * factor + dx, y * factor + dy, c);
        out.at(x, y, c) = s * norm;
      }
  return out;
}

SceneSpec standard_scene_spec(int size) {
  if (size < 2) throw InvalidRange("scene size must be at least 2 pixels");
  SceneSpec spec;
  spec.width = spec.height = size;
  const double half = 0.5 * size;
  spec.geo_ref = {30.0, -81.7, 15.5};
  const MetersPerDegree m = meters_per_degree(spec.geo_ref.lat);
  Normalization n;
  n.lat_off = spec.geo_ref.lat;
  n.lon_off = spec.geo_ref.lon;
  n.hei_off = spec.geo_ref.hei;
  n.lat_scale = half / m.lat;  // 1 m pixels
  n.lon_scale = half / m.lon;
  n.hei_scale = 20.0;
  n.samp_off = half - 0.5;
  n.line_off = half - 0.5;
  n.samp_scale = half;
  n.line_scale = half;

  spec.source.norm = n;
  spec.source.slope = 0.0;
  spec.source.line_gain = -1.0;  // north up

  AffineViewParams east = spec.source;
  east.slope = 0.5;
  east.azimuth_deg = 90.0;
  AffineViewParams west = east;
  west.azimuth_deg = 270.0;
  spec.targets = {east, west};
  return spec;
}

SyntheticSurface standard_flat_surface(const SceneSpec& spec, std::uint64_t seed) {
  SyntheticSurface s;
  s.kind = SurfaceKind::Flat;
  s.ref = spec.geo_ref;
  s.h0 = 12.3;
  s.h_min = spec.h_far;
  s.h_max = spec.h_near;
  s.texture_seed = seed;
  return s;
}

SyntheticSurface standard_ramp_surface(const SceneSpec& spec, std::uint64_t seed) {
  SyntheticSurface s = standard_flat_surface(spec, seed);
  s.kind = SurfaceKind::Ramp;
  s.h0 = 15.0;
  s.grad_east = 0.15;
  s.grad_north = 0.05;
  return s;
}

SyntheticSurface standard_hill_surface(const SceneSpec& spec, std::uint64_t seed) {
  SyntheticSurface s = standard_flat_surface(spec, seed);
  s.kind = SurfaceKind::GaussianHill;
  s.h0 = 8.0;
  s.amplitude = 12.0;
  s.width = 12.0;
  return s;
}

SceneManifest make_scene(const SyntheticSurface& surface, const SceneSpec& spec, const std::string& out_dir) {
  if (spec.width % spec.lr_factor != 0 || spec.height % spec.lr_factor != 0)
    throw ShapeMismatch("make_scene: raster size must be divisible by lr_factor");
  check_surface_bounds(surface, 0.5 * std::max(spec.width, spec.height) + 16.0);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  const fs::path dir(out_dir);

  SceneManifest m;
  m.width = spec.width;
  m.height = spec.height;
  m.lr_factor = spec.lr_factor;
  m.h_near = spec.h_near;
  m.h_far = spec.h_far;
  m.geo_ref = spec.geo_ref;
  m.base_dir = dir.string();

  const RpcModel src = make_affine_rpc(spec.source);
  write_rpc_file((dir / "src.rpc").string(), src);
  const RaycastResult hr = raycast_render(surface, src, spec.width, spec.height, spec.supersample);
  write_pfm((dir / "src_pan.pfm").string(), hr.pan);
  write_pfm((dir / "src_rgb.pfm").string(), hr.rgb);
  write_pfm((dir / "src_rgb_lr.pfm").string(), box_downsample(hr.rgb, spec.lr_factor));
  write_pfm((dir / "src_altitude.pfm").string(), hr.altitude);
  m.pan = "src_pan.pfm";
  m.rgb = "src_rgb.pfm";
  m.lr_rgb = "src_rgb_lr.pfm";
  m.rpc = "src.rpc";
  m.altitude_truth = "src_altitude.pfm";

  for (std::size_t t = 0; t < spec.targets.size(); ++t) {
    const std::string stem = "tgt" + std::to_string(t);
    const RpcModel rpc = make_affine_rpc(spec.targets[t]);
    write_rpc_file((dir / (stem + ".rpc")).string(), rpc);
    const RaycastResult view = raycast_render(surface, rpc, spec.width, spec.height, spec.supersample);
    write_pfm((dir / (stem + "_rgb.pfm")).string(), view.rgb);
    m.targets.push_back({stem + "_rgb.pfm", stem + ".rpc"});
  }

  // Truth DSM: analytic surface height at the centers of the source footprint.
  const GridSpec grid = footprint_grid(src, spec.width, spec.height, spec.geo_ref.hei);
  Dsm dsm;
  dsm.grid = grid;
  dsm.heights = Image(grid.cols, grid.rows, 1);
  dsm.mask = Mask(grid.cols, grid.rows, true);
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c)
      dsm.heights.at(c, r) = surface.height(grid.lat0 + r * grid.dlat, grid.lon0 + c * grid.dlon);
  write_dsm((dir / "dsm_truth").string(), dsm);
  m.dsm_truth = "dsm_truth";
  m.dsm_grid = grid;

  write_manifest((dir / "manifest.json").string(), m);
  return m;
}

}  // namespace rpcmpi
