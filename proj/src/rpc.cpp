// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "rpcmpi/rpc.hpp"

#include <cmath>
#include <string>

#include "rpcmpi/error.hpp"

namespace rpcmpi {

namespace {

constexpr Exponents kRpc00bOrder[20] = {
    {0, 0, 0},  // 1
    {0, 0, 1},  // L
    {0, 1, 0},  // P
    {1, 0, 0},  // H
    {0, 1, 1},  // LP
    {1, 0, 1},  // LH
    {1, 1, 0},  // PH
    {0, 0, 2},  // L^2
    {0, 2, 0},  // P^2
    {2, 0, 0},  // H^2
    {1, 1, 1},  // PLH
    {0, 0, 3},  // L^3
    {0, 2, 1},  // LP^2
    {2, 0, 1},  // LH^2
    {0, 1, 2},  // L^2P
    {0, 3, 0},  // P^3
    {2, 1, 0},  // PH^2
    {1, 0, 2},  // L^2H
    {1, 2, 0},  // P^2H
    {3, 0, 0},  // H^3
};

void check_tensor(const CoeffTensor& t, bool denominator, const char* name) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        const double v = t[tensor_index(i, j, k)];
        if (!std::isfinite(v))
          throw InvariantViolation(std::string(name) + ": non-finite coefficient");
        if (i + j + k > 3 && v != 0.0)
          throw InvariantViolation(std::string(name) + ": coefficient above degree 3");
      }
  if (denominator && t[0] != 1.0)
    throw InvariantViolation(std::string(name) + ": denominator constant term must be 1");
}

void check_scale(double off, double scale, const char* name) {
  if (!std::isfinite(off) || !std::isfinite(scale))
    throw InvariantViolation(std::string(name) + ": non-finite normalization");
  if (!(scale > 0.0)) throw InvariantViolation(std::string(name) + ": scale must be positive");
}

double checked_ratio(double num, double den, std::size_t index) {
  if (!(std::abs(den) > kDenominatorGuard)) throw DenominatorNearZero(index);
  return num / den;
}

}  // namespace

double eval_poly(const CoeffTensor& coeffs, double a, double b, double c) {
  const double pa[4] = {1.0, a, a * a, a * a * a};
  const double pb[4] = {1.0, b, b * b, b * b * b};
  const double pc[4] = {1.0, c, c * c, c * c * c};
  double sum = 0.0;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j)
      for (int k = 0; i + j + k <= 3; ++k) sum += coeffs[tensor_index(i, j, k)] * pa[i] * pb[j] * pc[k];
  return sum;
}

PolyGrad eval_poly_grad(const CoeffTensor& coeffs, double a, double b, double c) {
  const double pa[4] = {1.0, a, a * a, a * a * a};
  const double pb[4] = {1.0, b, b * b, b * b * b};
  const double pc[4] = {1.0, c, c * c, c * c * c};
  PolyGrad g{0.0, 0.0, 0.0};
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j)
      for (int k = 0; i + j + k <= 3; ++k) {
        const double t = coeffs[tensor_index(i, j, k)];
        if (t == 0.0) continue;
        g.value += t * pa[i] * pb[j] * pc[k];
        if (j > 0) g.d_b += t * pa[i] * j * pb[j - 1] * pc[k];
        if (k > 0) g.d_c += t * pa[i] * pb[j] * k * pc[k - 1];
      }
  return g;
}

Exponents rpc00b_exponents(int n) {
  if (n < 1 || n > 20) throw InvalidRange("RPC00B coefficient number must be in 1..20");
  return kRpc00bOrder[n - 1];
}

std::size_t rpc00b_projection_index(int n) {
  const Exponents e = rpc00b_exponents(n);
  return tensor_index(e.hei, e.lat, e.lon);
}

std::size_t rpc00b_localization_index(int n) {
  // L -> samp (second slot), P -> line (third slot).
  const Exponents e = rpc00b_exponents(n);
  return tensor_index(e.hei, e.lon, e.lat);
}

void GeoPointBatch::push_back(const GeoPoint& p) {
  lat.push_back(p.lat);
  lon.push_back(p.lon);
  hei.push_back(p.hei);
}

void GeoPointBatch::validate() const {
  if (lon.size() != lat.size() || hei.size() != lat.size())
    throw ShapeMismatch("GeoPointBatch: lat/lon/hei lengths differ");
  for (std::size_t i = 0; i < lat.size(); ++i)
    if (!std::isfinite(lat[i]) || !std::isfinite(lon[i]) || !std::isfinite(hei[i]))
      throw InvariantViolation("GeoPointBatch: non-finite point " + std::to_string(i));
}

void ImagePointBatch::push_back(const ImagePoint& p) {
  samp.push_back(p.samp);
  line.push_back(p.line);
}

void ImagePointBatch::validate() const {
  if (line.size() != samp.size()) throw ShapeMismatch("ImagePointBatch: samp/line lengths differ");
  for (std::size_t i = 0; i < samp.size(); ++i)
    if (!std::isfinite(samp[i]) || !std::isfinite(line[i]))
      throw InvariantViolation("ImagePointBatch: non-finite point " + std::to_string(i));
}

RpcModel::RpcModel(const Normalization& norm, const ProjectionTensors& proj,
                   std::optional<LocalizationTensors> loc)
    : norm_(norm), proj_(proj), loc_(std::move(loc)) {
  check_scale(norm_.lat_off, norm_.lat_scale, "LAT");
  check_scale(norm_.lon_off, norm_.lon_scale, "LONG");
  check_scale(norm_.hei_off, norm_.hei_scale, "HEIGHT");
  check_scale(norm_.samp_off, norm_.samp_scale, "SAMP");
  check_scale(norm_.line_off, norm_.line_scale, "LINE");
  check_tensor(proj_.samp_num, false, "SAMP_NUM");
  check_tensor(proj_.samp_den, true, "SAMP_DEN");
  check_tensor(proj_.line_num, false, "LINE_NUM");
  check_tensor(proj_.line_den, true, "LINE_DEN");
  if (loc_) {
    check_tensor(loc_->lat_num, false, "LAT_NUM");
    check_tensor(loc_->lat_den, true, "LAT_DEN");
    check_tensor(loc_->lon_num, false, "LON_NUM");
    check_tensor(loc_->lon_den, true, "LON_DEN");
  }
}

RpcModel RpcModel::without_localization() const { return RpcModel(norm_, proj_, std::nullopt); }

GeoPoint RpcModel::normalize(const GeoPoint& p) const {
  return {(p.lat - norm_.lat_off) / norm_.lat_scale, (p.lon - norm_.lon_off) / norm_.lon_scale,
          (p.hei - norm_.hei_off) / norm_.hei_scale};
}

GeoPoint RpcModel::denormalize(const GeoPoint& p) const {
  return {p.lat * norm_.lat_scale + norm_.lat_off, p.lon * norm_.lon_scale + norm_.lon_off,
          p.hei * norm_.hei_scale + norm_.hei_off};
}

ImagePoint RpcModel::normalize(const ImagePoint& p) const {
  return {(p.samp - norm_.samp_off) / norm_.samp_scale, (p.line - norm_.line_off) / norm_.line_scale};
}

ImagePoint RpcModel::denormalize(const ImagePoint& p) const {
  return {p.samp * norm_.samp_scale + norm_.samp_off, p.line * norm_.line_scale + norm_.line_off};
}

ImagePoint project_normalized(const RpcModel& rpc, const GeoPoint& pn, std::size_t index) {
  const ProjectionTensors& t = rpc.projection();
  const double samp = checked_ratio(eval_poly(t.samp_num, pn.hei, pn.lat, pn.lon),
                                    eval_poly(t.samp_den, pn.hei, pn.lat, pn.lon), index);
  const double line = checked_ratio(eval_poly(t.line_num, pn.hei, pn.lat, pn.lon),
                                    eval_poly(t.line_den, pn.hei, pn.lat, pn.lon), index);
  return {samp, line};
}

namespace {

GeoPoint localize_tensor(const LocalizationTensors& t, const ImagePoint& in, double hei_n,
                         std::size_t index) {
  const double lat = checked_ratio(eval_poly(t.lat_num, hei_n, in.samp, in.line),
                                   eval_poly(t.lat_den, hei_n, in.samp, in.line), index);
  const double lon = checked_ratio(eval_poly(t.lon_num, hei_n, in.samp, in.line),
                                   eval_poly(t.lon_den, hei_n, in.samp, in.line), index);
  return {lat, lon, hei_n};
}

struct RatioGrad {
  double value, d_lat, d_lon;
};

// d(N/D) with respect to (lat, lon); polynomial slots are (hei, lat, lon).
RatioGrad ratio_grad(const CoeffTensor& num, const CoeffTensor& den, double hei, double lat,
                     double lon, std::size_t index) {
  const PolyGrad n = eval_poly_grad(num, hei, lat, lon);
  const PolyGrad d = eval_poly_grad(den, hei, lat, lon);
  if (!(std::abs(d.value) > kDenominatorGuard)) throw DenominatorNearZero(index);
  const double inv = 1.0 / d.value;
  const double v = n.value * inv;
  return {v, (n.d_b - v * d.d_b) * inv, (n.d_c - v * d.d_c) * inv};
}

GeoPoint localize_newton(const RpcModel& rpc, const ImagePoint& in, double hei_n, std::size_t index,
                         const NewtonOptions& opt) {
  const ProjectionTensors& t = rpc.projection();
  double lat = 0.0, lon = 0.0;  // normalized offsets

  auto residual = [&](double la, double lo, RatioGrad& s, RatioGrad& l) {
    s = ratio_grad(t.samp_num, t.samp_den, hei_n, la, lo, index);
    l = ratio_grad(t.line_num, t.line_den, hei_n, la, lo, index);
    s.value -= in.samp;
    l.value -= in.line;
    return std::hypot(s.value, l.value);
  };

  RatioGrad s{}, l{};
  double r = residual(lat, lon, s, l);
  for (int it = 0; it < opt.max_iterations && !(r < opt.tolerance); ++it) {
    const double det = s.d_lat * l.d_lon - s.d_lon * l.d_lat;
    if (!std::isfinite(det) || std::abs(det) < 1e-300) throw NoConvergence(index, r);
    const double dlat = -(l.d_lon * s.value - s.d_lon * l.value) / det;
    const double dlon = -(-l.d_lat * s.value + s.d_lat * l.value) / det;

    // Backtrack until the residual decreases.
    double step = 1.0;
    RatioGrad s_new{}, l_new{};
    double r_new = r;
    for (int halving = 0; halving < 30; ++halving, step *= 0.5) {
      try {
        r_new = residual(lat + step * dlat, lon + step * dlon, s_new, l_new);
      } catch (const DenominatorNearZero&) {
        continue;
      }
      if (r_new < r) break;
    }
    if (!(r_new < r)) throw NoConvergence(index, r);
    lat += step * dlat;
    lon += step * dlon;
    s = s_new;
    l = l_new;
    r = r_new;
  }
  if (!(r < opt.tolerance)) throw NoConvergence(index, r);
  return {lat, lon, hei_n};
}

}  // namespace

GeoPoint localize_normalized(const RpcModel& rpc, const ImagePoint& in, double hei_n,
                             std::size_t index, LocalizeMethod method, const NewtonOptions& newton) {
  if (method == LocalizeMethod::Tensor && !rpc.has_localization())
    throw InvariantViolation("RPC has no localization tensors");
  if (method != LocalizeMethod::Newton && rpc.has_localization())
    return localize_tensor(*rpc.localization(), in, hei_n, index);
  return localize_newton(rpc, in, hei_n, index, newton);
}

ImagePoint project(const RpcModel& rpc, const GeoPoint& p, std::size_t index) {
  return rpc.denormalize(project_normalized(rpc, rpc.normalize(p), index));
}

ImagePointBatch project(const RpcModel& rpc, const GeoPointBatch& pts) {
  pts.validate();
  ImagePointBatch out;
  out.samp.resize(pts.size());
  out.line.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const ImagePoint q = project(rpc, pts[i], i);
    out.samp[i] = q.samp;
    out.line[i] = q.line;
  }
  return out;
}

GeoPoint localize(const RpcModel& rpc, const ImagePoint& p, double hei, std::size_t index,
                  LocalizeMethod method) {
  const GeoPoint gn = localize_normalized(rpc, rpc.normalize(p), rpc.normalize_hei(hei), index, method);
  GeoPoint g = rpc.denormalize(gn);
  g.hei = hei;
  return g;
}

GeoPointBatch localize(const RpcModel& rpc, const ImagePointBatch& pts, std::span<const double> hei,
                       LocalizeMethod method) {
  pts.validate();
  if (hei.size() != pts.size()) throw ShapeMismatch("localize: height array length differs");
  GeoPointBatch out;
  out.lat.resize(pts.size());
  out.lon.resize(pts.size());
  out.hei.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const GeoPoint g = localize(rpc, pts[i], hei[i], i, method);
    out.lat[i] = g.lat;
    out.lon[i] = g.lon;
    out.hei[i] = g.hei;
  }
  return out;
}

}  // namespace rpcmpi
