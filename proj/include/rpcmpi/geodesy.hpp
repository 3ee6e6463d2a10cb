// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>

namespace rpcmpi {

/// Anchor of the local tangent plane: scene center in degrees / meters.
struct GeoRef {
  double lat = 0.0;
  double lon = 0.0;
  double hei = 0.0;
};

struct MetersPerDegree {
  double lat;
  double lon;
};

/// Series expansion of the WGS84 meridian and parallel arc lengths.
inline MetersPerDegree meters_per_degree(double lat_deg) {
  const double phi = lat_deg * std::numbers::pi / 180.0;
  return {111132.954 - 559.822 * std::cos(2.0 * phi) + 1.175 * std::cos(4.0 * phi),
          111412.84 * std::cos(phi) - 93.5 * std::cos(3.0 * phi)};
}

struct Enu {
  double east;
  double north;
  double up;
};

/// Local tangent plane map anchored at `ref` with meters-per-degree frozen at
/// the anchor latitude. Accurate for kilometer-scale scenes.
class LocalTangentPlane {
 public:
  explicit LocalTangentPlane(const GeoRef& ref) : ref_(ref), mpd_(meters_per_degree(ref.lat)) {}

  Enu to_enu(double lat, double lon, double hei) const {
    return {(lon - ref_.lon) * mpd_.lon, (lat - ref_.lat) * mpd_.lat, hei};
  }
  double lat_of(double north) const { return ref_.lat + north / mpd_.lat; }
  double lon_of(double east) const { return ref_.lon + east / mpd_.lon; }

  const GeoRef& ref() const { return ref_; }
  const MetersPerDegree& scale() const { return mpd_; }

 private:
  GeoRef ref_;
  MetersPerDegree mpd_;
};

}  // namespace rpcmpi
