// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// File formats: PFM / PGM / PPM rasters, DSM grids (flat float32 binary plus
// a JSON header), point-batch CSV and scene manifests.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rpcmpi/geodesy.hpp"
#include "rpcmpi/image.hpp"
#include "rpcmpi/render.hpp"
#include "rpcmpi/rpc.hpp"

namespace rpcmpi {

void write_u32_le(std::ostream& out, std::uint32_t v);
void write_f32_le(std::ostream& out, float v);
void write_f64_le(std::ostream& out, double v);
std::uint32_t read_u32_le(std::istream& in);
float read_f32_le(std::istream& in);
double read_f64_le(std::istream& in);

/// Portable float map. Channels 1 ("Pf") or 3 ("PF"); written little-endian
/// (negative scale), rows bottom-to-top. Values are stored as float32.
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);
std::string encode_pfm(const Image& img);
Image decode_pfm(const std::string& bytes);

/// 8-bit previews: PGM for one channel, PPM for three. Values are clamped to
/// [0, 1] and rounded to the nearest of 0..255.
void write_pnm(const std::string& path, const Image& img);
Image read_pnm(const std::string& path);

/// Regular geodetic grid; cell (col, row) is centered at
/// (lat0 + row * dlat, lon0 + col * dlon).
struct GridSpec {
  double lat0 = 0.0;
  double lon0 = 0.0;
  double dlat = 0.0;
  double dlon = 0.0;
  int rows = 0;
  int cols = 0;
};

struct Dsm {
  GridSpec grid;
  Image heights;  // cols x rows x 1, meters
  Mask mask;
};

inline constexpr float kDsmNoData = -9999.0f;

/// Writes `<stem>.json` and `<stem>.bin`.
void write_dsm(const std::string& stem, const Dsm& dsm);
/// Accepts the stem or the `.json` path.
Dsm read_dsm(const std::string& path);

/// Splats each pixel, localized at its rendered altitude, onto the grid:
/// nearest cell wins, the highest altitude wins on collisions and empty cells
/// stay masked. Throws EmptyOutput when nothing lands inside the grid.
Dsm dsm_from_altitude(const Image& altitude, const RpcModel& rpc, const GridSpec& grid);
inline Dsm dsm_from_altitude(const RenderOutput& render, const RpcModel& rpc, const GridSpec& grid) {
  return dsm_from_altitude(render.altitude, rpc, grid);
}

/// Cells valid in both DSMs. Throws ShapeMismatch for different grid sizes.
Mask dsm_overlap(const Dsm& a, const Dsm& b);

/// Grid matching the pixel footprint of `rpc` at height `hei`: one cell per
/// pixel, exact for nadir-looking affine cameras.
GridSpec footprint_grid(const RpcModel& rpc, int width, int height, double hei);

// CSV point batches, 17 significant digits, header row required.
GeoPointBatch read_geo_csv(const std::string& path);
void write_geo_csv(const std::string& path, const GeoPointBatch& pts);
ImagePointBatch read_image_csv(const std::string& path);
void write_image_csv(const std::string& path, const ImagePointBatch& pts);
/// `samp,line,hei` rows for localization requests.
ImagePointBatch read_image_height_csv(const std::string& path, std::vector<double>& hei);

struct ViewEntry {
  std::string rgb;
  std::string rpc;
};

/// JSON scene description, `schema: 1`. Relative paths resolve against the
/// manifest's directory.
struct SceneManifest {
  int schema = 1;
  int width = 0;
  int height = 0;
  int lr_factor = 4;
  std::string pan;     // source HR-PAN
  std::string rgb;     // source HR-RGB, optional (empty = absent)
  std::string lr_rgb;  // source LR-RGB, optional
  std::string rpc;     // source RPC
  std::vector<ViewEntry> targets;
  double h_near = 0.0;
  double h_far = 0.0;
  GeoRef geo_ref;
  std::string dsm_truth;       // DSM stem, optional
  std::string altitude_truth;  // per-pixel source altitude PFM, optional
  std::optional<GridSpec> dsm_grid;
  std::string base_dir;

  std::string resolve(const std::string& rel) const;
  /// Throws InvariantViolation for unordered bounds or missing files.
  void validate() const;
};

SceneManifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const SceneManifest& m);

}  // namespace rpcmpi
