// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// Rational Polynomial Camera model.
//
// Every cubic polynomial is stored as a dense 4x4x4 coefficient tensor T where
// T[i][j][k] multiplies a^i * b^j * c^k. For the forward (projection)
// polynomials (a, b, c) = (hei, lat, lon); for the inverse (localization)
// polynomials (a, b, c) = (hei, samp, line). All evaluation happens in
// normalized coordinates: x_n = (x - x_off) / x_scale.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rpcmpi {

using CoeffTensor = std::array<double, 64>;

constexpr std::size_t tensor_index(int i, int j, int k) {
  return static_cast<std::size_t>(16 * i + 4 * j + k);
}

/// Sum over i+j+k <= 3 of T[i][j][k] * a^i * b^j * c^k. Entries of total
/// degree above three are never read.
double eval_poly(const CoeffTensor& coeffs, double a, double b, double c);

/// Value and partial derivatives with respect to b and c.
struct PolyGrad {
  double value;
  double d_b;
  double d_c;
};
PolyGrad eval_poly_grad(const CoeffTensor& coeffs, double a, double b, double c);

/// Exponents of (hei, lat, lon) for RPC00B coefficient n (1-based), in the
/// published order 1, L, P, H, LP, LH, PH, L^2, P^2, H^2, PLH, L^3, LP^2, LH^2,
/// L^2P, P^3, PH^2, L^2H, P^2H, H^3 with L = lon, P = lat, H = hei.
struct Exponents {
  int hei;
  int lat;
  int lon;
};
Exponents rpc00b_exponents(int n);

/// Forward tensor index for RPC00B coefficient n.
std::size_t rpc00b_projection_index(int n);
/// Inverse tensor index for coefficient n. The inverse polynomials use
/// L = samp and P = line in the same term order, stored as (hei, samp, line).
std::size_t rpc00b_localization_index(int n);

struct Normalization {
  double lat_off = 0.0, lat_scale = 1.0;    // degrees
  double lon_off = 0.0, lon_scale = 1.0;    // degrees
  double hei_off = 0.0, hei_scale = 1.0;    // meters
  double samp_off = 0.0, samp_scale = 1.0;  // pixels
  double line_off = 0.0, line_scale = 1.0;  // pixels
};

struct ProjectionTensors {
  CoeffTensor samp_num{}, samp_den{}, line_num{}, line_den{};
};

struct LocalizationTensors {
  CoeffTensor lat_num{}, lat_den{}, lon_num{}, lon_den{};
};

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
  double hei = 0.0;  // meters
};

struct ImagePoint {
  double samp = 0.0;  // column, pixels
  double line = 0.0;  // row, pixels
};

struct GeoPointBatch {
  std::vector<double> lat, lon, hei;

  std::size_t size() const { return lat.size(); }
  void push_back(const GeoPoint& p);
  GeoPoint operator[](std::size_t i) const { return {lat[i], lon[i], hei[i]}; }
  /// Throws ShapeMismatch / InvariantViolation.
  void validate() const;
};

struct ImagePointBatch {
  std::vector<double> samp, line;

  std::size_t size() const { return samp.size(); }
  void push_back(const ImagePoint& p);
  ImagePoint operator[](std::size_t i) const { return {samp[i], line[i]}; }
  void validate() const;
};

/// Immutable camera. Construction enforces positive scales, finite
/// coefficients, zero entries above total degree three and unit constant
/// terms in every denominator.
class RpcModel {
 public:
  RpcModel(const Normalization& norm, const ProjectionTensors& proj,
           std::optional<LocalizationTensors> loc = std::nullopt);

  const Normalization& norm() const { return norm_; }
  const ProjectionTensors& projection() const { return proj_; }
  const std::optional<LocalizationTensors>& localization() const { return loc_; }
  bool has_localization() const { return loc_.has_value(); }

  /// Copy with the inverse tensors dropped; localization then uses Newton.
  RpcModel without_localization() const;

  GeoPoint normalize(const GeoPoint& p) const;
  GeoPoint denormalize(const GeoPoint& p) const;
  ImagePoint normalize(const ImagePoint& p) const;
  ImagePoint denormalize(const ImagePoint& p) const;
  double normalize_hei(double hei) const { return (hei - norm_.hei_off) / norm_.hei_scale; }

 private:
  Normalization norm_;
  ProjectionTensors proj_;
  std::optional<LocalizationTensors> loc_;
};

/// Denominators with magnitude at or below this value are rejected.
inline constexpr double kDenominatorGuard = 1e-8;

enum class LocalizeMethod { Auto, Tensor, Newton };

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-6;  // residual in normalized pixels
};

// Normalized-space entry points. `index` only labels errors.
ImagePoint project_normalized(const RpcModel& rpc, const GeoPoint& pn, std::size_t index = 0);
GeoPoint localize_normalized(const RpcModel& rpc, const ImagePoint& in, double hei_n,
                             std::size_t index = 0, LocalizeMethod method = LocalizeMethod::Auto,
                             const NewtonOptions& newton = {});

// Pixel / degree / meter entry points.
ImagePoint project(const RpcModel& rpc, const GeoPoint& p, std::size_t index = 0);
ImagePointBatch project(const RpcModel& rpc, const GeoPointBatch& pts);

GeoPoint localize(const RpcModel& rpc, const ImagePoint& p, double hei, std::size_t index = 0,
                  LocalizeMethod method = LocalizeMethod::Auto);
GeoPointBatch localize(const RpcModel& rpc, const ImagePointBatch& pts, std::span<const double> hei,
                       LocalizeMethod method = LocalizeMethod::Auto);

/// Parses the RPC00B-style `KEY: value` text format.
RpcModel parse_rpc(std::string_view text);
/// Emits every coefficient with 17 significant digits.
std::string serialize_rpc(const RpcModel& rpc);

RpcModel read_rpc_file(const std::string& path);
void write_rpc_file(const std::string& path, const RpcModel& rpc);

}  // namespace rpcmpi
