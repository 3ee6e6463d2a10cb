// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "rpcmpi/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rpcmpi/error.hpp"

namespace rpcmpi {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, bool little) {
  unsigned char b[sizeof(T)] = {};
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  const bool native_little = std::endian::native == std::endian::little;
  if (little != native_little) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

// Reads one whitespace-delimited header token of a netpbm / PFM header.
std::string header_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int header_int(std::istream& in, const char* what) {
  const std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(1, std::string("bad ") + what + " '" + tok + "'");
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r' && ch != ' ' && ch != '\t') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<double>> read_csv(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    if (!seen_header) {
      if (fields != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw ParseError(line_no, "expected header '" + want + "'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size()) throw ParseError(line_no, "wrong number of fields");
    std::vector<double> row;
    for (const auto& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || *end != '\0' || !std::isfinite(v)) throw ParseError(line_no, "bad number '" + f + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (!seen_header) throw ParseError(line_no, "missing CSV header");
  return rows;
}

}  // namespace

void write_u32_le(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_f32_le(std::ostream& out, float v) { write_le(out, v); }
void write_f64_le(std::ostream& out, double v) { write_le(out, v); }
std::uint32_t read_u32_le(std::istream& in) { return read_raw<std::uint32_t>(in, true); }
float read_f32_le(std::istream& in) { return read_raw<float>(in, true); }
double read_f64_le(std::istream& in) { return read_raw<double>(in, true); }

std::string encode_pfm(const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw ShapeMismatch("PFM supports 1 or 3 channels");
  if (img.width < 1 || img.height < 1) throw ShapeMismatch("PFM image must be non-empty");
  std::ostringstream os;
  os << (img.channels == 3 ? "PF" : "Pf") << '\n' << img.width << ' ' << img.height << "\n-1.0\n";
  for (int y = img.height - 1; y >= 0; --y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) write_f32_le(os, static_cast<float>(img.at(x, y, c)));
  return os.str();
}

Image decode_pfm(const std::string& bytes) {
  std::istringstream in(bytes);
  const std::string magic = header_token(in);
  int channels;
  if (magic == "PF") channels = 3;
  else if (magic == "Pf") channels = 1;
  else throw ParseError(1, "not a PFM file");
  const int w = header_int(in, "width");
  const int h = header_int(in, "height");
  const std::string scale_tok = header_token(in);
  double scale;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw ParseError(3, "bad PFM scale '" + scale_tok + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw ParseError(3, "PFM scale must be non-zero");
  const bool little = scale < 0.0;
  const std::size_t need = static_cast<std::size_t>(w) * h * channels * 4;
  const auto pos = static_cast<std::size_t>(in.tellg());
  if (bytes.size() - pos != need) throw ParseError(4, "PFM payload size mismatch");
  Image img(w, h, channels);
  for (int y = h - 1; y >= 0; --y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) img.at(x, y, c) = read_raw<float>(in, little);
  return img;
}

void write_pfm(const std::string& path, const Image& img) { spit(path, encode_pfm(img)); }

Image read_pfm(const std::string& path) { return decode_pfm(slurp(path)); }

void write_pnm(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw ShapeMismatch("PNM supports 1 or 3 channels");
  std::ostringstream os;
  os << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  for (double v : img.data) {
    const double c = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  spit(path, os.str());
}

Image read_pnm(const std::string& path) {
  const std::string bytes = slurp(path);
  std::istringstream in(bytes);
  const std::string magic = header_token(in);
  int channels;
  if (magic == "P6") channels = 3;
  else if (magic == "P5") channels = 1;
  else throw ParseError(1, "not a binary PGM/PPM file");
  const int w = header_int(in, "width");
  const int h = header_int(in, "height");
  if (header_int(in, "maxval") != 255) throw ParseError(3, "only 8-bit PNM is supported");
  const auto pos = static_cast<std::size_t>(in.tellg());
  if (bytes.size() - pos != static_cast<std::size_t>(w) * h * channels)
    throw ParseError(4, "PNM payload size mismatch");
  Image img(w, h, channels);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    img.data[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  return img;
}

void write_dsm(const std::string& stem, const Dsm& dsm) {
  const fs::path bin = fs::path(stem + ".bin");
  json header = {{"format", "rpcmpi-dsm"},
                 {"version", 1},
                 {"cols", dsm.grid.cols},
                 {"rows", dsm.grid.rows},
                 {"lat0", dsm.grid.lat0},
                 {"lon0", dsm.grid.lon0},
                 {"dlat", dsm.grid.dlat},
                 {"dlon", dsm.grid.dlon},
                 {"nodata", kDsmNoData},
                 {"dtype", "float32le"},
                 {"data", bin.filename().string()}};
  spit(stem + ".json", header.dump(2) + "\n");
  std::ostringstream os;
  for (int r = 0; r < dsm.grid.rows; ++r)
    for (int c = 0; c < dsm.grid.cols; ++c) {
      const bool ok = dsm.mask.valid.empty() || dsm.mask.at(c, r);
      write_f32_le(os, ok ? static_cast<float>(dsm.heights.at(c, r)) : kDsmNoData);
    }
  spit(bin.string(), os.str());
}

Dsm read_dsm(const std::string& path) {
  std::string json_path = path;
  if (fs::path(path).extension() != ".json") json_path = path + ".json";
  json header;
  try {
    header = json::parse(slurp(json_path));
  } catch (const json::parse_error& e) {
    throw ParseError(static_cast<std::size_t>(e.byte), "DSM header: " + std::string(e.what()));
  }
  Dsm d;
  try {
    d.grid.cols = header.at("cols").get<int>();
    d.grid.rows = header.at("rows").get<int>();
    d.grid.lat0 = header.at("lat0").get<double>();
    d.grid.lon0 = header.at("lon0").get<double>();
    d.grid.dlat = header.at("dlat").get<double>();
    d.grid.dlon = header.at("dlon").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(1, "DSM header: " + std::string(e.what()));
  }
  if (d.grid.cols < 1 || d.grid.rows < 1) throw ParseError(1, "DSM header: non-positive size");
  const float nodata = header.value("nodata", kDsmNoData);
  const fs::path bin = fs::path(json_path).parent_path() / header.value("data", std::string());
  const std::string bytes = slurp(bin.string());
  if (bytes.size() != static_cast<std::size_t>(d.grid.cols) * d.grid.rows * 4)
    throw ParseError(1, "DSM payload size mismatch");
  std::istringstream in(bytes);
  d.heights = Image(d.grid.cols, d.grid.rows, 1);
  d.mask = Mask(d.grid.cols, d.grid.rows, false);
  for (int r = 0; r < d.grid.rows; ++r)
    for (int c = 0; c < d.grid.cols; ++c) {
      const float v = read_f32_le(in);
      if (v != nodata && std::isfinite(v)) {
        d.heights.at(c, r) = v;
        d.mask.set(c, r, true);
      }
    }
  return d;
}

Dsm dsm_from_altitude(const Image& altitude, const RpcModel& rpc, const GridSpec& grid) {
  if (grid.rows < 1 || grid.cols < 1 || grid.dlat == 0.0 || grid.dlon == 0.0)
    throw InvalidRange("DSM grid must have positive size and non-zero steps");
  Dsm d;
  d.grid = grid;
  d.heights = Image(grid.cols, grid.rows, 1);
  d.mask = Mask(grid.cols, grid.rows, false);
  std::size_t landed = 0;
  for (int y = 0; y < altitude.height; ++y)
    for (int x = 0; x < altitude.width; ++x) {
      const double h = altitude.at(x, y);
      if (!std::isfinite(h)) continue;
      GeoPoint g;
      try {
        g = localize(rpc, {static_cast<double>(x), static_cast<double>(y)}, h,
                     static_cast<std::size_t>(y) * altitude.width + x);
      } catch (const DenominatorNearZero&) {
        continue;
      } catch (const NoConvergence&) {
        continue;
      }
      const double col = std::round((g.lon - grid.lon0) / grid.dlon);
      const double row = std::round((g.lat - grid.lat0) / grid.dlat);
      if (!(col >= 0 && row >= 0 && col < grid.cols && row < grid.rows)) continue;
      const int c = static_cast<int>(col), r = static_cast<int>(row);
      if (!d.mask.at(c, r) || h > d.heights.at(c, r)) {
        d.heights.at(c, r) = h;
        d.mask.set(c, r, true);
      }
      ++landed;
    }
  if (landed == 0) throw EmptyOutput("no pixel landed inside the DSM grid");
  return d;
}

Mask dsm_overlap(const Dsm& a, const Dsm& b) {
  if (a.grid.rows != b.grid.rows || a.grid.cols != b.grid.cols)
    throw ShapeMismatch("DSM grids differ in size");
  Mask m(a.grid.cols, a.grid.rows, false);
  for (std::size_t i = 0; i < m.valid.size(); ++i) m.valid[i] = a.mask.valid[i] && b.mask.valid[i];
  return m;
}

GridSpec footprint_grid(const RpcModel& rpc, int width, int height, double hei) {
  const GeoPoint o = localize(rpc, {0.0, 0.0}, hei);
  const GeoPoint ex = localize(rpc, {1.0, 0.0}, hei);
  const GeoPoint ey = localize(rpc, {0.0, 1.0}, hei);
  GridSpec g;
  g.lat0 = o.lat;
  g.lon0 = o.lon;
  g.dlat = ey.lat - o.lat;
  g.dlon = ex.lon - o.lon;
  g.rows = height;
  g.cols = width;
  return g;
}

GeoPointBatch read_geo_csv(const std::string& path) {
  GeoPointBatch b;
  for (const auto& r : read_csv(path, {"lat", "lon", "hei"})) b.push_back({r[0], r[1], r[2]});
  return b;
}

void write_geo_csv(const std::string& path, const GeoPointBatch& pts) {
  std::ostringstream os;
  os << "lat,lon,hei\n";
  for (std::size_t i = 0; i < pts.size(); ++i)
    os << fmt17(pts.lat[i]) << ',' << fmt17(pts.lon[i]) << ',' << fmt17(pts.hei[i]) << '\n';
  spit(path, os.str());
}

ImagePointBatch read_image_csv(const std::string& path) {
  ImagePointBatch b;
  for (const auto& r : read_csv(path, {"samp", "line"})) b.push_back({r[0], r[1]});
  return b;
}

void write_image_csv(const std::string& path, const ImagePointBatch& pts) {
  std::ostringstream os;
  os << "samp,line\n";
  for (std::size_t i = 0; i < pts.size(); ++i) os << fmt17(pts.samp[i]) << ',' << fmt17(pts.line[i]) << '\n';
  spit(path, os.str());
}

ImagePointBatch read_image_height_csv(const std::string& path, std::vector<double>& hei) {
  ImagePointBatch b;
  hei.clear();
  for (const auto& r : read_csv(path, {"samp", "line", "hei"})) {
    b.push_back({r[0], r[1]});
    hei.push_back(r[2]);
  }
  return b;
}

std::string SceneManifest::resolve(const std::string& rel) const {
  if (rel.empty()) return rel;
  const fs::path p(rel);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (fs::path(base_dir) / p).string();
}

void SceneManifest::validate() const {
  if (schema != 1) throw InvariantViolation("unsupported manifest schema " + std::to_string(schema));
  if (!(h_near > h_far)) throw InvariantViolation("manifest altitude bounds must satisfy h_near > h_far");
  if (width < 1 || height < 1) throw InvariantViolation("manifest image size must be positive");
  if (lr_factor < 1) throw InvariantViolation("manifest lr_factor must be >= 1");
  auto need = [&](const std::string& rel, const char* what) {
    if (rel.empty()) throw InvariantViolation(std::string("manifest is missing ") + what);
    if (!fs::exists(resolve(rel))) throw InvariantViolation(std::string("manifest ") + what + " not found: " + resolve(rel));
  };
  need(pan, "source pan");
  need(rpc, "source rpc");
  if (rgb.empty() && lr_rgb.empty()) throw InvariantViolation("manifest needs a source rgb or lr_rgb");
  if (!rgb.empty()) need(rgb, "source rgb");
  if (!lr_rgb.empty()) need(lr_rgb, "source lr_rgb");
  for (const auto& t : targets) {
    need(t.rgb, "target rgb");
    need(t.rpc, "target rpc");
  }
  if (!dsm_truth.empty()) need(dsm_truth + ".json", "dsm truth");
  if (!altitude_truth.empty()) need(altitude_truth, "altitude truth");
}

namespace {

json grid_to_json(const GridSpec& g) {
  return {{"lat0", g.lat0}, {"lon0", g.lon0}, {"dlat", g.dlat}, {"dlon", g.dlon}, {"rows", g.rows}, {"cols", g.cols}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.lat0 = j.at("lat0").get<double>();
  g.lon0 = j.at("lon0").get<double>();
  g.dlat = j.at("dlat").get<double>();
  g.dlon = j.at("dlon").get<double>();
  g.rows = j.at("rows").get<int>();
  g.cols = j.at("cols").get<int>();
  return g;
}

}  // namespace

SceneManifest read_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw ParseError(static_cast<std::size_t>(e.byte), "manifest: " + std::string(e.what()));
  }
  SceneManifest m;
  try {
    m.schema = j.at("schema").get<int>();
    if (m.schema != 1) throw InvariantViolation("unsupported manifest schema " + std::to_string(m.schema));
    const json& src = j.at("source");
    m.width = src.at("width").get<int>();
    m.height = src.at("height").get<int>();
    m.pan = src.at("pan").get<std::string>();
    m.rpc = src.at("rpc").get<std::string>();
    m.rgb = src.value("rgb", std::string());
    m.lr_rgb = src.value("lr_rgb", std::string());
    m.lr_factor = src.value("lr_factor", 4);
    for (const auto& t : j.value("targets", json::array()))
      m.targets.push_back({t.at("rgb").get<std::string>(), t.at("rpc").get<std::string>()});
    const json& alt = j.at("altitude");
    m.h_near = alt.at("h_near").get<double>();
    m.h_far = alt.at("h_far").get<double>();
    const json& ref = j.at("geo_ref");
    m.geo_ref = {ref.at("lat").get<double>(), ref.at("lon").get<double>(), ref.at("hei").get<double>()};
    if (j.contains("truth")) {
      const json& t = j.at("truth");
      m.dsm_truth = t.value("dsm", std::string());
      m.altitude_truth = t.value("altitude", std::string());
      if (t.contains("dsm_grid")) m.dsm_grid = grid_from_json(t.at("dsm_grid"));
    }
  } catch (const json::exception& e) {
    throw ParseError(1, "manifest: " + std::string(e.what()));
  }
  m.base_dir = fs::path(path).parent_path().string();
  return m;
}

void write_manifest(const std::string& path, const SceneManifest& m) {
  json src = {{"width", m.width}, {"height", m.height}, {"pan", m.pan}, {"rpc", m.rpc}, {"lr_factor", m.lr_factor}};
  if (!m.rgb.empty()) src["rgb"] = m.rgb;
  if (!m.lr_rgb.empty()) src["lr_rgb"] = m.lr_rgb;
  json targets = json::array();
  for (const auto& t : m.targets) targets.push_back({{"rgb", t.rgb}, {"rpc", t.rpc}});
  json j = {{"schema", m.schema},
            {"source", src},
            {"targets", targets},
            {"altitude", {{"h_near", m.h_near}, {"h_far", m.h_far}}},
            {"geo_ref", {{"lat", m.geo_ref.lat}, {"lon", m.geo_ref.lon}, {"hei", m.geo_ref.hei}}}};
  json truth = json::object();
  if (!m.dsm_truth.empty()) truth["dsm"] = m.dsm_truth;
  if (!m.altitude_truth.empty()) truth["altitude"] = m.altitude_truth;
  if (m.dsm_grid) truth["dsm_grid"] = grid_to_json(*m.dsm_grid);
  if (!truth.empty()) j["truth"] = truth;
  spit(path, j.dump(2) + "\n");
}

}  // namespace rpcmpi
