// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "rpcmpi/error.hpp"
#include "rpcmpi/rpc.hpp"

namespace rpcmpi {

namespace {

struct Entry {
  double value;
  std::size_t line;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Leading number of the value field; trailing unit words ("pixels",
// "degrees", "meters") are accepted and ignored.
double parse_value(std::string_view field, std::size_t line) {
  const std::string text(trim(field));
  if (text.empty()) throw ParseError(line, "missing value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str()) throw ParseError(line, "value is not a number: '" + text + "'");
  if (errno == ERANGE) throw ParseError(line, "value out of range: '" + text + "'");
  if (*end != '\0' && *end != ' ' && *end != '\t')
    throw ParseError(line, "trailing characters after number: '" + text + "'");
  return v;
}

class KeyTable {
 public:
  explicit KeyTable(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      const std::string_view raw =
          text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no;
      last_line_ = line_no;
      pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;

      const std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, "expected 'KEY: value'");
      const std::string key(trim(line.substr(0, colon)));
      if (key.empty()) throw ParseError(line_no, "empty key");
      const double v = parse_value(line.substr(colon + 1), line_no);
      if (!entries_.emplace(key, Entry{v, line_no}).second)
        throw ParseError(line_no, "duplicate key " + key);
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  double get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError(last_line_, "missing key " + key);
    return it->second.value;
  }

 private:
  std::map<std::string, Entry> entries_;
  std::size_t last_line_ = 0;
};

CoeffTensor read_poly(const KeyTable& keys, const std::string& prefix, bool inverse) {
  CoeffTensor t{};
  for (int n = 1; n <= 20; ++n) {
    const double v = keys.get(prefix + "_COEFF_" + std::to_string(n));
    t[inverse ? rpc00b_localization_index(n) : rpc00b_projection_index(n)] = v;
  }
  return t;
}

std::string lon_prefix(const KeyTable& keys) {
  return keys.has("LONG_NUM_COEFF_1") ? "LONG" : "LON";
}

void put(std::ostringstream& os, const char* key, double v, const char* unit = nullptr) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << key << ": " << buf;
  if (unit) os << ' ' << unit;
  os << '\n';
}

void put_poly(std::ostringstream& os, const std::string& prefix, const CoeffTensor& t,
              bool inverse) {
  for (int n = 1; n <= 20; ++n) {
    const std::string key = prefix + "_COEFF_" + std::to_string(n);
    put(os, key.c_str(), t[inverse ? rpc00b_localization_index(n) : rpc00b_projection_index(n)]);
  }
}

}  // namespace

RpcModel parse_rpc(std::string_view text) {
  const KeyTable keys(text);
  Normalization n;
  n.line_off = keys.get("LINE_OFF");
  n.samp_off = keys.get("SAMP_OFF");
  n.lat_off = keys.get("LAT_OFF");
  n.lon_off = keys.get("LONG_OFF");
  n.hei_off = keys.get("HEIGHT_OFF");
  n.line_scale = keys.get("LINE_SCALE");
  n.samp_scale = keys.get("SAMP_SCALE");
  n.lat_scale = keys.get("LAT_SCALE");
  n.lon_scale = keys.get("LONG_SCALE");
  n.hei_scale = keys.get("HEIGHT_SCALE");

  ProjectionTensors p;
  p.line_num = read_poly(keys, "LINE_NUM", false);
  p.line_den = read_poly(keys, "LINE_DEN", false);
  p.samp_num = read_poly(keys, "SAMP_NUM", false);
  p.samp_den = read_poly(keys, "SAMP_DEN", false);

  std::optional<LocalizationTensors> loc;
  const std::string lon = lon_prefix(keys);
  const bool any_inverse = keys.has("LAT_NUM_COEFF_1") || keys.has("LAT_DEN_COEFF_1") ||
                           keys.has(lon + "_NUM_COEFF_1") || keys.has(lon + "_DEN_COEFF_1");
  if (any_inverse) {
    LocalizationTensors l;
    l.lat_num = read_poly(keys, "LAT_NUM", true);
    l.lat_den = read_poly(keys, "LAT_DEN", true);
    l.lon_num = read_poly(keys, lon + "_NUM", true);
    l.lon_den = read_poly(keys, lon + "_DEN", true);
    loc = l;
  }
  return RpcModel(n, p, loc);
}

std::string serialize_rpc(const RpcModel& rpc) {
  std::ostringstream os;
  const Normalization& n = rpc.norm();
  put(os, "LINE_OFF", n.line_off, "pixels");
  put(os, "SAMP_OFF", n.samp_off, "pixels");
  put(os, "LAT_OFF", n.lat_off, "degrees");
  put(os, "LONG_OFF", n.lon_off, "degrees");
  put(os, "HEIGHT_OFF", n.hei_off, "meters");
  put(os, "LINE_SCALE", n.line_scale, "pixels");
  put(os, "SAMP_SCALE", n.samp_scale, "pixels");
  put(os, "LAT_SCALE", n.lat_scale, "degrees");
  put(os, "LONG_SCALE", n.lon_scale, "degrees");
  put(os, "HEIGHT_SCALE", n.hei_scale, "meters");
  const ProjectionTensors& p = rpc.projection();
  put_poly(os, "LINE_NUM", p.line_num, false);
  put_poly(os, "LINE_DEN", p.line_den, false);
  put_poly(os, "SAMP_NUM", p.samp_num, false);
  put_poly(os, "SAMP_DEN", p.samp_den, false);
  if (const auto& l = rpc.localization()) {
    put_poly(os, "LAT_NUM", l->lat_num, true);
    put_poly(os, "LAT_DEN", l->lat_den, true);
    put_poly(os, "LON_NUM", l->lon_num, true);
    put_poly(os, "LON_DEN", l->lon_den, true);
  }
  return os.str();
}

RpcModel read_rpc_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open RPC file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rpc(ss.str());
}

void write_rpc_file(const std::string& path, const RpcModel& rpc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write RPC file " + path);
  out << serialize_rpc(rpc);
  if (!out) throw IoError("failed writing RPC file " + path);
}

}  // namespace rpcmpi
