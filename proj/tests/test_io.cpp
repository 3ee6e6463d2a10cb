// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <fstream>

#include "rpcmpi/error.hpp"
#include "rpcmpi/io.hpp"
#include "support.hpp"

using namespace rpcmpi;
using namespace rpcmpi::test;

TEST_SUITE("io") {

TEST_CASE("PFM round trips float32 values bit for bit") {
  Rng rng(91);
  for (int c : {1, 3}) {
    Image img = random_image(rng, 7, 5, c, -3, 3);
    for (double& v : img.data) v = static_cast<float>(v);
    const Image back = decode_pfm(encode_pfm(img));
    CHECK(back.width == 7);
    CHECK(back.height == 5);
    CHECK(back.channels == c);
    CHECK(back.data == img.data);
  }
  const std::string dir = temp_dir("io_pfm");
  Image img = random_image(rng, 3, 4, 3);
  for (double& v : img.data) v = static_cast<float>(v);
  write_pfm(dir + "/a.pfm", img);
  CHECK(read_pfm(dir + "/a.pfm").data == img.data);
}

TEST_CASE("PFM layout for a single pixel") {
  const std::string bytes = encode_pfm(Image(1, 1, 3, 0.5));
  const std::string header = "PF\n1 1\n-1.0\n";
  REQUIRE(bytes.size() == header.size() + 12);
  CHECK(bytes.substr(0, header.size()) == header);
  for (int k = 0; k < 3; ++k) {
    float f;
    std::memcpy(&f, bytes.data() + header.size() + 4 * k, 4);  // little endian host
    CHECK(f == 0.5f);
  }
  CHECK(encode_pfm(Image(1, 1, 1, 0.5)).size() == std::string("Pf\n1 1\n-1.0\n").size() + 4);
}

TEST_CASE("PFM rows are stored bottom to top") {
  Image img(1, 2, 1);
  img.at(0, 0) = 1.0;
  img.at(0, 1) = 2.0;
  const std::string bytes = encode_pfm(img);
  float first;
  std::memcpy(&first, bytes.data() + bytes.size() - 8, 4);
  CHECK(first == 2.0f);
}

TEST_CASE("PFM parse errors") {
  CHECK_THROWS_AS(decode_pfm("P6\n1 1\n255\nabc"), ParseError);
  CHECK_THROWS_AS(decode_pfm("PF\n2 2\n-1.0\n1234"), ParseError);
  CHECK_THROWS_AS(decode_pfm("PF\n1 1\n0\n123456789012"), ParseError);
  CHECK_THROWS_AS(encode_pfm(Image(2, 2, 2)), ShapeMismatch);
  CHECK_THROWS_AS(read_pfm("/nonexistent/x.pfm"), IoError);
}

TEST_CASE("8-bit images quantize to the nearest level") {
  const std::string dir = temp_dir("io_pnm");
  Image img(3, 1, 3);
  img.data = {1.0, 0.0, 0.5, 2.0, -1.0, 0.25, 1.0, 1.0, 1.0};
  write_pnm(dir + "/a.ppm", img);
  const Image back = read_pnm(dir + "/a.ppm");
  CHECK(back.at(0, 0, 0) == 1.0);
  CHECK(back.at(0, 0, 1) == 0.0);
  CHECK(back.at(0, 0, 2) == doctest::Approx(128.0 / 255.0));
  CHECK(back.at(1, 0, 0) == 1.0);
  CHECK(back.at(1, 0, 1) == 0.0);
  std::ifstream in(dir + "/a.ppm", std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header == "P6");
}

TEST_CASE("DSM files round trip with their mask") {
  Rng rng(92);
  Dsm d;
  d.grid = {30.0, -81.7, -1e-5, 1e-5, 3, 4};
  d.heights = random_image(rng, 4, 3, 1, 0, 30);
  for (double& v : d.heights.data) v = static_cast<float>(v);
  d.mask = Mask(4, 3, true);
  d.mask.set(2, 1, false);
  const std::string dir = temp_dir("io_dsm");
  write_dsm(dir + "/dsm", d);
  for (const std::string& p : {dir + "/dsm", dir + "/dsm.json"}) {
    const Dsm r = read_dsm(p);
    CHECK(r.grid.rows == 3);
    CHECK(r.grid.cols == 4);
    CHECK(r.grid.dlat == d.grid.dlat);
    CHECK(r.mask.valid == d.mask.valid);
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 4; ++x)
        if (d.mask.at(x, y)) CHECK(r.heights.at(x, y) == d.heights.at(x, y));
  }
}

TEST_CASE("DSM from a nadir rendering lands one pixel per cell") {
  const SceneSpec spec = standard_scene_spec(8);
  const RpcModel rpc = make_affine_rpc(spec.source);
  const GridSpec grid = footprint_grid(rpc, 8, 8, spec.geo_ref.hei);
  Rng rng(93);
  const Image alt = random_image(rng, 8, 8, 1, 0, 30);
  const Dsm d = dsm_from_altitude(alt, rpc, grid);
  CHECK(d.mask.count() == 64);
  CHECK(d.heights.data == alt.data);

  GridSpec far = grid;
  far.lat0 += 1.0;
  CHECK_THROWS_AS(dsm_from_altitude(alt, rpc, far), EmptyOutput);
}

TEST_CASE("oblique flat DSM keeps the surface height") {
  const SceneSpec spec = standard_scene_spec(16);
  const RpcModel rpc = make_affine_rpc(spec.targets[0]);
  const Image alt(16, 16, 1, 12.3);
  const Dsm d = dsm_from_altitude(alt, rpc, footprint_grid(make_affine_rpc(spec.source), 16, 16, 0.0));
  CHECK(d.mask.count() > 128);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      if (d.mask.at(x, y)) CHECK(d.heights.at(x, y) == 12.3);
}

TEST_CASE("CSV point batches round trip") {
  const std::string dir = temp_dir("io_csv");
  GeoPointBatch g;
  g.push_back({30.000123456789012, -81.7, 15.25});
  g.push_back({29.9, -81.69999999, 0.0});
  write_geo_csv(dir + "/g.csv", g);
  const GeoPointBatch gb = read_geo_csv(dir + "/g.csv");
  CHECK(gb.lat == g.lat);
  CHECK(gb.lon == g.lon);
  CHECK(gb.hei == g.hei);

  ImagePointBatch p;
  p.push_back({1.0 / 3.0, 2.5});
  write_image_csv(dir + "/p.csv", p);
  CHECK(read_image_csv(dir + "/p.csv").samp == p.samp);

  std::ofstream(dir + "/bad.csv") << "lat,lon\n1,2\n";
  CHECK_THROWS_AS(read_geo_csv(dir + "/bad.csv"), ParseError);
  std::ofstream(dir + "/bad2.csv") << "lat,lon,hei\n1,x,2\n";
  CHECK_THROWS_AS(read_geo_csv(dir + "/bad2.csv"), ParseError);
}

TEST_CASE("scene manifests round trip") {
  const std::string dir = temp_dir("io_manifest");
  SceneManifest m;
  m.width = 16;
  m.height = 8;
  m.lr_factor = 2;
  m.pan = "pan.pfm";
  m.rpc = "src.rpc";
  m.lr_rgb = "lr.pfm";
  m.targets = {{"t0.pfm", "t0.rpc"}};
  m.h_near = 31;
  m.h_far = 0;
  m.geo_ref = {30, -81.7, 15.5};
  m.dsm_grid = GridSpec{30, -81.7, -1e-5, 1e-5, 8, 16};
  write_manifest(dir + "/manifest.json", m);
  const SceneManifest r = read_manifest(dir + "/manifest.json");
  CHECK(r.width == 16);
  CHECK(r.lr_factor == 2);
  CHECK(r.targets.size() == 1);
  CHECK(r.targets[0].rpc == "t0.rpc");
  CHECK(r.rgb.empty());
  CHECK(r.geo_ref.hei == 15.5);
  REQUIRE(r.dsm_grid.has_value());
  CHECK(r.dsm_grid->cols == 16);
  CHECK(r.resolve("pan.pfm") == dir + "/pan.pfm");
  CHECK_THROWS_AS(r.validate(), InvariantViolation);  // files do not exist

  std::ofstream(dir + "/bad.json") << R"({"schema": 2})";
  CHECK_THROWS_AS(read_manifest(dir + "/bad.json"), ValidationError);
  std::ofstream(dir + "/broken.json") << "{";
  CHECK_THROWS_AS(read_manifest(dir + "/broken.json"), ParseError);
}

}  // TEST_SUITE
