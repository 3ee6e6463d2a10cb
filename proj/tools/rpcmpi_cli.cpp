// Copyright 2026 The rpcmpi Authors
// SPDX-License-Identifier: Apache-2.0

// rpcmpi command-line interface. Exit codes: 0 success, 1 validation or usage
// error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rpcmpi/error.hpp"
#include "rpcmpi/fit.hpp"
#include "rpcmpi/io.hpp"
#include "rpcmpi/mpi.hpp"
#include "rpcmpi/objective.hpp"
#include "rpcmpi/parallel.hpp"
#include "rpcmpi/render.hpp"
#include "rpcmpi/rpc.hpp"
#include "rpcmpi/synth.hpp"
#include "rpcmpi/warp.hpp"

namespace fs = std::filesystem;
using namespace rpcmpi;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_render(const std::string& dir, const RenderOutput& r) {
  fs::create_directories(dir);
  write_pfm(dir + "/rgb.pfm", r.rgb);
  write_pfm(dir + "/pan.pfm", r.pan);
  write_pfm(dir + "/altitude.pfm", r.altitude);
  write_pnm(dir + "/rgb.ppm", r.rgb);
}

Image mask_image(const Mask& m) {
  Image img(m.width, m.height, 1);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) img.at(x, y) = m.at(x, y) ? 1.0 : 0.0;
  return img;
}

Mask mask_from_image(const Image& img) {
  if (img.channels != 1) throw ShapeMismatch("mask image must have one channel");
  Mask m(img.width, img.height, false);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) m.set(x, y, img.at(x, y) > 0.5);
  return m;
}

bool is_dsm_path(const std::string& path) {
  const std::string ext = fs::path(path).extension().string();
  return ext == ".json" || ext.empty();
}

struct Report {
  std::vector<std::pair<std::string, double>> entries;

  void add(const std::string& key, double v) { entries.emplace_back(key, v); }
  void print(bool as_json) const {
    if (as_json) {
      nlohmann::ordered_json j;
      for (const auto& [k, v] : entries) j[k] = v;
      std::cout << j.dump(2) << '\n';
    } else {
      for (const auto& [k, v] : entries) std::cout << k << '=' << num(v) << '\n';
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rpcmpi: RPC cameras, multiplane images and per-scene fitting"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 1;
  std::uint64_t seed = 0;
  bool deterministic = false;
  app.add_option("--threads", threads, "Worker threads for pixel-parallel kernels")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Random seed");
  app.add_flag("--deterministic", deterministic, "Single-threaded, bit-reproducible execution");

  // rpc project | localize
  auto* rpc_cmd = app.add_subcommand("rpc", "Batch RPC projection and localization");
  rpc_cmd->require_subcommand(1);
  std::string rpc_path, in_csv, out_csv;
  auto* project_cmd = rpc_cmd->add_subcommand("project", "lat,lon,hei CSV -> samp,line CSV");
  auto* localize_cmd = rpc_cmd->add_subcommand("localize", "samp,line,hei CSV -> lat,lon,hei CSV");
  for (auto* c : {project_cmd, localize_cmd}) {
    c->add_option("--rpc", rpc_path, "RPC text file")->required();
    c->add_option("--in", in_csv, "Input CSV")->required();
    c->add_option("--out", out_csv, "Output CSV")->required();
  }

  // render
  auto* render_cmd = app.add_subcommand("render", "Render an MPI in the source view of a manifest");
  std::string manifest_path, mpi_path, out_dir;
  render_cmd->add_option("--manifest", manifest_path)->required();
  render_cmd->add_option("--mpi", mpi_path)->required();
  render_cmd->add_option("--out-dir", out_dir)->required();

  // warp
  auto* warp_cmd = app.add_subcommand("warp", "Warp a source MPI into a target view and render it");
  std::string target_rpc;
  int tgt_width = 0, tgt_height = 0;
  warp_cmd->add_option("--manifest", manifest_path)->required();
  warp_cmd->add_option("--mpi", mpi_path)->required();
  warp_cmd->add_option("--target-rpc", target_rpc)->required();
  warp_cmd->add_option("--out-dir", out_dir)->required();
  warp_cmd->add_option("--width", tgt_width, "Target width (default: source width)");
  warp_cmd->add_option("--height", tgt_height, "Target height (default: source height)");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit an MPI to a scene");
  std::string config_path, preset = "default";
  int iterations = 0;
  double learning_rate = 0.0;
  fit_cmd->add_option("--manifest", manifest_path)->required();
  fit_cmd->add_option("--out-dir", out_dir)->required();
  fit_cmd->add_option("--config", config_path, "JSON fit configuration");
  fit_cmd->add_option("--preset", preset, "Base configuration")->check(CLI::IsMember({"default", "stereo"}));
  fit_cmd->add_option("--iterations", iterations)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--lr", learning_rate)->check(CLI::PositiveNumber);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Compare a prediction with ground truth");
  std::string pred_path, truth_path, mask_path;
  bool as_json = false;
  eval_cmd->add_option("--pred", pred_path, "PFM image or DSM (.json)")->required();
  eval_cmd->add_option("--truth", truth_path, "PFM image or DSM (.json)")->required();
  eval_cmd->add_option("--mask", mask_path, "Single-channel PFM validity mask for images");
  eval_cmd->add_flag("--json", as_json, "Emit JSON instead of key=value lines");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic stereo scene");
  std::string kind = "flat";
  int size = 64, supersample = 4;
  synth_cmd->add_option("--kind", kind)->check(CLI::IsMember({"flat", "ramp", "hill"}));
  synth_cmd->add_option("--out-dir", out_dir)->required();
  synth_cmd->add_option("--size", size, "Width and height in pixels")->check(CLI::Range(8, 4096));
  synth_cmd->add_option("--supersample", supersample)->check(CLI::Range(1, 16));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    set_thread_count(deterministic ? 1 : threads);

    if (*rpc_cmd) {
      const RpcModel rpc = read_rpc_file(rpc_path);
      if (*project_cmd) {
        write_image_csv(out_csv, project(rpc, read_geo_csv(in_csv)));
      } else {
        std::vector<double> hei;
        const ImagePointBatch pts = read_image_height_csv(in_csv, hei);
        write_geo_csv(out_csv, localize(rpc, pts, hei));
      }
    } else if (*render_cmd) {
      const SceneManifest m = read_manifest(manifest_path);
      const Mpi mpi = read_mpi(mpi_path);
      write_render(out_dir, render_view(mpi, read_rpc_file(m.resolve(m.rpc)), m.geo_ref));
    } else if (*warp_cmd) {
      const SceneManifest m = read_manifest(manifest_path);
      const Mpi mpi = read_mpi(mpi_path);
      const WarpResult w = warp_src_to_tgt(mpi, read_rpc_file(m.resolve(m.rpc)), read_rpc_file(target_rpc),
                                           m.geo_ref, tgt_width > 0 ? tgt_width : mpi.width,
                                           tgt_height > 0 ? tgt_height : mpi.height);
      write_render(out_dir, w.render);
      write_pfm(out_dir + "/mask.pfm", mask_image(w.mask));
    } else if (*fit_cmd) {
      const SceneManifest m = read_manifest(manifest_path);
      FitConfig config = preset == "stereo" ? FitConfig::stereo_preset() : FitConfig{};
      config.seed = seed;
      if (!config_path.empty()) config = parse_fit_config(read_text(config_path), config);
      if (iterations > 0) config.iterations = iterations;
      if (learning_rate > 0.0) config.learning_rate = learning_rate;
      const FitScene scene = load_scene(m);
      const FitTrace trace = fit(scene, config);

      fs::create_directories(out_dir);
      write_mpi(out_dir + "/mpi.bin", trace.mpi);
      write_render(out_dir, trace.render);
      write_text(out_dir + "/trace.csv", trace_csv(trace));
      const GridSpec grid = m.dsm_grid ? *m.dsm_grid : footprint_grid(scene.src_rpc, m.width, m.height, m.geo_ref.hei);
      const Dsm dsm = dsm_from_altitude(trace.render, scene.src_rpc, grid);
      write_dsm(out_dir + "/dsm", dsm);

      Report r;
      r.add("iterations", static_cast<double>(trace.history.size()));
      r.add("total", trace.history.back().total);
      r.add("psnr_src", trace.psnr_src.back());
      if (!m.dsm_truth.empty()) {
        const Dsm truth = read_dsm(m.resolve(m.dsm_truth));
        const Mask overlap = dsm_overlap(dsm, truth);
        r.add("dsm_mae", mae(dsm.heights, truth.heights, overlap));
        r.add("dsm_me", me(dsm.heights, truth.heights, overlap));
      }
      r.print(false);
    } else if (*eval_cmd) {
      Report r;
      if (is_dsm_path(pred_path) && is_dsm_path(truth_path)) {
        const Dsm pred = read_dsm(pred_path);
        const Dsm truth = read_dsm(truth_path);
        const Mask overlap = dsm_overlap(pred, truth);
        r.add("mae", mae(pred.heights, truth.heights, overlap));
        r.add("me", me(pred.heights, truth.heights, overlap));
      } else {
        const Image pred = read_pfm(pred_path);
        const Image truth = read_pfm(truth_path);
        if (!pred.same_shape(truth)) throw ShapeMismatch("prediction and truth shapes differ");
        const Mask mask = mask_path.empty() ? Mask(pred.width, pred.height, true) : mask_from_image(read_pfm(mask_path));
        r.add("psnr", psnr_masked(pred, truth, mask));
        r.add("ssim", ssim(pred, truth));
        r.add("mae", mae(pred, truth, mask));
        r.add("me", me(pred, truth, mask));
      }
      r.print(as_json);
    } else if (*synth_cmd) {
      SceneSpec spec = standard_scene_spec(size);
      spec.supersample = supersample;
      const std::uint64_t texture_seed = seed == 0 ? 1 : seed;
      const SyntheticSurface surface = kind == "ramp"   ? standard_ramp_surface(spec, texture_seed)
                                       : kind == "hill" ? standard_hill_surface(spec, texture_seed)
                                                        : standard_flat_surface(spec, texture_seed);
      make_scene(surface, spec, out_dir);
      std::cout << "manifest=" << (fs::path(out_dir) / "manifest.json").string() << '\n';
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
