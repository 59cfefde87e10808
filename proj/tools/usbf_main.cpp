/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The usbf3d Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// usbf: simulate, beamform, measure and localize on 3D plane-wave data.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "usbf/pipeline.hpp"

namespace fs = std::filesystem;
using namespace usbf;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  int workers = 0;  // 0: use the config value
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? parse_config("") : load_config(c.config_path);
  if (c.workers > 0) cfg.workers = c.workers;
  return cfg;
}

std::string out_path(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

RunManifest manifest_for(const std::string& command, const RunConfig& cfg) {
  RunManifest m;
  m.command = command;
  m.config_hash = fnv1a_hex(cfg.source_text);
  m.seed = cfg.seed;
  m.tool_version = USBF_VERSION;
  return m;
}

int cmd_simulate(const Common& c) {
  const RunConfig cfg = load(c);
  RunManifest man = manifest_for("simulate", cfg);
  Stopwatch sw;
  const auto sim = simulate_scene(cfg, cfg.workers);
  man.stage_seconds.emplace_back("simulate", sw.lap());
  const auto seq_path = out_path(c, "sequence.usbf");
  const auto gt_path = out_path(c, "ground_truth.csv");
  write_channel_sequence(seq_path, sim.sequence);
  write_ground_truth_csv(gt_path, sim.truth);
  man.stage_seconds.emplace_back("write", sw.lap());
  man.outputs = {seq_path, seq_path + ".json", gt_path};
  write_manifest(out_path(c, "manifest_simulate.json"), man);
  std::printf("simulated %zu frame(s), %zu channels, %zu samples -> %s\n", sim.sequence.frames.size(),
              sim.sequence.frames.empty() ? std::size_t{0} : sim.sequence.frames.front().channels,
              sim.sequence.frames.empty() ? std::size_t{0} : sim.sequence.frames.front().samples,
              seq_path.c_str());
  return 0;
}

int cmd_beamform(const Common& c, const std::string& input, const std::string& method_name_arg) {
  RunConfig cfg = load(c);
  if (!method_name_arg.empty()) cfg.kind.method = parse_method(method_name_arg);
  cfg.kind.validate();
  const VoxelGrid& grid = cfg.require_grid();
  RunManifest man = manifest_for("beamform", cfg);
  Stopwatch sw;
  const ChannelSequence seq = read_channel_sequence(input);
  const AcquisitionConfig acq = acquisition_for(cfg, seq);
  man.stage_seconds.emplace_back("read", sw.lap());
  BeamformOptions opts;
  opts.workers = cfg.workers;
  const auto res = beamform_volume(seq, grid, cfg.kind, cfg.geom, acq, opts);
  man.stage_seconds.emplace_back("beamform", sw.lap());
  const std::string m(method_name(cfg.kind.method));
  const auto vol_path = out_path(c, "volumes_" + m + ".usbf");
  const auto log_path = out_path(c, "timing_" + m + ".csv");
  write_volumes(vol_path, res.volumes, res.frame_seconds);
  write_timing_log(log_path, res.frame_seconds);
  man.outputs = {vol_path, vol_path + ".json", log_path};
  write_manifest(out_path(c, "manifest_beamform_" + m + ".json"), man);
  double total = 0.0;
  for (double s : res.frame_seconds) total += s;
  std::printf("%s: %zu volume(s), %.3f s per frame -> %s\n", m.c_str(), res.volumes.size(),
              res.frame_seconds.empty() ? 0.0 : total / static_cast<double>(res.frame_seconds.size()),
              vol_path.c_str());
  return 0;
}

int cmd_metrics(const Common& c, const std::vector<std::string>& volumes, const std::string& truth_path,
                std::size_t frame) {
  const auto truth = read_ground_truth_csv(truth_path);
  const Scene scene = scene_from_truth(truth, frame);
  if (scene.empty()) throw InvalidArgument("ground truth has no scatterers in frame " + std::to_string(frame));
  std::vector<ReportRow> rows;
  for (const auto& path : volumes) {
    const auto vols = read_volumes(path);
    if (frame >= vols.size()) throw InvalidArgument(path + " has no frame " + std::to_string(frame));
    rows.push_back({std::string(method_name(vols[frame].kind.method)),
                    compute_psf_metrics(vols[frame], scene, read_mean_frame_seconds(path))});
  }
  const std::string text = format_report("PSF metrics, frame " + std::to_string(frame), rows);
  std::cout << text;
  std::ofstream(out_path(c, "report.txt")) << text;
  std::ofstream(out_path(c, "report.csv")) << report_csv(rows);
  return 0;
}

int cmd_srus(const Common& c, const std::string& input, const std::vector<std::string>& methods) {
  const RunConfig cfg = load(c);
  const VoxelGrid& grid = cfg.require_grid();
  RunManifest man = manifest_for("srus", cfg);
  Stopwatch sw;
  const ChannelSequence seq = read_channel_sequence(input);
  const AcquisitionConfig acq = acquisition_for(cfg, seq);
  man.stage_seconds.emplace_back("read", sw.lap());
  std::vector<Method> list;
  for (const auto& m : methods) list.push_back(parse_method(m));
  if (list.empty()) list.push_back(cfg.kind.method);
  for (Method m : list) {
    const SrusResult r = run_srus(seq, grid, cfg.srus_config(m), cfg.geom, acq);
    const std::string name(method_name(m));
    man.stage_seconds.emplace_back("srus_" + name, sw.lap());
    const auto ev_path = out_path(c, "events_" + name + ".csv");
    const auto dm_path = out_path(c, "density_" + name + ".usbf");
    write_events_csv(ev_path, r.events);
    write_density(dm_path, r.density);
    man.outputs.insert(man.outputs.end(), {ev_path, dm_path, dm_path + ".json"});
    std::printf("%s: %zu event(s), %zu border-discarded maxima, %zu outside the density grid\n",
                name.c_str(), r.events.size(), r.stats.border_discarded, r.density.dropped);
  }
  write_manifest(out_path(c, "manifest_srus.json"), man);
  return 0;
}

int cmd_calibrate(const Common& c, const std::vector<std::string>& volumes, std::size_t target,
                  double lo_db, double hi_db, double tolerance) {
  const RunConfig cfg = load(c);
  int status = 0;
  std::string yaml = "thresholds_db:\n";
  std::printf("%-6s %-14s %-8s %s\n", "method", "threshold_db", "events", "status");
  for (const auto& path : volumes) {
    auto vols = read_volumes(path);
    if (vols.empty()) throw InvalidArgument(path + " holds no volumes");
    normalize_to_sequence_max(vols);
    TemplateOptions topt = cfg.srus.templ;
    const VoxelGrid& g = vols.front().grid;
    if (!topt.depth) topt.depth = g.origin().z + 0.5 * static_cast<double>(g.nz() - 1) * g.spacing().z;
    topt.workers = cfg.workers;
    const Template3D tmpl = estimate_psf_template(vols.front().kind, cfg.geom, cfg.acq, g.spacing(), topt);
    const auto r = calibrate_threshold(vols, tmpl, target, cfg.srus.detect, cfg.workers, lo_db, hi_db, tolerance);
    const std::string name(method_name(vols.front().kind.method));
    if (r.converged) {
      std::printf("%-6s %-14.3f %-8zu ok\n", name.c_str(), r.threshold_db, r.count);
      yaml += "  " + name + ": " + std::to_string(r.threshold_db) + "\n";
    } else {
      std::printf("%-6s %-14.3f %-8zu not reached; %zu events at %.1f dB, %zu at %.1f dB\n", name.c_str(),
                  r.threshold_db, r.count, r.count_at_lo, r.bracket_lo_db, r.count_at_hi, r.bracket_hi_db);
      status = 1;
    }
  }
  std::ofstream(out_path(c, "thresholds.yaml")) << yaml;
  return status;
}

int cmd_mip(const std::string& input, const std::string& output, std::size_t frame, const std::string& axis_name,
            double db_range) {
  Axis axis = Axis::kZ;
  if (axis_name == "x") axis = Axis::kX;
  else if (axis_name == "y") axis = Axis::kY;
  else if (axis_name != "z") throw InvalidArgument("axis must be x, y or z");
  const FileHeader h = read_header(input);
  Image2D img;
  if (h.kind == DataKind::kDensityMap) {
    const auto d = read_density(input);
    img = mip(d.grid, d.counts, axis);
  } else if (h.kind == DataKind::kVolumeSequence) {
    const auto vols = read_volumes(input);
    if (frame >= vols.size()) throw InvalidArgument(input + " has no frame " + std::to_string(frame));
    img = mip(vols[frame], axis);
  } else {
    throw InvalidArgument("mip needs a volume or density file");
  }
  write_pgm(output, img, db_range);
  std::printf("%zu x %zu MIP -> %s\n", img.width, img.height, output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"usbf: 3D plane-wave beamforming, PSF metrics and super-resolution localization"};
  app.set_version_flag("--version", std::string(USBF_VERSION));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("-c,--config", common.config_path, "YAML run configuration");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", common.out_dir, "output directory");
    sub->add_option("-w,--workers", common.workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  };

  auto* sim = app.add_subcommand("simulate", "simulate channel data and ground truth from a config");
  add_common(sim, true);

  std::string input, method;
  auto* bf = app.add_subcommand("beamform", "beamform a channel sequence onto the config grid");
  add_common(bf, true);
  bf->add_option("-i,--input", input, "channel sequence (.usbf)")->required()->check(CLI::ExistingFile);
  bf->add_option("-m,--method", method, "das, pdas, cf, cvn or cv (default: config)");

  std::vector<std::string> volume_files;
  std::string truth;
  std::size_t frame = 0;
  auto* met = app.add_subcommand("metrics", "FWHM, SPSMR, CPSMR, max-PSMR and SNR report");
  add_common(met, false);
  met->add_option("-v,--volumes", volume_files, "volume files, one per beamformer")->required()->check(CLI::ExistingFile);
  met->add_option("-g,--ground-truth", truth, "ground-truth CSV")->required()->check(CLI::ExistingFile);
  met->add_option("-f,--frame", frame, "frame to evaluate");

  std::vector<std::string> methods;
  auto* sr = app.add_subcommand("srus", "clutter filter, beamform, localize and accumulate density");
  add_common(sr, true);
  sr->add_option("-i,--input", input, "channel sequence (.usbf)")->required()->check(CLI::ExistingFile);
  sr->add_option("-m,--method", methods, "beamformer(s); default: config");

  std::size_t target = 0;
  double lo_db = -60.0, hi_db = 0.0, tolerance = 0.1;
  auto* cal = app.add_subcommand("calibrate-thresholds", "bisect per-method thresholds to a target event count");
  add_common(cal, true);
  cal->add_option("-v,--volumes", volume_files, "volume files, one per beamformer (normalized to their sequence max on load)")->required()->check(CLI::ExistingFile);
  cal->add_option("-t,--target", target, "target number of localized events")->required();
  cal->add_option("--lo", lo_db, "lowest threshold tried (dB)");
  cal->add_option("--hi", hi_db, "highest threshold tried (dB)");
  cal->add_option("--tolerance", tolerance, "relative count tolerance");

  std::string output, axis = "z";
  double db_range = 40.0;
  auto* mp = app.add_subcommand("mip", "maximum intensity projection to an 8-bit PGM");
  mp->add_option("-i,--input", input, "volume or density file")->required()->check(CLI::ExistingFile);
  mp->add_option("-o,--output", output, "PGM path")->required();
  mp->add_option("-f,--frame", frame, "frame of a volume sequence");
  mp->add_option("-a,--axis", axis, "projection axis: x, y or z")->check(CLI::IsMember({"x", "y", "z"}));
  mp->add_option("--db-range", db_range, "display range below the maximum (dB)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sim) return cmd_simulate(common);
    if (*bf) return cmd_beamform(common, input, method);
    if (*met) return cmd_metrics(common, volume_files, truth, frame);
    if (*sr) return cmd_srus(common, input, methods);
    if (*cal) return cmd_calibrate(common, volume_files, target, lo_db, hi_db, tolerance);
    if (*mp) return cmd_mip(input, output, frame, axis, db_range);
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return kExitCapacity;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const WidthUnbounded& e) {
    std::fprintf(stderr, "error: %s (grid too small for this PSF?)\n", e.what());
    return kExitValidation;
  } catch (const InvalidRegion& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const InvalidConfiguration& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
