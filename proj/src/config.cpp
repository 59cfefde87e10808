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

#include "usbf/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace usbf {
namespace {

class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    present_ = node_.IsDefined() && !node_.IsNull();
    if (present_ && !node_.IsMap()) fail("", "expected a mapping");
  }

  bool present() const { return present_; }
  bool has(const std::string& key) const { return present_ && node_[key].IsDefined() && !node_[key].IsNull(); }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    fail_at(key.empty() || !has(key) ? node_ : YAML::Node(node_[key]), field(key), what);
  }

  [[noreturn]] void fail_at(const YAML::Node& n, const std::string& field_path,
                            const std::string& what) const {
    std::ostringstream os;
    os << source_;
    if (n.IsDefined() && n.Mark().line >= 0) os << ':' << n.Mark().line + 1;
    os << ": " << (field_path.empty() ? std::string("<root>") : field_path) << ": " << what;
    throw ConfigError(os.str());
  }

  std::string field(const std::string& key) const {
    if (key.empty()) return path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void allow(std::initializer_list<const char*> keys) const {
    if (!present_) return;
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const auto k = kv.first.as<std::string>();
      if (!ok.contains(k)) fail_at(kv.first, field(k), "unknown key");
    }
  }

  Section sub(const std::string& key) const {
    return Section(present_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined), field(key), source_);
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    try {
      const double v = node_[key].as<double>();
      if (!std::isfinite(v)) fail(key, "must be finite");
      return v;
    } catch (const YAML::BadConversion&) {
      fail(key, "expected a number");
    }
  }

  double positive(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 0) const {
    if (!has(key)) return fallback;
    long long v = 0;
    try {
      v = node_[key].as<long long>();
    } catch (const YAML::BadConversion&) {
      fail(key, "expected an integer");
    }
    if (v < static_cast<long long>(min)) fail(key, "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    try {
      return node_[key].as<bool>();
    } catch (const YAML::BadConversion&) {
      fail(key, "expected true or false");
    }
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!node_[key].IsScalar()) fail(key, "expected a string");
    return node_[key].as<std::string>();
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    const YAML::Node n = node_[key];
    if (!n.IsSequence() || n.size() != 3) fail(key, "expected a list of three numbers");
    try {
      return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
    } catch (const YAML::BadConversion&) {
      fail(key, "expected a list of three numbers");
    }
  }

  Index3 dims3(const std::string& key) const {
    const YAML::Node n = node_[key];
    if (!n.IsSequence() || n.size() != 3) fail(key, "expected a list of three positive integers");
    try {
      const long long a = n[0].as<long long>(), b = n[1].as<long long>(), c = n[2].as<long long>();
      if (a < 1 || b < 1 || c < 1) fail(key, "dimensions must be at least 1");
      return {static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(c)};
    } catch (const YAML::BadConversion&) {
      fail(key, "expected a list of three positive integers");
    }
  }

  const YAML::Node& node() const { return node_; }
  const std::string& source() const { return source_; }

 private:
  YAML::Node node_;
  bool present_ = false;
  std::string path_;
  const std::string& source_;
};

Method method_field(const Section& s, const std::string& key, Method fallback) {
  if (!s.has(key)) return fallback;
  try {
    return parse_method(s.text(key, ""));
  } catch (const InvalidArgument& e) {
    s.fail(key, e.what());
  }
}

void parse_probe(const Section& s, RunConfig& cfg) {
  s.allow({"rows", "cols", "pitch_x", "pitch_y", "element_width", "element_height", "center_frequency"});
  if (!s.present()) return;
  const ArrayGeometry& d = cfg.geom;
  const std::size_t rows = s.count("rows", d.rows(), 1);
  const std::size_t cols = s.count("cols", d.cols(), 1);
  const double px = s.positive("pitch_x", d.pitch_x());
  const double py = s.positive("pitch_y", d.pitch_y());
  const double w = s.positive("element_width", px);
  const double h = s.positive("element_height", py);
  const double f0 = s.positive("center_frequency", d.center_frequency());
  cfg.geom = ArrayGeometry(rows, cols, px, py, w, h, f0);
}

void parse_acquisition(const Section& s, RunConfig& cfg) {
  s.allow({"speed_of_sound", "sampling_frequency", "pulse_cycles", "tukey_alpha", "frame_rate",
           "transmit_model", "record"});
  AcquisitionConfig a = default_acquisition(cfg.geom);
  a.speed_of_sound = s.positive("speed_of_sound", a.speed_of_sound);
  a.sampling_frequency = s.positive("sampling_frequency", a.sampling_frequency);
  if (a.sampling_frequency < 4.0 * cfg.geom.center_frequency())
    s.fail("sampling_frequency", "must be at least 4x the center frequency");
  a.pulse_cycles = s.count("pulse_cycles", a.pulse_cycles, 1);
  const double alpha = s.number("tukey_alpha", 0.5);
  if (alpha < 0.0 || alpha > 1.0) s.fail("tukey_alpha", "must lie in [0, 1]");
  a.transmit_apodization = tukey_apodization(cfg.geom.rows(), cfg.geom.cols(), alpha);
  a.frame_rate = s.positive("frame_rate", a.frame_rate);
  const std::string tm = s.text("transmit_model", "taper");
  if (tm == "taper")
    a.transmit_model = TransmitModel::kTaper;
  else if (tm == "element_sum")
    a.transmit_model = TransmitModel::kElementSum;
  else
    s.fail("transmit_model", "expected taper or element_sum");
  const Section r = s.sub("record");
  r.allow({"z_min", "z_max", "half_width"});
  if (r.present()) {
    RecordWindow w;
    w.z_min = r.positive("z_min", 0.0);
    w.z_max = r.positive("z_max", 0.0);
    if (!(w.z_max > w.z_min)) r.fail("z_max", "must exceed z_min");
    w.half_width = r.number("half_width", 0.0);
    if (w.half_width < 0.0) r.fail("half_width", "must be non-negative");
    cfg.record = w;
  }
  cfg.acq = a;
}

void parse_scene(const Section& s, RunConfig& cfg) {
  s.allow({"type", "n_frames", "scatterers", "velocity", "tubes"});
  const std::string type = s.text("type", "five_scatterers");
  SceneConfig& sc = cfg.scene;
  sc.n_frames = s.count("n_frames", 1, 0);
  if (type == "five_scatterers") {
    sc.type = SceneType::kFiveScatterers;
    sc.points = five_scatterer_scene();
  } else if (type == "points") {
    sc.type = SceneType::kPoints;
    if (!s.has("scatterers") || !s.node()["scatterers"].IsSequence())
      s.fail("scatterers", "points scene needs a list of scatterers");
    const YAML::Node list = s.node()["scatterers"];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Section e(list[i], s.field("scatterers") + "[" + std::to_string(i) + "]", s.source());
      e.allow({"position", "coefficient"});
      if (!e.has("position")) e.fail("", "missing position");
      Scatterer sct{e.vec3("position", {}), e.number("coefficient", 1.0)};
      if (!(sct.position.z > 0.0)) e.fail("position", "z must be positive (in front of the array)");
      sc.points.scatterers.push_back(sct);
    }
  } else if (type == "tubes") {
    sc.type = SceneType::kTubes;
  } else {
    s.fail("type", "expected five_scatterers, points or tubes");
  }
  if (s.has("velocity")) {
    if (sc.type == SceneType::kTubes) s.fail("velocity", "not used by the tube scene");
    const Vec3 v = s.vec3("velocity", {});
    const double rate = cfg.acq.frame_rate;
    sc.points.motion = [v, rate](std::size_t k) { return (static_cast<double>(k) / rate) * v; };
  }

  const Section t = s.sub("tubes");
  t.allow({"crossing", "angle_deg", "spread_axis", "x_min", "x_max", "diameter", "bubble_rate", "speed",
           "coefficient_min", "coefficient_max", "prefill"});
  if (sc.type == SceneType::kTubes) {
    const Vec3 crossing = t.vec3("crossing", {0.0, 0.0, 20e-3});
    if (!(crossing.z > 0.0)) t.fail("crossing", "z must be positive");
    const double angle = t.number("angle_deg", 3.0);
    if (!(angle > 0.0 && angle < 90.0)) t.fail("angle_deg", "must lie in (0, 90)");
    const Vec3 spread = t.vec3("spread_axis", {0.0, 1.0, 0.0});
    if (!(norm(spread) > 0.0) || spread.x != 0.0) t.fail("spread_axis", "must be a nonzero vector with x = 0");
    const double x_min = t.number("x_min", -6e-3);
    const double x_max = t.number("x_max", 6e-3);
    if (!(x_max > x_min)) t.fail("x_max", "must exceed x_min");
    const double diameter = t.positive("diameter", 200e-6);
    TubePhantomConfig tp = crossing_tubes(crossing, angle, spread, x_min, x_max, diameter);
    tp.bubble_rate = t.number("bubble_rate", tp.bubble_rate);
    if (tp.bubble_rate < 0.0) t.fail("bubble_rate", "must be non-negative");
    tp.speed = t.number("speed", tp.speed);
    if (tp.speed < 0.0) t.fail("speed", "must be non-negative");
    tp.coefficient_min = t.positive("coefficient_min", tp.coefficient_min);
    tp.coefficient_max = t.positive("coefficient_max", tp.coefficient_max);
    if (tp.coefficient_max < tp.coefficient_min) t.fail("coefficient_max", "must be at least coefficient_min");
    tp.prefill = t.flag("prefill", tp.prefill);
    sc.tubes = tp;
  } else if (t.present()) {
    t.fail("", "only used when type is tubes");
  }
  if (sc.type == SceneType::kTubes && sc.n_frames == 0) s.fail("n_frames", "must be at least 1");
}

void parse_grid(const Section& s, RunConfig& cfg) {
  if (!s.present()) return;
  s.allow({"center", "spacing", "dims", "lo", "hi"});
  if (!s.has("spacing")) s.fail("", "missing spacing");
  const Vec3 sp = s.vec3("spacing", {});
  if (!(sp.x > 0.0 && sp.y > 0.0 && sp.z > 0.0)) s.fail("spacing", "all spacings must be positive");
  if (s.has("dims")) {
    if (!s.has("center")) s.fail("", "dims needs a center");
    cfg.grid = VoxelGrid::centered(s.vec3("center", {}), sp, s.dims3("dims"));
  } else if (s.has("lo") && s.has("hi")) {
    const Vec3 lo = s.vec3("lo", {});
    const Vec3 hi = s.vec3("hi", {});
    if (!(hi.x >= lo.x && hi.y >= lo.y && hi.z >= lo.z)) s.fail("hi", "must not be below lo");
    cfg.grid = VoxelGrid::spanning(lo, hi, sp);
  } else {
    s.fail("", "give either center + dims or lo + hi");
  }
  if (!(cfg.grid->origin().z > 0.0)) s.fail("", "grid must lie in front of the array (z > 0)");
}

void parse_beamformer(const Section& s, RunConfig& cfg) {
  s.allow({"method", "p", "epsilon", "cf_normalized", "bandwidth", "fine_dz", "interpolation"});
  BeamformerKind& k = cfg.kind;
  k.method = method_field(s, "method", k.method);
  k.p = s.number("p", k.p);
  if (k.p < 1.0) s.fail("p", "must be at least 1");
  k.epsilon = s.positive("epsilon", k.epsilon);
  k.cf_normalized = s.flag("cf_normalized", k.cf_normalized);
  k.bandwidth = s.positive("bandwidth", k.bandwidth);
  if (k.bandwidth >= 2.0) s.fail("bandwidth", "must be below 2");
  k.fine_dz = s.positive("fine_dz", k.fine_dz);
  const std::string interp = s.text("interpolation", "phase_rotated");
  if (interp == "linear")
    k.interpolation = Interpolation::kLinear;
  else if (interp == "phase_rotated")
    k.interpolation = Interpolation::kPhaseRotated;
  else
    s.fail("interpolation", "expected linear or phase_rotated");
}

void parse_srus(const Section& s, RunConfig& cfg) {
  s.allow({"clutter", "thresholds_db", "min_coef", "window", "upsample", "template"});
  SrusSettings& r = cfg.srus;
  const Section c = s.sub("clutter");
  c.allow({"enabled", "low_cutoff", "high_cutoff"});
  r.clutter_enabled = c.flag("enabled", r.clutter_enabled);
  r.clutter.low_cutoff = c.count("low_cutoff", r.clutter.low_cutoff, 0);
  if (c.has("high_cutoff") && !c.node()["high_cutoff"].IsNull())
    r.clutter.high_cutoff = c.count("high_cutoff", 0, 0);
  const Section th = s.sub("thresholds_db");
  if (th.present()) {
    for (const auto& kv : th.node()) {
      const auto key = kv.first.as<std::string>();
      Method m;
      try {
        m = parse_method(key);
      } catch (const InvalidArgument& e) {
        th.fail_at(kv.first, th.field(key), e.what());
      }
      r.threshold_db[m] = th.number(key, 0.0);
    }
  }
  r.detect.min_coef = s.number("min_coef", r.detect.min_coef);
  if (r.detect.min_coef < -1.0 || r.detect.min_coef > 1.0) s.fail("min_coef", "must lie in [-1, 1]");
  r.detect.window = s.count("window", r.detect.window, 3);
  if (r.detect.window % 2 == 0) s.fail("window", "must be odd");
  r.detect.upsample = s.count("upsample", r.detect.upsample, 1);
  const Section t = s.sub("template");
  t.allow({"depth", "support_db", "max_half_extent"});
  if (t.has("depth")) r.templ.depth = t.positive("depth", 0.0);
  r.templ.support_db = t.number("support_db", r.templ.support_db);
  if (r.templ.support_db >= 0.0) t.fail("support_db", "must be negative");
  r.templ.max_half_extent = t.vec3("max_half_extent", r.templ.max_half_extent);
  const Vec3& e = r.templ.max_half_extent;
  if (!(e.x > 0.0 && e.y > 0.0 && e.z > 0.0)) t.fail("max_half_extent", "must be positive");
}

}  // namespace

SrusConfig RunConfig::srus_config(Method method) const {
  SrusConfig c;
  c.kind = kind;
  c.kind.method = method;
  c.clutter = srus.clutter;
  c.apply_clutter_filter = srus.clutter_enabled;
  const auto it = srus.threshold_db.find(method);
  c.threshold_db = it != srus.threshold_db.end() ? it->second : -20.0;
  c.detect = srus.detect;
  c.templ = srus.templ;
  c.workers = workers;
  return c;
}

const VoxelGrid& RunConfig::require_grid() const {
  if (!grid) throw ConfigError("config has no grid section");
  return *grid;
}

RunConfig parse_config(const std::string& yaml_text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  RunConfig cfg;
  cfg.source_text = yaml_text;
  if (!root || root.IsNull()) return cfg;
  const Section top(root, "", source);
  top.allow({"seed", "workers", "probe", "acquisition", "scene", "noise", "grid", "beamformer", "srus",
             "output"});
  if (top.has("seed")) {
    try {
      cfg.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::BadConversion&) {
      top.fail("seed", "expected a non-negative integer");
    }
  }
  cfg.workers = static_cast<int>(top.count("workers", 1, 1));
  parse_probe(top.sub("probe"), cfg);
  parse_acquisition(top.sub("acquisition"), cfg);
  parse_scene(top.sub("scene"), cfg);
  const Section noise = top.sub("noise");
  noise.allow({"enabled", "snr_db"});
  cfg.noise.enabled = noise.flag("enabled", noise.present());
  cfg.noise.snr_db = noise.number("snr_db", cfg.noise.snr_db);
  parse_grid(top.sub("grid"), cfg);
  parse_beamformer(top.sub("beamformer"), cfg);
  parse_srus(top.sub("srus"), cfg);
  const Section out = top.sub("output");
  out.allow({"db_range"});
  cfg.db_range = out.positive("db_range", cfg.db_range);

  try {
    validate_acquisition(cfg.acq, cfg.geom);
  } catch (const InvalidArgument& e) {
    throw ConfigError(source + ": acquisition: " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace usbf
