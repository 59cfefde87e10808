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

#include "usbf/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "usbf/errors.hpp"

namespace usbf {
namespace {

constexpr char kMagic[4] = {'U', 'S', 'B', 'F'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("truncated container header");
  return to_little(v);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  return is;
}

void write_header(std::ostream& os, const FileHeader& h) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(h.kind));
  for (auto d : h.dims) put<std::uint64_t>(os, d);
  put(os, h.sampling_frequency);
  put(os, h.t0);
  put(os, h.frame_rate);
  for (double v : {h.origin.x, h.origin.y, h.origin.z, h.spacing.x, h.spacing.y, h.spacing.z}) put(os, v);
}

FileHeader parse_header(std::istream& is, const std::string& path) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw InvalidArgument(path + " is not a usbf container");
  const auto version = get<std::uint32_t>(is);
  if (version != kFormatVersion)
    throw InvalidArgument(path + ": unsupported container version " + std::to_string(version));
  FileHeader h;
  const auto kind = get<std::uint32_t>(is);
  if (kind < 1 || kind > 3) throw InvalidArgument(path + ": unknown data kind " + std::to_string(kind));
  h.kind = static_cast<DataKind>(kind);
  for (auto& d : h.dims) d = get<std::uint64_t>(is);
  h.sampling_frequency = get<double>(is);
  h.t0 = get<double>(is);
  h.frame_rate = get<double>(is);
  h.origin = {get<double>(is), get<double>(is), get<double>(is)};
  h.spacing = {get<double>(is), get<double>(is), get<double>(is)};
  return h;
}

void put_floats(std::ostream& os, std::span<const double> values) {
  std::vector<float> buf(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) buf[i] = to_little(static_cast<float>(values[i]));
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void get_floats(std::istream& is, std::span<double> values, const std::string& path) {
  std::vector<float> buf(values.size());
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!is) throw InvalidArgument(path + ": payload is shorter than the header says");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(to_little(buf[i]));
}

std::string kind_name(DataKind k) {
  switch (k) {
    case DataKind::kChannelSequence: return "channel_sequence";
    case DataKind::kVolumeSequence: return "volume_sequence";
    case DataKind::kDensityMap: return "density_map";
  }
  return "unknown";
}

nlohmann::json header_json(const FileHeader& h) {
  return {{"format", "usbf"},
          {"version", kFormatVersion},
          {"kind", kind_name(h.kind)},
          {"dims", {h.dims[0], h.dims[1], h.dims[2], h.dims[3]}},
          {"sampling_frequency", h.sampling_frequency},
          {"t0", h.t0},
          {"frame_rate", h.frame_rate},
          {"origin", {h.origin.x, h.origin.y, h.origin.z}},
          {"spacing", {h.spacing.x, h.spacing.y, h.spacing.z}},
          {"dtype", "float32"},
          {"byte_order", "little"}};
}

void write_sidecar(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path + ".json");
  if (!os) throw std::runtime_error("cannot write sidecar for " + path);
  os << j.dump(2) << '\n';
}

nlohmann::json read_sidecar(const std::string& path) {
  std::ifstream is(path + ".json");
  if (!is) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path + ".json: " + e.what());
  }
}

FileHeader expect(const std::string& path, std::istream& is, DataKind kind) {
  const FileHeader h = parse_header(is, path);
  if (h.kind != kind)
    throw InvalidArgument(path + " holds a " + kind_name(h.kind) + ", expected a " + kind_name(kind));
  return h;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(path + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

}  // namespace

FileHeader read_header(const std::string& path) {
  auto is = open_in(path);
  return parse_header(is, path);
}

void write_channel_sequence(const std::string& path, const ChannelSequence& seq) {
  seq.validate();
  FileHeader h;
  h.kind = DataKind::kChannelSequence;
  if (!seq.frames.empty()) {
    const auto& f = seq.frames.front();
    h.dims[0] = seq.frames.size();
    h.dims[1] = f.channels;
    h.dims[2] = f.samples;
    h.sampling_frequency = f.sampling_frequency;
    h.t0 = f.t0;
  }
  h.frame_rate = seq.frame_rate;
  auto os = open_out(path);
  write_header(os, h);
  for (const auto& f : seq.frames) put_floats(os, f.data);
  if (!os) throw std::runtime_error("failed writing " + path);
  write_sidecar(path, header_json(h));
}

ChannelSequence read_channel_sequence(const std::string& path) {
  auto is = open_in(path);
  const FileHeader h = expect(path, is, DataKind::kChannelSequence);
  ChannelSequence seq;
  seq.frame_rate = h.frame_rate;
  for (std::uint64_t f = 0; f < h.dims[0]; ++f) {
    ChannelFrame fr(h.dims[1], h.dims[2], h.t0, h.sampling_frequency);
    get_floats(is, fr.data, path);
    seq.frames.push_back(std::move(fr));
  }
  return seq;
}

void write_volumes(const std::string& path, std::span<const BeamformedVolume> volumes,
                   std::span<const double> frame_seconds) {
  FileHeader h;
  h.kind = DataKind::kVolumeSequence;
  nlohmann::json side;
  if (!volumes.empty()) {
    const VoxelGrid& g = volumes.front().grid;
    for (const auto& v : volumes)
      if (!(v.grid == g)) throw InvalidArgument("volumes in one file must share a grid");
    h.dims[0] = volumes.size();
    h.dims[1] = g.nx();
    h.dims[2] = g.ny();
    h.dims[3] = g.nz();
    h.origin = g.origin();
    h.spacing = g.spacing();
  }
  auto os = open_out(path);
  write_header(os, h);
  for (const auto& v : volumes) put_floats(os, v.values);
  if (!os) throw std::runtime_error("failed writing " + path);
  side = header_json(h);
  if (!volumes.empty()) {
    const auto& k = volumes.front().kind;
    side["method"] = std::string(method_name(k.method));
    side["p"] = k.p;
    side["epsilon"] = k.epsilon;
    side["cf_normalized"] = k.cf_normalized;
    side["interpolation"] = k.interpolation == Interpolation::kLinear ? "linear" : "phase_rotated";
    side["normalization"] = volumes.front().normalization;
  }
  if (!frame_seconds.empty()) {
    double total = 0.0;
    for (double t : frame_seconds) total += t;
    side["mean_frame_seconds"] = total / static_cast<double>(frame_seconds.size());
  }
  write_sidecar(path, side);
}

std::vector<BeamformedVolume> read_volumes(const std::string& path) {
  auto is = open_in(path);
  const FileHeader h = expect(path, is, DataKind::kVolumeSequence);
  const auto side = read_sidecar(path);
  BeamformerKind kind;
  if (side.contains("method")) kind.method = parse_method(side["method"].get<std::string>());
  if (side.contains("p")) kind.p = side["p"].get<double>();
  if (side.contains("epsilon")) kind.epsilon = side["epsilon"].get<double>();
  if (side.contains("cf_normalized")) kind.cf_normalized = side["cf_normalized"].get<bool>();
  if (side.contains("interpolation") && side["interpolation"] == "linear") kind.interpolation = Interpolation::kLinear;
  const double norm_factor = side.value("normalization", 1.0);
  std::vector<BeamformedVolume> out;
  if (h.dims[0] == 0) return out;
  const VoxelGrid grid(h.origin, h.spacing, {h.dims[1], h.dims[2], h.dims[3]});
  for (std::uint64_t f = 0; f < h.dims[0]; ++f) {
    BeamformedVolume v{grid, std::vector<double>(grid.size()), kind, norm_factor};
    get_floats(is, v.values, path);
    out.push_back(std::move(v));
  }
  return out;
}

double read_mean_frame_seconds(const std::string& path) {
  return read_sidecar(path).value("mean_frame_seconds", 0.0);
}

void write_density(const std::string& path, const DensityMap& map) {
  FileHeader h;
  h.kind = DataKind::kDensityMap;
  h.dims[0] = 1;
  h.dims[1] = map.grid.nx();
  h.dims[2] = map.grid.ny();
  h.dims[3] = map.grid.nz();
  h.origin = map.grid.origin();
  h.spacing = map.grid.spacing();
  auto os = open_out(path);
  write_header(os, h);
  put_floats(os, map.counts);
  if (!os) throw std::runtime_error("failed writing " + path);
  auto side = header_json(h);
  side["total_events"] = map.total();
  side["dropped_events"] = map.dropped;
  write_sidecar(path, side);
}

DensityMap read_density(const std::string& path) {
  auto is = open_in(path);
  const FileHeader h = expect(path, is, DataKind::kDensityMap);
  const VoxelGrid grid(h.origin, h.spacing, {h.dims[1], h.dims[2], h.dims[3]});
  DensityMap m{grid, std::vector<double>(grid.size()), 0};
  get_floats(is, m.counts, path);
  m.dropped = read_sidecar(path).value("dropped_events", std::size_t{0});
  return m;
}

void write_ground_truth_csv(const std::string& path, std::span<const GroundTruthRow> rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "frame,x,y,z,coefficient,tube\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.9e,%.9e,%.9e,%.6f,%d\n", r.frame, r.position.x, r.position.y,
                  r.position.z, r.coefficient, r.tube);
    os << buf;
  }
}

std::vector<GroundTruthRow> read_ground_truth_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path);
  std::string line;
  std::getline(is, line);
  std::vector<GroundTruthRow> rows;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 6) throw InvalidArgument(path + ":" + std::to_string(n) + ": expected 6 columns");
    GroundTruthRow r;
    r.frame = static_cast<std::size_t>(parse_double(c[0], path, n));
    r.position = {parse_double(c[1], path, n), parse_double(c[2], path, n), parse_double(c[3], path, n)};
    r.coefficient = parse_double(c[4], path, n);
    r.tube = static_cast<int>(parse_double(c[5], path, n));
    rows.push_back(r);
  }
  return rows;
}

void write_events_csv(const std::string& path, std::span<const LocalizationEvent> events) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "frame,x,y,z,ncc_peak\n";
  char buf[160];
  for (const auto& e : events) {
    std::snprintf(buf, sizeof buf, "%zu,%.9e,%.9e,%.9e,%.9f\n", e.frame, e.position.x, e.position.y,
                  e.position.z, e.ncc_peak);
    os << buf;
  }
}

std::vector<LocalizationEvent> read_events_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path);
  std::string line;
  std::getline(is, line);
  std::vector<LocalizationEvent> out;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 5) throw InvalidArgument(path + ":" + std::to_string(n) + ": expected 5 columns");
    LocalizationEvent e;
    e.frame = static_cast<std::size_t>(parse_double(c[0], path, n));
    e.position = {parse_double(c[1], path, n), parse_double(c[2], path, n), parse_double(c[3], path, n)};
    e.ncc_peak = parse_double(c[4], path, n);
    out.push_back(e);
  }
  return out;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& [name, sec] : m.stage_seconds) stages.push_back({{"stage", name}, {"seconds", sec}});
  j["stages"] = stages;
  j["outputs"] = m.outputs;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
}

void write_timing_log(const std::string& path, std::span<const double> frame_seconds) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "frame,milliseconds\n";
  char buf[64];
  for (std::size_t f = 0; f < frame_seconds.size(); ++f) {
    std::snprintf(buf, sizeof buf, "%zu,%.3f\n", f, 1e3 * frame_seconds[f]);
    os << buf;
  }
}

}  // namespace usbf
