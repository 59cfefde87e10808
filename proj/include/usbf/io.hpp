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

#ifndef USBF_IO_HPP
#define USBF_IO_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "usbf/beamformers.hpp"
#include "usbf/simulator.hpp"
#include "usbf/srus.hpp"

namespace usbf {

/**
 * Binary container: fixed little-endian header followed by float32 payload.
 * A JSON sidecar (<path>.json) repeats the header fields in readable form.
 *
 *   magic "USBF" | u32 version | u32 kind | u64 dims[4] |
 *   f64 fs, t0, frame_rate | f64 origin[3] | f64 spacing[3]
 */
enum class DataKind : std::uint32_t { kChannelSequence = 1, kVolumeSequence = 2, kDensityMap = 3 };

inline constexpr std::uint32_t kFormatVersion = 1;

struct FileHeader {
  DataKind kind = DataKind::kChannelSequence;
  std::uint64_t dims[4] = {0, 0, 0, 0};
  double sampling_frequency = 0.0;
  double t0 = 0.0;
  double frame_rate = 0.0;
  Vec3 origin;
  Vec3 spacing;
};

/// Header of any container file; throws InvalidArgument on a bad magic or version.
FileHeader read_header(const std::string& path);

void write_channel_sequence(const std::string& path, const ChannelSequence& seq);
ChannelSequence read_channel_sequence(const std::string& path);

/// All volumes must share one grid. The beamformer kind goes to the sidecar.
void write_volumes(const std::string& path, std::span<const BeamformedVolume> volumes,
                   std::span<const double> frame_seconds = {});
std::vector<BeamformedVolume> read_volumes(const std::string& path);
/// Mean per-frame beamforming time stored in a volume sidecar (0 when absent).
double read_mean_frame_seconds(const std::string& path);

void write_density(const std::string& path, const DensityMap& map);
DensityMap read_density(const std::string& path);

void write_ground_truth_csv(const std::string& path, std::span<const GroundTruthRow> rows);
std::vector<GroundTruthRow> read_ground_truth_csv(const std::string& path);

/// frame,x,y,z,ncc_peak with fixed formatting (byte-stable across runs).
void write_events_csv(const std::string& path, std::span<const LocalizationEvent> events);
std::vector<LocalizationEvent> read_events_csv(const std::string& path);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::vector<std::pair<std::string, double>> stage_seconds;
  std::vector<std::string> outputs;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

/// Per-frame beamforming times, one "frame,milliseconds" line each.
void write_timing_log(const std::string& path, std::span<const double> frame_seconds);

}  // namespace usbf

#endif  // USBF_IO_HPP
