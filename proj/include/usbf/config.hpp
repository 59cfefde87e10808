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

#ifndef USBF_CONFIG_HPP
#define USBF_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "usbf/beamformers.hpp"
#include "usbf/core.hpp"
#include "usbf/errors.hpp"
#include "usbf/simulator.hpp"
#include "usbf/srus.hpp"

namespace usbf {

/// Schema violation; the message carries "<source>:<line>: <field.path>: <problem>".
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class SceneType { kFiveScatterers, kPoints, kTubes };

struct RecordWindow {
  double z_min = 0.0;
  double z_max = 0.0;
  double half_width = 0.0;
};

struct SceneConfig {
  SceneType type = SceneType::kFiveScatterers;
  Scene points;              ///< kPoints
  TubePhantomConfig tubes;   ///< kTubes (n_frames, seed and noise filled from the run)
  std::size_t n_frames = 1;
};

struct NoiseConfig {
  bool enabled = false;
  double snr_db = 10.0;
};

struct SrusSettings {
  ClutterFilterConfig clutter;
  bool clutter_enabled = true;
  std::map<Method, double> threshold_db{{Method::kDAS, -10.0},
                                        {Method::kPDAS, -35.0},
                                        {Method::kCF, -27.5},
                                        {Method::kCVN, -40.0},
                                        {Method::kCV, -40.0}};
  DetectOptions detect;
  TemplateOptions templ;
};

struct RunConfig {
  ArrayGeometry geom = default_matrix_probe();
  AcquisitionConfig acq = default_acquisition(default_matrix_probe());
  std::optional<RecordWindow> record;
  SceneConfig scene;
  NoiseConfig noise;
  std::uint64_t seed = 1;
  int workers = 1;
  std::optional<VoxelGrid> grid;
  BeamformerKind kind;
  SrusSettings srus;
  double db_range = 40.0;
  std::string source_text;  ///< raw YAML, hashed into the run manifest

  /// SrusConfig for `method`, carrying the shared settings and that method's threshold.
  SrusConfig srus_config(Method method) const;
  const VoxelGrid& require_grid() const;
};

RunConfig parse_config(const std::string& yaml_text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace usbf

#endif  // USBF_CONFIG_HPP
