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

#ifndef USBF_PIPELINE_HPP
#define USBF_PIPELINE_HPP

#include <string>
#include <vector>

#include "usbf/config.hpp"
#include "usbf/io.hpp"
#include "usbf/metrics.hpp"

namespace usbf {

struct SimulationOutput {
  ChannelSequence sequence;
  std::vector<GroundTruthRow> truth;
  AcquisitionConfig acquisition;  ///< with the record window actually used
};

/// Five-scatterer, point or tube scene from the config. Noise streams derive from cfg.seed per frame.
SimulationOutput simulate_scene(const RunConfig& cfg, int workers);

/// Acquisition settings matching a recorded sequence (record window taken from the data).
AcquisitionConfig acquisition_for(const RunConfig& cfg, const ChannelSequence& seq);

/// Scatterers of frame `frame` in a ground-truth table.
Scene scene_from_truth(const std::vector<GroundTruthRow>& rows, std::size_t frame = 0);

}  // namespace usbf

#endif  // USBF_PIPELINE_HPP
