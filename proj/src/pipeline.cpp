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

#include "usbf/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace usbf {

SimulationOutput simulate_scene(const RunConfig& cfg, int workers) {
  SimulationOutput out;
  AcquisitionConfig acq = cfg.acq;
  if (cfg.record) set_record_window(acq, cfg.geom, cfg.record->z_min, cfg.record->z_max, cfg.record->half_width);

  if (cfg.scene.type == SceneType::kTubes) {
    TubePhantomConfig tp = cfg.scene.tubes;
    tp.n_frames = cfg.scene.n_frames;
    tp.seed = cfg.seed;
    tp.add_noise = cfg.noise.enabled;
    tp.snr_db = cfg.noise.snr_db;
    auto run = simulate_tube_phantom_sequence(tp, cfg.geom, acq, workers);
    if (acq.record_samples == 0 && !run.sequence.frames.empty()) {
      acq.record_start = run.sequence.frames.front().t0;
      acq.record_samples = run.sequence.frames.front().samples;
    }
    out.sequence = std::move(run.sequence);
    out.truth = std::move(run.ground_truth);
    out.acquisition = acq;
    return out;
  }

  const Scene& base = cfg.scene.points;
  const std::size_t n_frames = cfg.scene.n_frames;
  std::vector<Scene> frames;
  for (std::size_t f = 0; f < n_frames; ++f) frames.push_back(base.at_frame(f));
  if (acq.record_samples == 0) {
    double z_min = 1e9, z_max = 0.0, half_width = 0.0;
    for (const auto& s : frames)
      for (const auto& sc : s.scatterers) {
        z_min = std::min(z_min, sc.position.z);
        z_max = std::max(z_max, sc.position.z);
        half_width = std::max({half_width, std::abs(sc.position.x), std::abs(sc.position.y)});
      }
    if (frames.empty() || base.empty()) throw InvalidArgument("scene has no scatterers");
    if (cfg.grid) {
      z_min = std::min(z_min, cfg.grid->origin().z);
      z_max = std::max(z_max, cfg.grid->origin().z + static_cast<double>(cfg.grid->nz() - 1) * cfg.grid->spacing().z);
    }
    set_record_window(acq, cfg.geom, z_min, z_max, half_width);
  }
  const Simulator sim(cfg.geom, acq);
  out.sequence.frame_rate = acq.frame_rate;
  out.sequence.frames.resize(n_frames);
  const auto n = static_cast<long long>(n_frames);
#pragma omp parallel for num_threads(std::max(workers, 1)) schedule(dynamic)
  for (long long f = 0; f < n; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    ChannelFrame fr = sim.frame(frames[fi]);
    if (cfg.noise.enabled) fr = add_white_noise(fr, cfg.noise.snr_db, derive_seed(cfg.seed, fi));
    out.sequence.frames[fi] = std::move(fr);
  }
  for (std::size_t f = 0; f < n_frames; ++f)
    for (const auto& s : frames[f].scatterers) out.truth.push_back({f, s.position, s.coefficient, 0});
  out.acquisition = acq;
  return out;
}

AcquisitionConfig acquisition_for(const RunConfig& cfg, const ChannelSequence& seq) {
  AcquisitionConfig acq = cfg.acq;
  if (!seq.frames.empty()) {
    const auto& f = seq.frames.front();
    if (f.channels != cfg.geom.element_count())
      throw InvalidArgument("sequence has " + std::to_string(f.channels) + " channels but the probe has " +
                            std::to_string(cfg.geom.element_count()) + " elements");
    if (std::abs(f.sampling_frequency - acq.sampling_frequency) > 1e-6 * acq.sampling_frequency)
      throw InvalidArgument("sequence sampling frequency differs from acquisition.sampling_frequency");
    acq.record_start = f.t0;
    acq.record_samples = f.samples;
  }
  if (seq.frame_rate > 0.0) acq.frame_rate = seq.frame_rate;
  return acq;
}

Scene scene_from_truth(const std::vector<GroundTruthRow>& rows, std::size_t frame) {
  Scene s;
  for (const auto& r : rows)
    if (r.frame == frame) s.scatterers.push_back({r.position, r.coefficient});
  return s;
}

}  // namespace usbf
