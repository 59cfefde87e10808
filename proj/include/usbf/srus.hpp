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

#ifndef USBF_SRUS_HPP
#define USBF_SRUS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "usbf/beamformers.hpp"
#include "usbf/core.hpp"
#include "usbf/simulator.hpp"

namespace usbf {

struct ClutterFilterConfig {
  std::size_t low_cutoff = 2;                ///< largest singular components removed
  std::optional<std::size_t> high_cutoff;    ///< smallest singular components removed

  void validate(std::size_t frames) const;
};

/**
 * Temporal basis of the Casorati matrix (rows = channel x sample, columns =
 * frames), from the eigen decomposition of its frames x frames Gram matrix.
 * apply() projects out the removed components and is linear in its input.
 */
class ClutterProjection {
 public:
  ClutterProjection(const ChannelSequence& seq, const ClutterFilterConfig& cfg);

  ChannelSequence apply(const ChannelSequence& seq) const;
  /// Singular values, largest first.
  const std::vector<double>& singular_values() const { return singular_values_; }

 private:
  std::size_t frames_;
  std::vector<double> singular_values_;
  std::vector<std::vector<double>> removed_;  ///< unit temporal vectors
};

ChannelSequence svd_clutter_filter(const ChannelSequence& seq, const ClutterFilterConfig& cfg);

/// Dense 3D block, x fastest. Odd dims; center voxel is (nx/2, ny/2, nz/2).
struct Template3D {
  Index3 dims;
  Vec3 spacing;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values[i + dims.i * (j + dims.j * k)];
  }
};

struct TemplateOptions {
  std::optional<double> depth;  ///< unset: 20 mm, or the grid center depth inside run_srus
  double support_db = -20.0;
  Vec3 max_half_extent{0.5e-3, 0.5e-3, 0.25e-3};
  int workers = 1;
};

/// Beamformed image of one unit scatterer, cropped to its support box around the peak, peak = 1.
Template3D estimate_psf_template(const BeamformerKind& kind, const ArrayGeometry& geom,
                                 const AcquisitionConfig& acq, const Vec3& grid_spacing,
                                 const TemplateOptions& opts = {});

/// Zero-normalized cross-correlation of the template with the co-centered patch at every voxel.
/// Voxels where the template does not fit, and zero-variance patches, give 0.
std::vector<double> ncc3d(const VoxelGrid& grid, std::span<const double> volume,
                          const Template3D& tmpl, int workers = 1);

struct LocalizationEvent {
  std::size_t frame = 0;
  Vec3 position;
  double ncc_peak = 0.0;
};

struct DetectOptions {
  double min_coef = 0.3;
  std::size_t window = 5;
  std::size_t upsample = 10;
};

struct DetectStats {
  std::size_t maxima = 0;
  std::size_t border_discarded = 0;
};

/// Natural cubic spline through equally spaced samples (unit spacing), evaluated at x.
double natural_spline_eval(std::span<const double> y, std::span<const double> second, double x);
std::vector<double> natural_spline_second_derivatives(std::span<const double> y);

std::vector<LocalizationEvent> detect_and_localize(const VoxelGrid& grid,
                                                   std::span<const double> coef,
                                                   std::size_t frame,
                                                   const DetectOptions& opts = {},
                                                   DetectStats* stats = nullptr);

/// Zeroes voxels below reference * 10^(threshold_db / 20). -inf keeps everything.
std::vector<double> threshold_volume(std::span<const double> values, double threshold_db,
                                     double reference = 1.0);

struct DensityMap {
  VoxelGrid grid;
  std::vector<double> counts;
  std::size_t dropped = 0;  ///< events outside the grid

  double total() const;
};

DensityMap accumulate_density(std::span<const LocalizationEvent> events, const VoxelGrid& sr_grid);

struct SrusConfig {
  BeamformerKind kind;
  ClutterFilterConfig clutter;
  bool apply_clutter_filter = true;
  double threshold_db = -20.0;
  DetectOptions detect;
  TemplateOptions templ;
  int workers = 1;
};

struct SrusResult {
  std::vector<LocalizationEvent> events;
  DensityMap density;
  std::vector<double> beamform_seconds;
  DetectStats stats;
};

/// Beamformed volumes normalized to the sequence max (after optional clutter filtering).
std::vector<BeamformedVolume> srus_volumes(const ChannelSequence& seq, const VoxelGrid& grid,
                                           const SrusConfig& cfg, const ArrayGeometry& geom,
                                           const AcquisitionConfig& acq,
                                           std::vector<double>* seconds = nullptr);

/// threshold -> NCC -> detect for every volume; events ordered by frame.
std::vector<LocalizationEvent> localize_volumes(std::span<const BeamformedVolume> volumes,
                                                const Template3D& tmpl, double threshold_db,
                                                const DetectOptions& detect, int workers,
                                                DetectStats* stats = nullptr);

SrusResult run_srus(const ChannelSequence& seq, const VoxelGrid& grid, const SrusConfig& cfg,
                    const ArrayGeometry& geom, const AcquisitionConfig& acq);

struct CalibrationResult {
  double threshold_db = 0.0;
  std::size_t count = 0;
  bool converged = false;
  /// Counts at the ends of the search range, reported when the target is not bracketed.
  double bracket_lo_db = 0.0;
  double bracket_hi_db = 0.0;
  std::size_t count_at_lo = 0;
  std::size_t count_at_hi = 0;
};

/// Bisection on threshold_db in [lo_db, hi_db] until the event count is within `tolerance` of
/// `target` (relative).
CalibrationResult calibrate_threshold(std::span<const BeamformedVolume> volumes,
                                      const Template3D& tmpl, std::size_t target,
                                      const DetectOptions& detect, int workers,
                                      double lo_db = -60.0, double hi_db = 0.0,
                                      double tolerance = 0.1, std::size_t max_iter = 40);

}  // namespace usbf

#endif  // USBF_SRUS_HPP
