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

#ifndef USBF_METRICS_HPP
#define USBF_METRICS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "usbf/beamformers.hpp"
#include "usbf/core.hpp"

namespace usbf {

enum class Axis { kX, kY, kZ };  // lateral, elevation, axial

/// Width between the half-max crossings around `peak`, linearly interpolated. Same unit as
/// `spacing`. Throws WidthUnbounded if either side stays above half max.
double profile_fwhm(std::span<const double> profile, std::size_t peak, double spacing);

/// FWHM in mm of the line through `peak` along `axis`.
double fwhm(const BeamformedVolume& volume, const Index3& peak, Axis axis);

/// Largest voxel within `radius` of `point` (ties: lowest flat index).
Index3 local_peak(const BeamformedVolume& volume, const Vec3& point, double radius);

/// Ellipsoid centered on a scatterer; semi-axes equal the per-axis FWHM (2 x FWHM overall).
struct MainLobe {
  Vec3 center;
  Vec3 semi_axes;
  Index3 peak;

  bool contains(const Vec3& p) const;
};

/// Locates the peak within 0.5 mm of `truth` and measures its three FWHMs.
MainLobe main_lobe_region(const BeamformedVolume& volume, const Vec3& truth);

/// 20 log10(side / main) for lobe `index`; side peak from the +/- `slab` depth band outside
/// every lobe. Throws InvalidRegion when that band is empty.
double spsmr(const BeamformedVolume& volume, std::size_t index, std::span<const MainLobe> lobes,
             double slab = 1e-3);

struct CpsmrResult {
  std::size_t count = 0;
  std::vector<double> matrix;  ///< row-major, (i, j) = side_i / main_j in dB
  double max_psmr = 0.0;

  double at(std::size_t i, std::size_t j) const { return matrix[i * count + j]; }
};

CpsmrResult cpsmr_and_max(const BeamformedVolume& volume, std::span<const MainLobe> lobes,
                          double slab = 1e-3);

struct SnrResult {
  double db = 0.0;
  bool capped = false;  ///< noise RMS was zero; db holds kSnrCap
};

inline constexpr double kSnrCap = 400.0;

/// 20 log10(mean signal intensity / noise RMS) over flat voxel indices.
SnrResult image_snr(const BeamformedVolume& volume, std::span<const std::size_t> signal_voxels,
                    std::span<const std::size_t> noise_voxels);

/// Voxels in `thickness`-thick depth slabs centered halfway between consecutive depths.
std::vector<std::size_t> midgap_noise_region(const VoxelGrid& grid, std::vector<double> depths,
                                             double thickness = 0.5e-3);

double mean(std::span<const double> v);
double stddev(std::span<const double> v);

/// One row of a scene report.
struct PsfMetrics {
  std::vector<double> lateral_fwhm;      ///< mm, per scatterer
  std::vector<double> elevational_fwhm;  ///< mm, per scatterer
  std::vector<double> spsmr;             ///< dB, per scatterer
  CpsmrResult cpsmr;
  double max_psmr = 0.0;
  SnrResult snr;
  double processing_time = 0.0;  ///< s per frame
};

PsfMetrics compute_psf_metrics(const BeamformedVolume& volume, const Scene& scene,
                               double processing_time = 0.0);

struct ReportRow {
  std::string label;
  PsfMetrics metrics;
};

/// Text table: one row per beamformer, six metric columns.
std::string format_report(const std::string& title, std::span<const ReportRow> rows);
std::string report_csv(std::span<const ReportRow> rows);

/// 2D float image, x fastest. `u`/`v` are the in-plane axes.
struct Image2D {
  std::size_t width = 0;
  std::size_t height = 0;
  double spacing_u = 0.0;
  double spacing_v = 0.0;
  double origin_u = 0.0;
  double origin_v = 0.0;
  std::vector<double> values;

  double at(std::size_t u, std::size_t v) const { return values[v * width + u]; }
};

/// Max along `axis`. The remaining axes keep their x, y, z order as (u, v).
Image2D mip(const VoxelGrid& grid, std::span<const double> values, Axis axis);
Image2D mip(const BeamformedVolume& volume, Axis axis);

/// Mean over `along` indices [lo, hi] of the image (0 = u, 1 = v); series runs over the other axis.
struct ProfileSpec {
  int average_axis = 0;
  std::size_t lo = 0;
  std::size_t hi = 0;
};

std::vector<double> profile(const Image2D& image, const ProfileSpec& spec);

struct ChannelHistogram {
  std::size_t amplitude_bins = 0;
  std::size_t phase_bins = 0;
  double max_amplitude = 0.0;
  std::vector<double> counts;  ///< amplitude-major

  /// Fraction of phase bins needed to hold `mass` of the valid channels (largest bins first).
  double phase_support_fraction(double mass = 0.9) const;
};

/// Valid channels binned by |s| (0..max) and arg(s) (-pi..pi).
ChannelHistogram channel_histogram(const DelayedSampleVector& s, std::size_t amplitude_bins,
                                   std::size_t phase_bins);

/// Per-voxel CF or CV/CV_N weight for one frame (diagnostic, serial).
std::vector<double> weight_map(const ChannelFrame& frame, const VoxelGrid& grid,
                               const BeamformerKind& kind, const ArrayGeometry& geom,
                               const AcquisitionConfig& acq);

/// 8-bit binary PGM; intensities mapped over [max - db_range, max] dB.
void write_pgm(const std::string& path, const Image2D& image, double db_range = 40.0);

}  // namespace usbf

#endif  // USBF_METRICS_HPP
