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

#ifndef USBF_BEAMFORMERS_HPP
#define USBF_BEAMFORMERS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usbf/core.hpp"
#include "usbf/delayline.hpp"
#include "usbf/simulator.hpp"

namespace usbf {

enum class Method { kDAS, kPDAS, kCF, kCVN, kCV };

std::string_view method_name(Method m);
/// Accepts das, pdas, cf, cvn, cv (case-insensitive). Unknown names throw listing the valid ones.
Method parse_method(std::string_view name);
std::span<const Method> all_methods();

struct BeamformerKind {
  Method method = Method::kDAS;
  double p = 4.0;            ///< root/power exponent, p-DAS only
  double epsilon = 1e-10;    ///< variance floor relative to sum |u_n|^2, CV and CV_N
  bool cf_normalized = true; ///< divide CF by the valid channel count
  double bandwidth = 0.8;    ///< p-DAS fractional band-pass width around f0
  double fine_dz = 1e-5;     ///< p-DAS axial sampling (m)
  Interpolation interpolation = Interpolation::kPhaseRotated;

  /// Throws InvalidConfiguration on p < 1, epsilon <= 0, or p-DAS on a coarse axial grid.
  void validate() const;
};

BeamformerKind make_kind(Method m);

/// sum_n a_n s_n over valid channels.
cplx das(std::span<const cplx> s, std::span<const std::uint8_t> valid, std::span<const double> a);
cplx das(const DelayedSampleVector& s, const ApodizationVector& a);

/// sign(s) |s|^(1/p) summed over the channels of one depth sample.
double pdas_accumulate(std::span<const double> s, double p);
/// Depth-major block (depths x channels) to one compressed sum per depth.
std::vector<double> pdas_accumulate(std::span<const double> block, std::size_t channels, double p);

struct PdasRecovery {
  double p = 4.0;
  double f0 = 7.8e6;
  double speed_of_sound = 1540.0;
  double dz = 1e-5;        ///< axial sample spacing of the line (m)
  double bandwidth = 0.8;  ///< fractional
};

/**
 * sign(y)|y|^p per sample, zero-phase band-pass around f0 along depth, then
 * the envelope of the depth-axis analytic signal. Returns the envelope at
 * the input sampling; use decimate_average to reach the output grid.
 */
std::vector<double> pdas_recover(std::span<const double> yhat, const PdasRecovery& params);

/// out[j] = mean of line[first + j*factor - factor/2 ... first + j*factor + factor/2].
std::vector<double> decimate_average(std::span<const double> line, std::size_t first,
                                     std::size_t factor, std::size_t count);

/// |sum s|^2 / (N_valid sum |s|^2) when normalized; the raw ratio otherwise. 0 for all-zero input.
double cf_weight(std::span<const cplx> s, std::span<const std::uint8_t> valid, bool normalized);
double cf_weight(const DelayedSampleVector& s, bool normalized = true);

/**
 * |sum s|^2 / max(var, epsilon * sum |u|^2) with u_n = s_n (CV_N) or
 * s_n / a_n (CV), var = sum |u_n - mean u|^2 over valid channels. Returns 0
 * with fewer than two valid channels.
 */
double cv_weight(std::span<const cplx> s, std::span<const std::uint8_t> valid,
                 std::span<const double> a, bool inverse_apodize, double epsilon);
double cv_weight(const DelayedSampleVector& s, const ApodizationVector& a, bool inverse_apodize,
                 double epsilon = 1e-10);

/// One voxel value from gathered samples (DAS, CF, CV_N, CV; not p-DAS).
double voxel_value(const BeamformerKind& kind, std::span<const cplx> s,
                   std::span<const std::uint8_t> valid, std::span<const double> a);

struct BeamformedVolume {
  VoxelGrid grid;
  std::vector<double> values;
  BeamformerKind kind;
  double normalization = 1.0;  ///< values were divided by this

  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[grid.flatten(i, j, k)]; }
  double max() const;
  std::size_t argmax() const;
};

struct BeamformOptions {
  int workers = 1;
  bool normalize = false;          ///< divide by the maximum over the whole sequence
  double memory_budget_bytes = 0;  ///< 0: half of physical memory
  std::size_t frame_batch = 16;
};

struct BeamformResult {
  std::vector<BeamformedVolume> volumes;
  std::vector<double> frame_seconds;
};

/// Parallel driver; results do not depend on the worker count.
BeamformResult beamform_volume(const ChannelSequence& seq, const VoxelGrid& grid,
                               const BeamformerKind& kind, const ArrayGeometry& geom,
                               const AcquisitionConfig& acq, const BeamformOptions& opts = {});

/// Serial per-voxel evaluation through the public gather/weight operations.
std::vector<BeamformedVolume> beamform_volume_reference(const ChannelSequence& seq,
                                                        const VoxelGrid& grid,
                                                        const BeamformerKind& kind,
                                                        const ArrayGeometry& geom,
                                                        const AcquisitionConfig& acq);

/// Bytes the driver needs for `frames` frames of `seq` on `grid`.
double beamform_memory_estimate(const ChannelSequence& seq, const VoxelGrid& grid,
                                const BeamformerKind& kind, const BeamformOptions& opts);

double available_memory_bytes();

/// Divides every volume by the largest value of the whole sequence (no-op for an all-zero sequence).
void normalize_to_sequence_max(std::vector<BeamformedVolume>& volumes);

}  // namespace usbf

#endif  // USBF_BEAMFORMERS_HPP
