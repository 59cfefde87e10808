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

#ifndef USBF_DELAYLINE_HPP
#define USBF_DELAYLINE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "usbf/core.hpp"
#include "usbf/fft.hpp"
#include "usbf/simulator.hpp"

namespace usbf {

/// N x T analytic (complex) samples, channel-major.
struct AnalyticFrame {
  std::size_t channels = 0;
  std::size_t samples = 0;
  std::vector<cplx> data;
  double t0 = 0.0;
  double sampling_frequency = 0.0;

  std::span<const cplx> channel(std::size_t n) const { return {data.data() + n * samples, samples}; }
};

AnalyticFrame analytic_signal(const ChannelFrame& frame);

enum class Interpolation {
  kLinear,        ///< complex linear interpolation of the analytic samples
  kPhaseRotated,  ///< linear interpolation of the demodulated signal, remodulated at f0
};

/**
 * Receive delay law for 0-degree plane-wave transmit:
 *   tau(v, n) = v.z / c + |v - p_n| / c + pulse_offset
 * where pulse_offset is the envelope-peak time of the round-trip waveform,
 * so the PSF is centered on the scatterer.
 */
class DelayLaw {
 public:
  DelayLaw(const ArrayGeometry& geom, const AcquisitionConfig& acq);

  double operator()(const Vec3& voxel, std::size_t n) const {
    return (voxel.z + norm(voxel - geom_->position(n))) * inv_c_ + pulse_offset_;
  }
  double pulse_offset() const { return pulse_offset_; }

 private:
  const ArrayGeometry* geom_;
  double inv_c_;
  double pulse_offset_;
};

double round_trip_delay(const Vec3& voxel, std::size_t n, const ArrayGeometry& geom,
                        const AcquisitionConfig& acq);

/// Receive element-sensitivity weights; values below the cutoff are exactly 0.
struct ApodizationVector {
  std::vector<double> a;
};

inline constexpr double kSensitivityCutoff = 0.5;

ApodizationVector receive_apodization(const Vec3& voxel, const ArrayGeometry& geom,
                                      const AcquisitionConfig& acq,
                                      double cutoff = kSensitivityCutoff);
/// Same, with a prebuilt directivity table (no z > 0 check).
ApodizationVector receive_apodization(const Vec3& voxel, const ArrayGeometry& geom,
                                      const DirectivityModel& model,
                                      double cutoff = kSensitivityCutoff);

/// Delay-cancelled channel samples for one voxel. Masked-out entries are exactly zero.
struct DelayedSampleVector {
  std::vector<cplx> s;
  std::vector<std::uint8_t> valid;

  std::size_t valid_count() const;
};

class SampleInterpolator;

DelayedSampleVector gather_delayed_samples(const AnalyticFrame& aframe, const Vec3& voxel,
                                           const DelayLaw& law, const ApodizationVector& apod,
                                           const SampleInterpolator& interpolate);

DelayedSampleVector gather_delayed_samples(const AnalyticFrame& aframe, const Vec3& voxel,
                                           const ArrayGeometry& geom, const AcquisitionConfig& acq,
                                           const ApodizationVector& apod,
                                           Interpolation interp = Interpolation::kPhaseRotated);

/**
 * Fractional-delay interpolation between samples i and i+1 of one channel,
 * written as w0 * row[i] + w1 * row[i+1]. The phase-rotated weights use a
 * tabulated exp(i omega frac) (error below 1e-7).
 */
class SampleInterpolator {
 public:
  SampleInterpolator(Interpolation mode, double f0, double fs);

  void weights(double frac, cplx& w0, cplx& w1) const {
    if (mode_ == Interpolation::kLinear) {
      w0 = 1.0 - frac;
      w1 = frac;
      return;
    }
    const double x = frac * kSteps;
    auto k = static_cast<std::size_t>(x);
    if (k >= kSteps) k = kSteps - 1;
    const double f = x - static_cast<double>(k);
    const cplx r0 = rot_[k] + f * (rot_[k + 1] - rot_[k]);
    w0 = (1.0 - frac) * r0;
    w1 = frac * (r0 * back_);
  }

  cplx operator()(const cplx* row, std::size_t i, double frac) const {
    cplx w0, w1;
    weights(frac, w0, w1);
    return w0 * row[i] + w1 * row[i + 1];
  }

  Interpolation mode() const { return mode_; }

 private:
  static constexpr std::size_t kSteps = 4096;
  Interpolation mode_;
  cplx back_;  // exp(-i omega)
  std::vector<cplx> rot_;
};

namespace detail {

/// Fractional sample position of time t; false when outside [t0, t0 + (T-1)/fs].
inline bool sample_position(double t, double t0, double fs, std::size_t samples, std::size_t& index,
                            double& frac) {
  const double x = (t - t0) * fs;
  if (!(x >= 0.0) || x > static_cast<double>(samples - 1)) return false;
  auto i = static_cast<std::size_t>(x);
  if (i >= samples - 1) i = samples - 2;
  index = i;
  frac = x - static_cast<double>(i);
  return true;
}

}  // namespace detail

}  // namespace usbf

#endif  // USBF_DELAYLINE_HPP
