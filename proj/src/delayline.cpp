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

#include "usbf/delayline.hpp"

#include <numbers>

#include "usbf/errors.hpp"

namespace usbf {

AnalyticFrame analytic_signal(const ChannelFrame& frame) {
  if (frame.samples < 2) throw InvalidArgument("analytic signal needs at least two samples");
  AnalyticFrame out;
  out.channels = frame.channels;
  out.samples = frame.samples;
  out.t0 = frame.t0;
  out.sampling_frequency = frame.sampling_frequency;
  out.data.resize(frame.data.size());
  analytic_rows(frame.data, frame.channels, frame.samples, out.data);
  return out;
}

DelayLaw::DelayLaw(const ArrayGeometry& geom, const AcquisitionConfig& acq)
    : geom_(&geom),
      inv_c_(1.0 / acq.speed_of_sound),
      pulse_offset_(RoundTripWaveform(geom.center_frequency(), acq.pulse_cycles,
                                      acq.sampling_frequency)
                        .peak_time()) {}

double round_trip_delay(const Vec3& voxel, std::size_t n, const ArrayGeometry& geom,
                        const AcquisitionConfig& acq) {
  if (!(voxel.z > 0.0)) throw InvalidArgument("voxel must lie in front of the array (z > 0)");
  return DelayLaw(geom, acq)(voxel, n);
}

SampleInterpolator::SampleInterpolator(Interpolation mode, double f0, double fs) : mode_(mode) {
  const double omega = 2.0 * std::numbers::pi * f0 / fs;
  back_ = std::polar(1.0, -omega);
  if (mode_ == Interpolation::kLinear) return;
  rot_.resize(kSteps + 1);
  for (std::size_t k = 0; k <= kSteps; ++k)
    rot_[k] = std::polar(1.0, omega * static_cast<double>(k) / static_cast<double>(kSteps));
}

ApodizationVector receive_apodization(const Vec3& voxel, const ArrayGeometry& geom,
                                      const AcquisitionConfig& acq, double cutoff) {
  if (!(voxel.z > 0.0)) throw InvalidArgument("voxel must lie in front of the array (z > 0)");
  return receive_apodization(voxel, geom, DirectivityModel(geom, geom.center_frequency(), acq.speed_of_sound), cutoff);
}

ApodizationVector receive_apodization(const Vec3& voxel, const ArrayGeometry& geom,
                                      const DirectivityModel& model, double cutoff) {
  ApodizationVector out;
  out.a.resize(geom.element_count());
  for (std::size_t n = 0; n < geom.element_count(); ++n) {
    const Vec3 d = voxel - geom.position(n);
    const double w = model((1.0 / norm(d)) * d);
    out.a[n] = w < cutoff ? 0.0 : w;
  }
  return out;
}

std::size_t DelayedSampleVector::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v != 0 ? 1 : 0;
  return n;
}

DelayedSampleVector gather_delayed_samples(const AnalyticFrame& aframe, const Vec3& voxel,
                                           const DelayLaw& law, const ApodizationVector& apod,
                                           const SampleInterpolator& interpolate) {
  if (apod.a.size() != aframe.channels)
    throw InvalidArgument("apodization length does not match channel count");
  DelayedSampleVector out;
  out.s.assign(aframe.channels, cplx(0.0, 0.0));
  out.valid.assign(aframe.channels, 0);
  for (std::size_t n = 0; n < aframe.channels; ++n) {
    if (apod.a[n] == 0.0) continue;
    std::size_t i = 0;
    double frac = 0.0;
    if (!detail::sample_position(law(voxel, n), aframe.t0, aframe.sampling_frequency,
                                 aframe.samples, i, frac))
      continue;
    out.s[n] = interpolate(aframe.data.data() + n * aframe.samples, i, frac);
    out.valid[n] = 1;
  }
  return out;
}

DelayedSampleVector gather_delayed_samples(const AnalyticFrame& aframe, const Vec3& voxel,
                                           const ArrayGeometry& geom, const AcquisitionConfig& acq,
                                           const ApodizationVector& apod, Interpolation interp) {
  return gather_delayed_samples(aframe, voxel, DelayLaw(geom, acq), apod,
                                SampleInterpolator(interp, geom.center_frequency(), aframe.sampling_frequency));
}

}  // namespace usbf
