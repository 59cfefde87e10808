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

#ifndef USBF_SIMULATOR_HPP
#define USBF_SIMULATOR_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "usbf/core.hpp"

namespace usbf {

/// Gaussian-windowed sinusoid; the window falls to -40 dB at +/- cycles/(2 f0).
struct PulseWaveform {
  std::vector<double> samples;
  double sampling_frequency = 0.0;
  double center_frequency = 0.0;
  std::size_t cycles = 0;

  double duration() const { return static_cast<double>(cycles) / center_frequency; }
};

PulseWaveform synthesize_pulse(double f0, std::size_t cycles, double fs);

/// Continuous form of the pulse, t measured from the pulse center.
double pulse_value(double t, double f0, std::size_t cycles);

/**
 * Two-way (transmit * receive) impulse response, tabulated finely enough
 * that linear interpolation is exact for practical purposes. Time zero is
 * the start of the waveform; `peak_time()` is its envelope maximum.
 */
class RoundTripWaveform {
 public:
  RoundTripWaveform(double f0, std::size_t cycles, double fs, std::size_t oversample = 32);

  double operator()(double t) const { return lookup(values_, t); }
  /// d/dt of the waveform, used by the per-element transmit path.
  double derivative(double t) const { return lookup(derivative_, t); }

  double duration() const { return duration_; }
  double peak_time() const { return peak_time_; }

 private:
  double lookup(const std::vector<double>& table, double t) const;

  double dt_;
  double duration_;
  double peak_time_;
  std::vector<double> values_;
  std::vector<double> derivative_;
};

/// N x T real RF samples, channel-major (sample t of channel n at n * T + t).
struct ChannelFrame {
  std::size_t channels = 0;
  std::size_t samples = 0;
  std::vector<double> data;
  double t0 = 0.0;
  double sampling_frequency = 0.0;

  ChannelFrame() = default;
  ChannelFrame(std::size_t n, std::size_t t, double t_start, double fs)
      : channels(n), samples(t), data(n * t, 0.0), t0(t_start), sampling_frequency(fs) {}

  std::span<double> channel(std::size_t n) { return {data.data() + n * samples, samples}; }
  std::span<const double> channel(std::size_t n) const {
    return {data.data() + n * samples, samples};
  }
  double peak_abs() const;
};

struct ChannelSequence {
  std::vector<ChannelFrame> frames;
  double frame_rate = 0.0;

  /// Throws InvalidArgument unless all frames share N, T, fs and t0.
  void validate() const;
};

/**
 * Hard-baffle rectangular element: product of the lateral and elevational
 * sinc(pi * size * u_axis * f / c) factors times the obliquity cos(theta),
 * clipped to [0, 1]. `direction` must be a unit vector.
 */
double element_directivity(const ArrayGeometry& geom, std::size_t n, const Vec3& direction,
                           double f, double speed_of_sound = 1540.0);

/**
 * Tabulated form of element_directivity for one frequency and speed of
 * sound (all elements share a size). Absolute error below 1e-8; used by the
 * receive apodization in every beamforming path.
 */
class DirectivityModel {
 public:
  DirectivityModel(const ArrayGeometry& geom, double f, double speed_of_sound);

  double operator()(const Vec3& unit_dir) const {
    if (!(unit_dir.z > 0.0)) return 0.0;
    const double d = sinc_x(unit_dir.x) * sinc_y(unit_dir.y) * unit_dir.z;
    return d < 0.0 ? 0.0 : (d > 1.0 ? 1.0 : d);
  }

 private:
  struct Table {
    double scale = 0.0;  // table index per unit direction cosine
    std::vector<double> values;
    double operator()(double u) const {
      const double x = (u < 0.0 ? -u : u) * scale;
      auto i = static_cast<std::size_t>(x);
      if (i + 1 >= values.size()) i = values.size() - 2;
      const double f = x - static_cast<double>(i);
      return values[i] + f * (values[i + 1] - values[i]);
    }
  };
  static Table make_table(double k_size);

  double sinc_x(double u) const { return x_(u); }
  double sinc_y(double u) const { return y_(u); }

  Table x_;
  Table y_;
};

/// Transmit taper weight seen by a point at lateral/elevational position (x, y).
double transmit_field_weight(const ArrayGeometry& geom, const AcquisitionConfig& acq, double x,
                             double y);

class Simulator {
 public:
  Simulator(ArrayGeometry geom, AcquisitionConfig acq);

  /// Single-scattering plane-wave frame. Echo amplitudes use a 1 mm reference distance.
  ChannelFrame frame(const Scene& scene) const;

  const ArrayGeometry& geometry() const { return geom_; }
  const AcquisitionConfig& acquisition() const { return acq_; }
  const RoundTripWaveform& waveform() const { return waveform_; }

 private:
  void add_scatterer_taper(const Scatterer& s, ChannelFrame& out) const;
  void add_scatterer_element_sum(const Scatterer& s, ChannelFrame& out) const;

  ArrayGeometry geom_;
  AcquisitionConfig acq_;
  RoundTripWaveform waveform_;
};

/// Uses `pulse` for f0/cycles/fs. When acq.record_samples is 0 the window is fitted to the scene.
ChannelFrame simulate_frame(const Scene& scene, const ArrayGeometry& geom,
                            const AcquisitionConfig& acq, const PulseWaveform& pulse);

/// Mean power over samples whose magnitude exceeds 1% of the frame peak.
double gated_signal_power(const ChannelFrame& frame);

ChannelFrame add_white_noise(const ChannelFrame& frame, double snr_db, std::uint64_t seed);

/// Independent stream seed for item `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct Tube {
  Vec3 start;
  Vec3 end;
  double radius = 100e-6;
};

struct TubePhantomConfig {
  Tube tube_a;
  Tube tube_b;
  double bubble_rate = 0.2;  ///< Poisson arrivals per frame, per tube
  double speed = 10e-3;      ///< m/s along the tube axis
  std::size_t n_frames = 1;
  std::uint64_t seed = 0;
  double coefficient_min = 0.5;
  double coefficient_max = 1.0;
  bool prefill = true;        ///< start with tubes at steady-state occupancy
  double snr_db = 0.0;
  bool add_noise = false;
};

struct GroundTruthRow {
  std::size_t frame = 0;
  Vec3 position;
  double coefficient = 0.0;
  int tube = 0;
};

struct TubePhantomRun {
  ChannelSequence sequence;
  std::vector<GroundTruthRow> ground_truth;
};

/// Two tubes crossing at `angle_deg` in the plane spanned by x and `spread_axis`, meeting at
/// `crossing`. Each tube runs from x_min to x_max.
TubePhantomConfig crossing_tubes(const Vec3& crossing, double angle_deg, const Vec3& spread_axis,
                                 double x_min, double x_max, double diameter);

/// Bubble positions for every frame, generated sequentially from the seed.
std::vector<std::vector<Scatterer>> tube_bubble_positions(const TubePhantomConfig& cfg,
                                                          double frame_rate,
                                                          std::vector<GroundTruthRow>* truth);

TubePhantomRun simulate_tube_phantom_sequence(const TubePhantomConfig& cfg,
                                              const ArrayGeometry& geom,
                                              const AcquisitionConfig& acq, int workers = 1);

}  // namespace usbf

#endif  // USBF_SIMULATOR_HPP
