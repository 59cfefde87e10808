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

#include "usbf/core.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "usbf/errors.hpp"

namespace usbf {

Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  if (n == 0.0) throw InvalidArgument("cannot normalize a zero vector");
  return (1.0 / n) * a;
}

ArrayGeometry::ArrayGeometry(std::size_t rows, std::size_t cols, double pitch_x, double pitch_y,
                             double element_width, double element_height,
                             double center_frequency)
    : rows_(rows),
      cols_(cols),
      pitch_x_(pitch_x),
      pitch_y_(pitch_y),
      element_width_(element_width),
      element_height_(element_height),
      center_frequency_(center_frequency) {
  if (rows == 0 || cols == 0) throw InvalidArgument("array needs at least one row and column");
  if (!(pitch_x > 0.0) || !(pitch_y > 0.0)) throw InvalidArgument("pitch must be positive");
  if (!(element_width > 0.0) || !(element_height > 0.0))
    throw InvalidArgument("element size must be positive");
  if (!(center_frequency > 0.0)) throw InvalidArgument("center frequency must be positive");

  positions_.reserve(rows * cols);
  const double cx = (static_cast<double>(cols) - 1.0) / 2.0;
  const double cy = (static_cast<double>(rows) - 1.0) / 2.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      positions_.push_back({(static_cast<double>(c) - cx) * pitch_x,
                            (static_cast<double>(r) - cy) * pitch_y, 0.0});
    }
  }
}

ArrayGeometry build_matrix_array(std::size_t rows, std::size_t cols, double pitch_x,
                                 double pitch_y, double f0) {
  return ArrayGeometry(rows, cols, pitch_x, pitch_y, pitch_x, pitch_y, f0);
}

ArrayGeometry default_matrix_probe() {
  return build_matrix_array(32, 32, 9.3e-3 / 32.0, 10.2e-3 / 32.0, 7.8e6);
}

std::vector<double> tukey_window(std::size_t n, double alpha) {
  std::vector<double> w(n, 1.0);
  if (n < 2 || alpha <= 0.0) return w;
  alpha = std::min(alpha, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    if (x < alpha / 2.0) {
      w[i] = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi / alpha * (x - alpha / 2.0)));
    } else if (x > 1.0 - alpha / 2.0) {
      w[i] = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi / alpha * (x - 1.0 + alpha / 2.0)));
    }
  }
  return w;
}

std::vector<double> tukey_apodization(std::size_t rows, std::size_t cols, double alpha) {
  const auto wy = tukey_window(rows, alpha);
  const auto wx = tukey_window(cols, alpha);
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = wy[r] * wx[c];
  return out;
}

AcquisitionConfig default_acquisition(const ArrayGeometry& geom) {
  AcquisitionConfig acq;
  acq.sampling_frequency = 4.0 * geom.center_frequency();
  acq.transmit_apodization = tukey_apodization(geom.rows(), geom.cols(), 0.5);
  return acq;
}

void validate_acquisition(const AcquisitionConfig& acq, const ArrayGeometry& geom) {
  if (!(acq.speed_of_sound > 0.0) || !std::isfinite(acq.speed_of_sound))
    throw InvalidArgument("speed_of_sound must be positive");
  if (!(acq.sampling_frequency >= 4.0 * geom.center_frequency()))
    throw InvalidArgument("sampling_frequency must be at least 4x the center frequency");
  if (acq.pulse_cycles == 0) throw InvalidArgument("pulse_cycles must be at least 1");
  if (!(acq.frame_rate > 0.0)) throw InvalidArgument("frame_rate must be positive");
  if (!acq.transmit_apodization.empty()) {
    if (acq.transmit_apodization.size() != geom.element_count())
      throw InvalidArgument("transmit_apodization must have one weight per element");
    for (double w : acq.transmit_apodization)
      if (!(w >= 0.0 && w <= 1.0))
        throw InvalidArgument("transmit_apodization weights must lie in [0, 1]");
  }
}

void set_record_window(AcquisitionConfig& acq, const ArrayGeometry& geom, double z_min,
                       double z_max, double half_width, double margin_time) {
  const auto ap = geom.aperture();
  const double reach = half_width + 0.5 * std::hypot(ap[0], ap[1]);
  const double c = acq.speed_of_sound;
  const double t_first = std::max(0.0, 2.0 * z_min / c - margin_time);
  const double t_last = (z_max + std::hypot(z_max, reach)) / c +
                        2.0 * static_cast<double>(acq.pulse_cycles) / geom.center_frequency() +
                        margin_time;
  const double fs = acq.sampling_frequency;
  acq.record_start = std::floor(t_first * fs) / fs;
  acq.record_samples = static_cast<std::size_t>(std::ceil((t_last - acq.record_start) * fs)) + 1;
}

Scene Scene::at_frame(std::size_t frame) const {
  Scene out;
  out.scatterers = scatterers;
  if (motion) {
    const Vec3 d = motion(frame);
    for (auto& s : out.scatterers) s.position = s.position + d;
  }
  return out;
}

Scene five_scatterer_scene() {
  Scene scene;
  for (int i = 0; i < 5; ++i) {
    scene.scatterers.push_back({{0.0, 0.0, 15.0e-3 + 2.5e-3 * i}, 1.0 - 0.2 * i});
  }
  return scene;
}

VoxelGrid::VoxelGrid(const Vec3& origin, const Vec3& spacing, const Index3& dims)
    : origin_(origin), spacing_(spacing), dims_(dims) {
  if (!(spacing.x > 0.0) || !(spacing.y > 0.0) || !(spacing.z > 0.0))
    throw InvalidArgument("voxel spacing must be positive on all axes");
  if (dims.i == 0 || dims.j == 0 || dims.k == 0)
    throw InvalidArgument("voxel grid dimensions must be non-zero");
}

VoxelGrid VoxelGrid::centered(const Vec3& center, const Vec3& spacing, const Index3& dims) {
  const Vec3 origin{center.x - 0.5 * static_cast<double>(dims.i - 1) * spacing.x,
                    center.y - 0.5 * static_cast<double>(dims.j - 1) * spacing.y,
                    center.z - 0.5 * static_cast<double>(dims.k - 1) * spacing.z};
  return VoxelGrid(origin, spacing, dims);
}

VoxelGrid VoxelGrid::spanning(const Vec3& lo, const Vec3& hi, const Vec3& spacing) {
  auto count = [](double a, double b, double d) {
    if (!(d > 0.0) || b < a) throw InvalidArgument("invalid grid span");
    return static_cast<std::size_t>(std::floor((b - a) / d + 1e-9)) + 1;
  };
  return VoxelGrid(lo, spacing,
                   {count(lo.x, hi.x, spacing.x), count(lo.y, hi.y, spacing.y),
                    count(lo.z, hi.z, spacing.z)});
}

VoxelGrid VoxelGrid::refined(std::size_t factor) const {
  if (factor == 0) throw InvalidArgument("refinement factor must be positive");
  const double f = static_cast<double>(factor);
  return VoxelGrid(origin_, {spacing_.x / f, spacing_.y / f, spacing_.z / f},
                   {(dims_.i - 1) * factor + 1, (dims_.j - 1) * factor + 1,
                    (dims_.k - 1) * factor + 1});
}

}  // namespace usbf
