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

#ifndef USBF_CORE_HPP
#define USBF_CORE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace usbf {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
Vec3 normalized(const Vec3& a);

/**
 * 2D matrix probe lying on the z=0 plane, centered at the origin.
 *
 * Elements are indexed row-major: n = r * cols + c, with columns along x
 * (lateral) and rows along y (elevation).
 */
class ArrayGeometry {
 public:
  ArrayGeometry(std::size_t rows, std::size_t cols, double pitch_x, double pitch_y,
                double element_width, double element_height, double center_frequency);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t element_count() const { return rows_ * cols_; }
  double pitch_x() const { return pitch_x_; }
  double pitch_y() const { return pitch_y_; }
  double element_width() const { return element_width_; }
  double element_height() const { return element_height_; }
  double center_frequency() const { return center_frequency_; }

  const Vec3& position(std::size_t n) const { return positions_[n]; }
  std::span<const Vec3> element_positions() const { return positions_; }

  /// (cols * pitch_x, rows * pitch_y)
  std::array<double, 2> aperture() const {
    return {static_cast<double>(cols_) * pitch_x_, static_cast<double>(rows_) * pitch_y_};
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  double pitch_x_;
  double pitch_y_;
  double element_width_;
  double element_height_;
  double center_frequency_;
  std::vector<Vec3> positions_;
};

/// Matrix array with kerf-free elements (element size equals pitch).
ArrayGeometry build_matrix_array(std::size_t rows, std::size_t cols, double pitch_x, double pitch_y,
                                 double f0);

/// 32x32 probe at 7.8 MHz with a 9.3 mm x 10.2 mm aperture.
ArrayGeometry default_matrix_probe();

/// Symmetric Tukey taper of `n` points; alpha = 0 is rectangular, alpha = 1 is Hann.
std::vector<double> tukey_window(std::size_t n, double alpha);

/// Outer product of two 1D Tukey windows, row-major over the array elements.
std::vector<double> tukey_apodization(std::size_t rows, std::size_t cols, double alpha);

enum class TransmitModel {
  kTaper,       ///< single taper factor evaluated at the scatterer's projected aperture position
  kElementSum,  ///< per-element transmit contributions summed (slow reference path)
};

struct AcquisitionConfig {
  double speed_of_sound = 1540.0;
  double sampling_frequency = 31.2e6;
  std::size_t pulse_cycles = 2;
  std::vector<double> transmit_apodization;  ///< rows*cols weights in [0,1]; empty means uniform
  double frame_rate = 500.0;
  double record_start = 0.0;        ///< time of the first RF sample (s)
  std::size_t record_samples = 0;   ///< RF samples per channel
  TransmitModel transmit_model = TransmitModel::kTaper;
};

/// Defaults for `geom`: 1540 m/s, fs = 4 f0, two-cycle pulse, 0.5 Tukey transmit taper.
AcquisitionConfig default_acquisition(const ArrayGeometry& geom);

/// Throws InvalidArgument naming the offending field.
void validate_acquisition(const AcquisitionConfig& acq, const ArrayGeometry& geom);

/// Record window covering echoes from depths [z_min, z_max] within lateral radius `half_width`.
void set_record_window(AcquisitionConfig& acq, const ArrayGeometry& geom, double z_min,
                       double z_max, double half_width, double margin_time = 1.0e-6);

struct Scatterer {
  Vec3 position;
  double coefficient = 1.0;
};

struct Scene {
  std::vector<Scatterer> scatterers;
  /// Optional rigid displacement applied at frame k.
  std::function<Vec3(std::size_t)> motion;

  Scene at_frame(std::size_t frame) const;
  bool empty() const { return scatterers.empty(); }
};

/// Five on-axis scatterers from 15 to 25 mm with coefficients 1.0 down to 0.2.
Scene five_scatterer_scene();

struct Index3 {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  friend bool operator==(const Index3&, const Index3&) = default;
};

/**
 * Regular 3D lattice; x is lateral, y elevation, z depth. Linear index is
 * x-fastest: idx = i + nx * (j + ny * k).
 */
class VoxelGrid {
 public:
  VoxelGrid() = default;  ///< empty (0 voxels)
  VoxelGrid(const Vec3& origin, const Vec3& spacing, const Index3& dims);

  /// Grid of `dims` voxels centered on `center`.
  static VoxelGrid centered(const Vec3& center, const Vec3& spacing, const Index3& dims);
  /// Grid spanning [lo, hi] on each axis (inclusive of both ends when they fall on the lattice).
  static VoxelGrid spanning(const Vec3& lo, const Vec3& hi, const Vec3& spacing);

  const Vec3& origin() const { return origin_; }
  const Vec3& spacing() const { return spacing_; }
  const Index3& dims() const { return dims_; }
  std::size_t nx() const { return dims_.i; }
  std::size_t ny() const { return dims_.j; }
  std::size_t nz() const { return dims_.k; }
  std::size_t size() const { return dims_.i * dims_.j * dims_.k; }

  std::size_t flatten(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims_.i * (j + dims_.j * k);
  }
  std::size_t flatten(const Index3& idx) const { return flatten(idx.i, idx.j, idx.k); }
  Index3 unflatten(std::size_t idx) const {
    return {idx % dims_.i, (idx / dims_.i) % dims_.j, idx / (dims_.i * dims_.j)};
  }

  Vec3 position(std::size_t i, std::size_t j, std::size_t k) const {
    return {origin_.x + static_cast<double>(i) * spacing_.x,
            origin_.y + static_cast<double>(j) * spacing_.y,
            origin_.z + static_cast<double>(k) * spacing_.z};
  }
  Vec3 position(const Index3& idx) const { return position(idx.i, idx.j, idx.k); }

  /// Continuous (fractional) voxel coordinates of a world point.
  Vec3 to_voxel(const Vec3& p) const {
    return {(p.x - origin_.x) / spacing_.x, (p.y - origin_.y) / spacing_.y,
            (p.z - origin_.z) / spacing_.z};
  }

  /// Same extent, spacing divided by `factor` on every axis.
  VoxelGrid refined(std::size_t factor) const;

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 private:
  Vec3 origin_;
  Vec3 spacing_;
  Index3 dims_;
};

}  // namespace usbf

#endif  // USBF_CORE_HPP
