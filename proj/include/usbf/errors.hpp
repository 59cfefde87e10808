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

#ifndef USBF_ERRORS_HPP
#define USBF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace usbf {

/// Bad argument to an operation (non-positive pitch, scatterer behind the array, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A combination of settings that cannot be run (e.g. p-DAS on a coarse axial grid).
class InvalidConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested work does not fit in the memory budget.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, double required_bytes, double available_bytes)
      : std::runtime_error(what), required_bytes_(required_bytes), available_bytes_(available_bytes) {}

  double required_bytes() const { return required_bytes_; }
  double available_bytes() const { return available_bytes_; }

 private:
  double required_bytes_;
  double available_bytes_;
};

/// A metric region (main lobe, side-lobe shell, noise box) selected no voxels.
class InvalidRegion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A profile never dropped below half maximum inside the grid.
class WidthUnbounded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace usbf

#endif  // USBF_ERRORS_HPP
