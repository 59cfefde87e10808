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

#ifndef USBF_FFT_HPP
#define USBF_FFT_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace usbf {

using cplx = std::complex<double>;

/**
 * One-sided spectrum construction on `rows` contiguous series of length
 * `len`: forward DFT, negative-frequency bins zeroed, positive bins doubled
 * (DC and Nyquist kept), inverse DFT. The real part of the result equals
 * the input up to rounding.
 */
void analytic_rows(std::span<const double> in, std::size_t rows, std::size_t len,
                   std::span<cplx> out);

std::vector<cplx> analytic_1d(std::span<const double> x);

/// Zero-phase passband [f_lo, f_hi] with raised-cosine skirts of width `skirt` on each side.
struct BandPass {
  double f_lo = 0.0;
  double f_hi = 0.0;
  double skirt = 0.0;

  double gain(double f) const;
};

/// Analytic signal of `x` after the zero-phase band-pass, sampled at `fs`.
std::vector<cplx> bandpass_analytic(std::span<const double> x, double fs, const BandPass& band);

}  // namespace usbf

#endif  // USBF_FFT_HPP
