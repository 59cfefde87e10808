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

#include "usbf/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "usbf/errors.hpp"

namespace usbf {
namespace {

// fftw planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Plan {
 public:
  Plan(int n, int howmany, fftw_complex* buf, int sign) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_many_dft(1, &n, howmany, buf, nullptr, 1, n, buf, nullptr, 1, n, sign,
                               FFTW_ESTIMATE);
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    if (plan_ != nullptr) fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void execute(fftw_complex* buf) const { fftw_execute_dft(plan_, buf, buf); }

 private:
  fftw_plan plan_ = nullptr;
};

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void analytic_rows(std::span<const double> in, std::size_t rows, std::size_t len,
                   std::span<cplx> out) {
  if (in.size() != rows * len || out.size() != rows * len)
    throw InvalidArgument("analytic_rows: buffer size mismatch");
  if (rows == 0 || len == 0) return;
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = cplx(in[i], 0.0);

  const int n = static_cast<int>(len);
  Plan fwd(n, static_cast<int>(rows), as_fftw(out.data()), FFTW_FORWARD);
  Plan inv(n, static_cast<int>(rows), as_fftw(out.data()), FFTW_BACKWARD);
  fwd.execute(as_fftw(out.data()));

  const double inv_len = 1.0 / static_cast<double>(len);
  const std::size_t half = len / 2;
  for (std::size_t r = 0; r < rows; ++r) {
    cplx* row = out.data() + r * len;
    row[0] *= inv_len;
    for (std::size_t k = 1; k < len; ++k) {
      if (len % 2 == 0 && k == half) {
        row[k] *= inv_len;
      } else if (k <= (len - 1) / 2) {
        row[k] *= 2.0 * inv_len;
      } else {
        row[k] = 0.0;
      }
    }
  }
  inv.execute(as_fftw(out.data()));
}

std::vector<cplx> analytic_1d(std::span<const double> x) {
  std::vector<cplx> out(x.size());
  analytic_rows(x, 1, x.size(), out);
  return out;
}

double BandPass::gain(double f) const {
  f = std::abs(f);
  if (f >= f_lo && f <= f_hi) return 1.0;
  if (skirt <= 0.0) return 0.0;
  const double d = f < f_lo ? f_lo - f : f - f_hi;
  if (d >= skirt) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * d / skirt));
}

std::vector<cplx> bandpass_analytic(std::span<const double> x, double fs, const BandPass& band) {
  const std::size_t len = x.size();
  std::vector<cplx> buf(len);
  if (len == 0) return buf;
  for (std::size_t i = 0; i < len; ++i) buf[i] = cplx(x[i], 0.0);
  const int n = static_cast<int>(len);
  Plan fwd(n, 1, as_fftw(buf.data()), FFTW_FORWARD);
  Plan inv(n, 1, as_fftw(buf.data()), FFTW_BACKWARD);
  fwd.execute(as_fftw(buf.data()));
  const double inv_len = 1.0 / static_cast<double>(len);
  for (std::size_t k = 0; k < len; ++k) {
    const bool positive = k > 0 && 2 * k < len;
    const bool edge = k == 0 || 2 * k == len;
    const double f = static_cast<double>(k) * fs / static_cast<double>(len);
    const double scale = positive ? 2.0 : (edge ? 1.0 : 0.0);
    buf[k] *= scale * band.gain(f) * inv_len;
  }
  inv.execute(as_fftw(buf.data()));
  return buf;
}

}  // namespace usbf
