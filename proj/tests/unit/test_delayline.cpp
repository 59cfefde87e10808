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

#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "usbf/delayline.hpp"
#include "usbf/errors.hpp"

using namespace usbf;

namespace {

struct Fixture {
  ArrayGeometry geom = default_matrix_probe();
  AcquisitionConfig acq = default_acquisition(default_matrix_probe());
  Vec3 target{0.0, 0.0, 20e-3};
  AnalyticFrame frame;
  Fixture() {
    set_record_window(acq, geom, 18e-3, 22e-3, 1e-3);
    Scene s;
    s.scatterers.push_back({target, 1.0});
    frame = analytic_signal(Simulator(geom, acq).frame(s));
  }
};

std::size_t nearest_to_axis(const ArrayGeometry& g) {
  std::size_t best = 0;
  for (std::size_t n = 0; n < g.element_count(); ++n)
    if (norm(g.position(n)) < norm(g.position(best))) best = n;
  return best;
}

}  // namespace

TEST_CASE("round-trip delay: time of flight plus the pulse-centering offset") {
  const ArrayGeometry g = default_matrix_probe();
  const AcquisitionConfig a = default_acquisition(g);
  const Vec3 v{0.0, 0.0, 20e-3};
  const std::size_t n = nearest_to_axis(g);
  const double offset = RoundTripWaveform(g.center_frequency(), a.pulse_cycles, a.sampling_frequency).peak_time();
  const double tau = round_trip_delay(v, n, g, a);
  CHECK(tau - offset == doctest::Approx(25.97e-6).epsilon(1e-3));
  CHECK(tau - offset == doctest::Approx((v.z + norm(v - g.position(n))) / 1540.0).epsilon(1e-14));
  CHECK_THROWS_AS(round_trip_delay({0, 0, 0}, 0, g, a), InvalidArgument);
}

TEST_CASE("round-trip delay symmetry and monotonicity") {
  const ArrayGeometry g = default_matrix_probe();
  const AcquisitionConfig a = default_acquisition(g);
  const Vec3 v{0.0, 0.0, 17e-3};
  // mirror pairs about the axis are equidistant from an on-axis voxel
  for (std::size_t n : {0u, 37u, 300u}) {
    const std::size_t mirror = g.element_count() - 1 - n;
    CHECK(round_trip_delay(v, n, g, a) == doctest::Approx(round_trip_delay(v, mirror, g, a)).epsilon(1e-14));
  }
  double prev = 0.0;
  for (double z = 1e-3; z < 40e-3; z += 0.5e-3) {
    const double t = round_trip_delay({0.3e-3, -0.2e-3, z}, 17, g, a);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("receive apodization near normal incidence is close to one") {
  const ArrayGeometry g = default_matrix_probe();
  const AcquisitionConfig a = default_acquisition(g);
  const auto ap = receive_apodization({0, 0, 200e-3}, g, a);
  for (double w : ap.a) CHECK(w > 0.98);
}

TEST_CASE("receive apodization cuts elements whose sensitivity falls below 0.5") {
  const ArrayGeometry g = default_matrix_probe();
  const AcquisitionConfig a = default_acquisition(g);
  const Vec3 v{4e-3, 0.0, 2e-3};
  const auto ap = receive_apodization(v, g, a);
  std::size_t cut = 0;
  for (std::size_t n = 0; n < g.element_count(); ++n) {
    const Vec3 d = normalized(v - g.position(n));
    const double exact = element_directivity(g, n, d, g.center_frequency(), a.speed_of_sound);
    if (std::abs(exact - 0.5) < 1e-6) continue;
    if (exact < 0.5) {
      CHECK(ap.a[n] == 0.0);
      ++cut;
    } else {
      CHECK(ap.a[n] == doctest::Approx(exact).epsilon(1e-7));
    }
  }
  CHECK(cut > 0);
  // in the row through y = 0 the far edge (most negative x) is cut, the near edge is not
  std::size_t far = 0, near = 0;
  for (std::size_t n = 0; n < g.element_count(); ++n) {
    const Vec3 p = g.position(n);
    if (std::abs(p.y - g.position(far).y) > 1e-12 && std::abs(p.y) < std::abs(g.position(far).y)) far = near = n;
  }
  for (std::size_t n = 0; n < g.element_count(); ++n) {
    const Vec3 p = g.position(n);
    if (p.y != g.position(far).y) continue;
    if (p.x < g.position(far).x) far = n;
    if (p.x > g.position(near).x) near = n;
  }
  CHECK(ap.a[far] == 0.0);
  CHECK(ap.a[near] > 0.0);
}

TEST_CASE("phase-rotated interpolation is exact for a tone at f0") {
  const double f0 = 7.8e6, fs = 4 * f0, w = 2 * M_PI * f0 / fs;
  std::vector<cplx> row(16);
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = std::polar(1.3, w * static_cast<double>(i) + 0.4);
  const SampleInterpolator pr(Interpolation::kPhaseRotated, f0, fs);
  const SampleInterpolator lin(Interpolation::kLinear, f0, fs);
  for (double frac : {0.0, 0.1, 0.37, 0.5, 0.93}) {
    const cplx ref = std::polar(1.3, w * (5.0 + frac) + 0.4);
    CHECK(std::abs(pr(row.data(), 5, frac) - ref) < 1e-6);
    const cplx lref = (1 - frac) * row[5] + frac * row[6];
    CHECK(std::abs(lin(row.data(), 5, frac) - lref) < 1e-15);
  }
  // at a quarter-wave sampling the linear rule visibly loses amplitude midway
  CHECK(std::abs(lin(row.data(), 5, 0.5)) < 1.0);
}

TEST_CASE("delayed samples at the scatterer are phase-coherent") {
  Fixture f;
  const auto ap = receive_apodization(f.target, f.geom, f.acq);
  const auto s = gather_delayed_samples(f.frame, f.target, f.geom, f.acq, ap);
  CHECK(s.valid_count() > 900);
  cplx mean(0, 0);
  for (std::size_t n = 0; n < s.s.size(); ++n)
    if (s.valid[n]) mean += s.s[n] / std::abs(s.s[n]);
  const double ref = std::arg(mean);
  for (std::size_t n = 0; n < s.s.size(); ++n) {
    if (!s.valid[n]) {
      CHECK(s.s[n] == cplx(0, 0));
      continue;
    }
    CHECK(std::abs(std::remainder(std::arg(s.s[n]) - ref, 2 * M_PI)) <= M_PI / 4);
  }
}

TEST_CASE("delayed samples outside the record window are masked to zero") {
  Fixture f;
  const Vec3 far{0.0, 0.0, 60e-3};
  const auto ap = receive_apodization(far, f.geom, f.acq);
  const auto s = gather_delayed_samples(f.frame, far, f.geom, f.acq, ap);
  CHECK(s.valid_count() == 0);
  for (const auto& v : s.s) CHECK(v == cplx(0, 0));
}

TEST_CASE("coherent sum peaks at the scatterer voxel (3x3x3 neighborhood)") {
  Fixture f;
  const double h = 5e-5;
  double centre = 0.0, best_other = 0.0;
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const Vec3 v = f.target + Vec3{di * h, dj * h, dk * h};
        const auto ap = receive_apodization(v, f.geom, f.acq);
        const auto s = gather_delayed_samples(f.frame, v, f.geom, f.acq, ap);
        cplx sum(0, 0);
        for (const auto& x : s.s) sum += x;
        if (di == 0 && dj == 0 && dk == 0)
          centre = std::abs(sum);
        else
          best_other = std::max(best_other, std::abs(sum));
      }
  CHECK(centre > best_other);
}

TEST_CASE("gather rejects mismatched apodization length") {
  Fixture f;
  ApodizationVector ap;
  ap.a.assign(3, 1.0);
  CHECK_THROWS_AS(gather_delayed_samples(f.frame, f.target, f.geom, f.acq, ap), InvalidArgument);
}
