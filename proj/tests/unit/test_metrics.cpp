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
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "usbf/delayline.hpp"
#include "usbf/errors.hpp"
#include "usbf/metrics.hpp"
#include "usbf/simulator.hpp"

using namespace usbf;

namespace {

BeamformedVolume gaussian_volume(const VoxelGrid& grid, const std::vector<Vec3>& centers,
                                 const std::vector<double>& amps, double sigma) {
  BeamformedVolume v;
  v.grid = grid;
  v.values.assign(grid.size(), 0.0);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Vec3 p = grid.position(grid.unflatten(idx));
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const Vec3 d = p - centers[c];
      v.values[idx] += amps[c] * std::exp(-dot(d, d) / (2 * sigma * sigma));
    }
  }
  return v;
}

}  // namespace

TEST_CASE("profile FWHM of a triangle is exact under linear interpolation") {
  // Triangle 0,1,2,3,4,3,2,1,0: half max 2 is hit at samples 2 and 6.
  const std::vector<double> tri{0, 1, 2, 3, 4, 3, 2, 1, 0};
  CHECK(profile_fwhm(tri, 4, 0.5) == doctest::Approx(2.0));
  const std::vector<double> flat{1, 1, 1, 1};
  CHECK_THROWS_AS(profile_fwhm(flat, 1, 1.0), WidthUnbounded);
}

TEST_CASE("FWHM of a sampled Gaussian matches 2 sqrt(2 ln 2) sigma") {
  const double sigma = 0.2e-3;
  const double h = 0.05e-3;
  const VoxelGrid grid = VoxelGrid::centered({0, 0, 20e-3}, {h, h, h}, {41, 41, 41});
  const auto v = gaussian_volume(grid, {{0, 0, 20e-3}}, {1.0}, sigma);
  const Index3 pk = grid.unflatten(v.argmax());
  const double expect = 2 * std::sqrt(2 * std::log(2.0)) * sigma * 1e3;
  for (Axis a : {Axis::kX, Axis::kY, Axis::kZ})
    CHECK(std::abs(fwhm(v, pk, a) - expect) <= 0.5 * h * 1e3);
}

TEST_CASE("single-voxel impulse has sub-voxel width") {
  const double h = 0.05e-3;
  const VoxelGrid grid = VoxelGrid::centered({0, 0, 20e-3}, {h, h, h}, {9, 9, 9});
  BeamformedVolume v;
  v.grid = grid;
  v.values.assign(grid.size(), 0.0);
  v.values[grid.flatten(4, 4, 4)] = 1.0;
  CHECK(fwhm(v, {4, 4, 4}, Axis::kX) <= 0.1);
  v.values[grid.flatten(0, 4, 4)] = 1.0;  // plateau reaching the edge
  for (std::size_t i = 0; i < 9; ++i) v.values[grid.flatten(i, 4, 4)] = 1.0;
  CHECK_THROWS_AS(fwhm(v, {4, 4, 4}, Axis::kX), WidthUnbounded);
}

TEST_CASE("SNR against a direct computation") {
  BeamformedVolume v;
  v.grid = VoxelGrid::centered({0, 0, 1e-3}, {1e-4, 1e-4, 1e-4}, {2, 2, 2});
  v.values = {4, 2, 1, -1, 1, -1, 1, -1};
  const std::vector<std::size_t> sig{0, 1};
  const std::vector<std::size_t> noise{2, 3, 4, 5, 6, 7};
  // mean signal 3, noise RMS 1
  CHECK(image_snr(v, sig, noise).db == doctest::Approx(20 * std::log10(3.0)));
  v.values = {4, 2, 0, 0, 0, 0, 0, 0};
  const auto capped = image_snr(v, sig, noise);
  CHECK(capped.capped);
  CHECK(capped.db == kSnrCap);
}

TEST_CASE("midgap noise slabs sit between depths") {
  const VoxelGrid grid = VoxelGrid::spanning({0, 0, 14e-3}, {0, 0, 26e-3}, {5e-5, 5e-5, 5e-5});
  const auto idx = midgap_noise_region(grid, {25e-3, 15e-3, 20e-3});
  REQUIRE(!idx.empty());
  for (std::size_t i : idx) {
    const double z = grid.position(grid.unflatten(i)).z;
    CHECK(std::min(std::abs(z - 17.5e-3), std::abs(z - 22.5e-3)) <= 0.25e-3 + 1e-12);
  }
}

TEST_CASE("side-lobe ratios on two Gaussians with a side lobe") {
  const double h = 0.05e-3;
  const VoxelGrid grid = VoxelGrid::spanning({-1e-3, -1e-3, 18e-3}, {1e-3, 1e-3, 22e-3}, {h, h, h});
  // Main lobes at 19 and 21 mm; a 0.1-amplitude copy 0.6 mm to the side of the first.
  const auto v = gaussian_volume(grid, {{0, 0, 19e-3}, {0, 0, 21e-3}, {0.6e-3, 0, 19e-3}},
                                 {1.0, 0.5, 0.1}, 0.05e-3);
  const std::vector<MainLobe> lobes{main_lobe_region(v, {0, 0, 19e-3}), main_lobe_region(v, {0, 0, 21e-3})};
  CHECK(spsmr(v, 0, lobes) == doctest::Approx(20 * std::log10(0.1)).epsilon(1e-3));
  const auto c = cpsmr_and_max(v, lobes);
  REQUIRE(c.count == 2);
  // side of lobe 0 against main of lobe 1 is the worst ratio
  CHECK(c.at(0, 1) == doctest::Approx(20 * std::log10(0.1 / 0.5)).epsilon(1e-3));
  CHECK(c.max_psmr >= spsmr(v, 0, lobes));
  CHECK(c.max_psmr >= spsmr(v, 1, lobes));
}

TEST_CASE("max-PSMR never falls below either SPSMR (property)") {
  const double h = 0.1e-3;
  const VoxelGrid grid = VoxelGrid::spanning({-1e-3, -1e-3, 18e-3}, {1e-3, 1e-3, 22e-3}, {h, h, h});
  for (int t = 0; t < 20; ++t) {
    const double a = 0.05 + 0.04 * t;
    const auto v = gaussian_volume(grid, {{0, 0, 19e-3}, {0, 0, 21e-3}, {0.7e-3, 0.3e-3, 21e-3}},
                                   {1.0, 0.2 + 0.03 * t, a}, 0.12e-3);
    const std::vector<MainLobe> lobes{main_lobe_region(v, {0, 0, 19e-3}), main_lobe_region(v, {0, 0, 21e-3})};
    const auto c = cpsmr_and_max(v, lobes);
    for (std::size_t i = 0; i < 2; ++i) CHECK(c.max_psmr >= spsmr(v, i, lobes) - 1e-12);
  }
}

TEST_CASE("MIP against a direct maximum") {
  const VoxelGrid grid = VoxelGrid::centered({0, 0, 1e-3}, {1e-4, 2e-4, 3e-4}, {3, 4, 5});
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::sin(1.7 * static_cast<double>(i));
  const Image2D img = mip(grid, vals, Axis::kY);
  REQUIRE(img.width == 3);
  REQUIRE(img.height == 5);
  CHECK(img.spacing_u == 1e-4);
  CHECK(img.spacing_v == 3e-4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 5; ++k) {
      double m = -1e9;
      for (std::size_t j = 0; j < 4; ++j) m = std::max(m, vals[grid.flatten(i, j, k)]);
      CHECK(img.at(i, k) == m);
    }
  const auto pr = profile(img, {1, 1, 3});
  REQUIRE(pr.size() == 3);
  CHECK(pr[2] == doctest::Approx((img.at(2, 1) + img.at(2, 2) + img.at(2, 3)) / 3));
}

TEST_CASE("channel phases are coherent at focus and spread at a side lobe") {
  const ArrayGeometry geom = default_matrix_probe();
  AcquisitionConfig acq = default_acquisition(geom);
  set_record_window(acq, geom, 19e-3, 21e-3, 2e-3);
  Scene s;
  s.scatterers.push_back({{0, 0, 20e-3}, 1.0});
  const AnalyticFrame af = analytic_signal(Simulator(geom, acq).frame(s));
  auto support = [&](const Vec3& v) {
    const auto ap = receive_apodization(v, geom, acq);
    return channel_histogram(gather_delayed_samples(af, v, geom, acq, ap), 8, 36).phase_support_fraction(0.9);
  };
  CHECK(support({0, 0, 20e-3}) < 0.1);
  for (double x : {0.6e-3, 1.2e-3, 2.0e-3}) CHECK(support({x, 0, 20e-3}) > 0.5);
}

TEST_CASE("PGM writer emits a valid header and size") {
  Image2D img;
  img.width = 4;
  img.height = 3;
  img.values = {1, 0.5, 0.1, 0, 1, 1, 1, 1, 0.01, 0.2, 0.3, 0.4};
  const std::string path = "usbf_unit_test.pgm";
  write_pgm(path, img, 40.0);
  std::ifstream f(path, std::ios::binary);
  std::string magic;
  std::size_t w = 0, h = 0, maxv = 0;
  f >> magic >> w >> h >> maxv;
  f.get();
  std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(magic == "P5");
  CHECK(w == 4);
  CHECK(h == 3);
  CHECK(maxv == 255);
  CHECK(body.size() == 12);
  CHECK(static_cast<unsigned char>(body[0]) == 255);
  CHECK(static_cast<unsigned char>(body[3]) == 0);
  std::remove(path.c_str());
}
