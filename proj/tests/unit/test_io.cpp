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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "doctest.h"
#include "usbf/errors.hpp"
#include "usbf/io.hpp"

using namespace usbf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("usbf_io_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("FNV-1a reference vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("channel sequence round trip keeps float32 values") {
  TempDir d;
  ChannelSequence seq;
  seq.frame_rate = 250.0;
  for (int f = 0; f < 3; ++f) {
    ChannelFrame fr(4, 7, 1.25e-5, 31.2e6);
    for (std::size_t i = 0; i < fr.data.size(); ++i) fr.data[i] = 0.25 * static_cast<double>(i) - f;
    seq.frames.push_back(fr);
  }
  const auto path = d.file("seq.usbf");
  write_channel_sequence(path, seq);
  CHECK(fs::exists(path + ".json"));
  const auto back = read_channel_sequence(path);
  REQUIRE(back.frames.size() == 3);
  CHECK(back.frame_rate == 250.0);
  CHECK(back.frames[1].t0 == 1.25e-5);
  CHECK(back.frames[1].sampling_frequency == 31.2e6);
  CHECK(back.frames[2].data == seq.frames[2].data);
  const FileHeader h = read_header(path);
  CHECK(h.kind == DataKind::kChannelSequence);
  CHECK(h.dims[0] == 3);
}

TEST_CASE("volumes and density round trip") {
  TempDir d;
  const VoxelGrid g = VoxelGrid::centered({0, 0, 20e-3}, {5e-5, 5e-5, 5e-5}, {3, 4, 5});
  std::vector<BeamformedVolume> vols(2);
  for (std::size_t f = 0; f < 2; ++f) {
    vols[f].grid = g;
    vols[f].kind = make_kind(Method::kCVN);
    vols[f].values.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) vols[f].values[i] = static_cast<double>(i + f) / 8.0;
  }
  const std::vector<double> secs{0.5, 1.5};
  write_volumes(d.file("v.usbf"), vols, secs);
  const auto back = read_volumes(d.file("v.usbf"));
  REQUIRE(back.size() == 2);
  CHECK(back[1].values == vols[1].values);
  CHECK(back[0].kind.method == Method::kCVN);
  CHECK(back[0].grid.nx() == 3);
  CHECK(back[0].grid.origin().z == doctest::Approx(g.origin().z));
  CHECK(read_mean_frame_seconds(d.file("v.usbf")) == doctest::Approx(1.0));

  DensityMap m{g, std::vector<double>(g.size(), 0.0), 4};
  m.counts[7] = 3;
  write_density(d.file("d.usbf"), m);
  const DensityMap mb = read_density(d.file("d.usbf"));
  CHECK(mb.counts == m.counts);
  CHECK(mb.total() == 3.0);
  CHECK_THROWS_AS(read_channel_sequence(d.file("d.usbf")), InvalidArgument);
}

TEST_CASE("CSV round trips") {
  TempDir d;
  const std::vector<GroundTruthRow> gt{{0, {1e-4, -2e-4, 2e-2}, 0.8, 0}, {3, {0, 0, 1.5e-2}, 1.0, 1}};
  write_ground_truth_csv(d.file("gt.csv"), gt);
  const auto gb = read_ground_truth_csv(d.file("gt.csv"));
  REQUIRE(gb.size() == 2);
  CHECK(gb[1].frame == 3);
  CHECK(gb[1].tube == 1);
  CHECK(gb[0].position.y == doctest::Approx(-2e-4));
  const std::vector<LocalizationEvent> ev{{2, {1.234567e-4, 0, 2e-2}, 0.75}};
  write_events_csv(d.file("e.csv"), ev);
  const auto eb = read_events_csv(d.file("e.csv"));
  REQUIRE(eb.size() == 1);
  CHECK(eb[0].frame == 2);
  CHECK(eb[0].position.x == doctest::Approx(1.234567e-4).epsilon(1e-6));
  CHECK(eb[0].ncc_peak == doctest::Approx(0.75));
}

TEST_CASE("bad magic and missing files are rejected") {
  TempDir d;
  std::ofstream(d.file("junk.usbf"), std::ios::binary) << "NOPE0000000000000000000000000000000000000";
  CHECK_THROWS_AS(read_header(d.file("junk.usbf")), InvalidArgument);
  CHECK_THROWS_AS(read_channel_sequence(d.file("missing.usbf")), InvalidArgument);
}
