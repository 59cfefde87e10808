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

// Python bindings: config-driven simulate / beamform / metrics plus the per-voxel weights.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "usbf/pipeline.hpp"

namespace py = pybind11;
using namespace usbf;

namespace {

using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using C128 = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

py::array_t<double> rf_array(const ChannelSequence& seq) {
  if (seq.frames.empty()) return py::array_t<double>(std::vector<py::ssize_t>{0, 0, 0});
  const auto& f0 = seq.frames.front();
  py::array_t<double> out({seq.frames.size(), f0.channels, f0.samples});
  double* dst = out.mutable_data();
  for (const auto& f : seq.frames) {
    std::memcpy(dst, f.data.data(), f.data.size() * sizeof(double));
    dst += f.data.size();
  }
  return out;
}

ChannelSequence rf_sequence(const F64& rf, double t0, double fs, double frame_rate) {
  if (rf.ndim() != 3) throw InvalidArgument("rf must have shape (frames, channels, samples)");
  ChannelSequence seq;
  seq.frame_rate = frame_rate;
  const auto n = static_cast<std::size_t>(rf.shape(1));
  const auto t = static_cast<std::size_t>(rf.shape(2));
  const double* src = rf.data();
  for (py::ssize_t f = 0; f < rf.shape(0); ++f) {
    ChannelFrame fr(n, t, t0, fs);
    std::memcpy(fr.data.data(), src, n * t * sizeof(double));
    src += n * t;
    seq.frames.push_back(std::move(fr));
  }
  return seq;
}

py::array_t<double> volume_array(const std::vector<BeamformedVolume>& vols, const VoxelGrid& g) {
  py::array_t<double> out({vols.size(), g.nz(), g.ny(), g.nx()});
  double* dst = out.mutable_data();
  for (const auto& v : vols) {
    std::memcpy(dst, v.values.data(), v.values.size() * sizeof(double));
    dst += v.values.size();
  }
  return out;
}

BeamformedVolume volume_from(const F64& vol, const VoxelGrid& g, Method m) {
  if (vol.ndim() != 3 || static_cast<std::size_t>(vol.shape(0)) != g.nz() ||
      static_cast<std::size_t>(vol.shape(1)) != g.ny() || static_cast<std::size_t>(vol.shape(2)) != g.nx())
    throw InvalidArgument("volume must have shape (nz, ny, nx) of the config grid");
  BeamformedVolume v;
  v.grid = g;
  v.kind = make_kind(m);
  v.values.assign(vol.data(), vol.data() + vol.size());
  return v;
}

std::vector<std::uint8_t> all_valid(std::size_t n) { return std::vector<std::uint8_t>(n, 1); }

}  // namespace

PYBIND11_MODULE(_usbf, m) {
  m.doc() = "3D plane-wave ultrasound beamforming (DAS, p-DAS, CF, CV_N, CV)";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<InvalidConfiguration>(m, "InvalidConfiguration", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_MemoryError);

  py::class_<RunConfig>(m, "Config")
      .def(py::init([](const std::string& yaml) { return parse_config(yaml, "<python>"); }),
           py::arg("yaml") = "")
      .def_static("load", &load_config, py::arg("path"))
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("workers", &RunConfig::workers)
      .def_property(
          "method", [](const RunConfig& c) { return std::string(method_name(c.kind.method)); },
          [](RunConfig& c, const std::string& s) { c.kind.method = parse_method(s); })
      .def_property_readonly("grid_shape",
                             [](const RunConfig& c) {
                               const auto& g = c.require_grid();
                               return py::make_tuple(g.nz(), g.ny(), g.nx());
                             })
      .def_property_readonly("grid_origin",
                             [](const RunConfig& c) {
                               const auto& o = c.require_grid().origin();
                               return py::make_tuple(o.x, o.y, o.z);
                             })
      .def_property_readonly("grid_spacing", [](const RunConfig& c) {
        const auto& s = c.require_grid().spacing();
        return py::make_tuple(s.x, s.y, s.z);
      });

  m.def(
      "simulate",
      [](const RunConfig& cfg) {
        SimulationOutput out;
        {
          py::gil_scoped_release release;
          out = simulate_scene(cfg, cfg.workers);
        }
        py::array_t<double> truth({out.truth.size(), std::size_t{5}});
        auto t = truth.mutable_unchecked<2>();
        for (std::size_t r = 0; r < out.truth.size(); ++r) {
          const auto& row = out.truth[r];
          t(r, 0) = static_cast<double>(row.frame);
          t(r, 1) = row.position.x;
          t(r, 2) = row.position.y;
          t(r, 3) = row.position.z;
          t(r, 4) = row.coefficient;
        }
        py::dict d;
        d["rf"] = rf_array(out.sequence);
        d["t0"] = out.acquisition.record_start;
        d["fs"] = out.acquisition.sampling_frequency;
        d["frame_rate"] = out.sequence.frame_rate;
        d["truth"] = truth;
        return d;
      },
      py::arg("config"),
      "Simulate the config scene. Returns rf (frames, channels, samples), t0, fs, frame_rate and "
      "truth rows (frame, x, y, z, coefficient).");

  m.def(
      "beamform",
      [](const RunConfig& cfg, const F64& rf, double t0, double fs, double frame_rate,
         std::optional<std::string> method, bool normalize) {
        const ChannelSequence seq = rf_sequence(rf, t0, fs, frame_rate);
        BeamformerKind kind = cfg.kind;
        if (method) kind.method = parse_method(*method);
        kind.validate();
        const VoxelGrid& g = cfg.require_grid();
        BeamformOptions opts;
        opts.workers = cfg.workers;
        opts.normalize = normalize;
        BeamformResult res;
        {
          py::gil_scoped_release release;
          res = beamform_volume(seq, g, kind, cfg.geom, acquisition_for(cfg, seq), opts);
        }
        return py::make_tuple(volume_array(res.volumes, g), res.frame_seconds);
      },
      py::arg("config"), py::arg("rf"), py::arg("t0"), py::arg("fs"), py::arg("frame_rate") = 500.0,
      py::arg("method") = py::none(), py::arg("normalize") = false,
      "Beamform rf onto the config grid. Returns (volumes (frames, nz, ny, nx), seconds per frame).");

  m.def(
      "psf_metrics",
      [](const RunConfig& cfg, const F64& volume, const F64& positions, std::optional<std::string> method) {
        if (positions.ndim() != 2 || positions.shape(1) != 3)
          throw InvalidArgument("positions must have shape (n, 3)");
        Scene scene;
        auto p = positions.unchecked<2>();
        for (py::ssize_t r = 0; r < positions.shape(0); ++r) scene.scatterers.push_back({{p(r, 0), p(r, 1), p(r, 2)}, 1.0});
        const Method mt = method ? parse_method(*method) : cfg.kind.method;
        const PsfMetrics pm = compute_psf_metrics(volume_from(volume, cfg.require_grid(), mt), scene);
        py::dict d;
        d["lateral_fwhm_mm"] = pm.lateral_fwhm;
        d["elevational_fwhm_mm"] = pm.elevational_fwhm;
        d["spsmr_db"] = pm.spsmr;
        d["max_psmr_db"] = pm.max_psmr;
        d["snr_db"] = pm.snr.db;
        d["snr_capped"] = pm.snr.capped;
        return d;
      },
      py::arg("config"), py::arg("volume"), py::arg("positions"), py::arg("method") = py::none());

  m.def(
      "cf_weight",
      [](const C128& s, bool normalized) {
        const std::span<const cplx> v(s.data(), static_cast<std::size_t>(s.size()));
        return cf_weight(v, all_valid(v.size()), normalized);
      },
      py::arg("samples"), py::arg("normalized") = true);

  m.def(
      "cv_weight",
      [](const C128& s, const F64& a, bool inverse_apodize, double epsilon) {
        if (a.size() != s.size()) throw InvalidArgument("apodization length does not match samples");
        const std::span<const cplx> v(s.data(), static_cast<std::size_t>(s.size()));
        return cv_weight(v, all_valid(v.size()), std::span<const double>(a.data(), v.size()), inverse_apodize,
                         epsilon);
      },
      py::arg("samples"), py::arg("apodization"), py::arg("inverse_apodize") = true, py::arg("epsilon") = 1e-10);

  m.def("methods", [] {
    std::vector<std::string> out;
    for (Method mt : all_methods()) out.emplace_back(method_name(mt));
    return out;
  });
}
