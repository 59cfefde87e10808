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

#include "usbf/beamformers.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numbers>

#include "usbf/errors.hpp"
#include "usbf/fft.hpp"

namespace usbf {
namespace {

constexpr std::array<Method, 5> kMethods{Method::kDAS, Method::kPDAS, Method::kCF, Method::kCVN,
                                         Method::kCV};

// Largest axial spacing at which p-th power harmonics stay below Nyquist.
constexpr double kMaxPdasSpacing = 1e-5;

// Fine axial line used by p-DAS for one (x, y) column.
struct PdasLayout {
  std::size_t factor = 1;
  std::size_t pad = 0;
  std::size_t count = 0;
  double dz = 0.0;
  double z_lo = 0.0;

  PdasLayout(const VoxelGrid& grid, const BeamformerKind& kind) {
    const double ratio = grid.spacing().z / kind.fine_dz;
    factor = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio)));
    if (ratio > 1.0 && std::abs(ratio - static_cast<double>(factor)) > 1e-6)
      factor = static_cast<std::size_t>(std::ceil(ratio));
    dz = grid.spacing().z / static_cast<double>(factor);
    if (kind.p > 1.0 && dz > kMaxPdasSpacing * (1.0 + 1e-9))
      throw InvalidConfiguration("p-DAS with p > 1 needs an axial spacing of 0.01 mm or finer");
    pad = static_cast<std::size_t>(std::ceil(0.25e-3 / dz));
    count = (grid.nz() - 1) * factor + 1 + 2 * pad;
    z_lo = grid.origin().z - static_cast<double>(pad) * dz;
  }

  double z(std::size_t m) const { return z_lo + static_cast<double>(m) * dz; }
};

PdasRecovery recovery_params(const BeamformerKind& kind, const ArrayGeometry& geom,
                             const AcquisitionConfig& acq, double dz) {
  return {kind.p, geom.center_frequency(), acq.speed_of_sound, dz, kind.bandwidth};
}

void check_inputs(const ChannelSequence& seq, const ArrayGeometry& geom) {
  seq.validate();
  for (const auto& f : seq.frames) {
    if (f.channels != geom.element_count())
      throw InvalidArgument("channel count does not match the array element count");
    if (f.samples < 2) throw InvalidArgument("frames need at least two samples");
  }
}

// Per-worker scratch space reused across voxels.
struct Scratch {
  std::vector<std::uint32_t> index;
  std::vector<cplx> w0;
  std::vector<cplx> w1;
  std::vector<double> apod;
  std::vector<std::uint8_t> valid;
  std::vector<cplx> s;
  std::vector<double> real;

  explicit Scratch(std::size_t n) : index(n), w0(n), w1(n), apod(n), valid(n), s(n), real(n) {}
};

struct VoxelContext {
  const ArrayGeometry* geom;
  DirectivityModel directivity;
  SampleInterpolator interpolate;
  double inv_c;
  double offset;
  double t0;
  double fs;
  std::size_t samples;
};

// Fills index/weights/apod/valid for one voxel. Same arithmetic as
// DelayLaw, receive_apodization and SampleInterpolator.
void voxel_geometry(const Vec3& v, const VoxelContext& ctx, Scratch& sc) {
  const ArrayGeometry& geom = *ctx.geom;
  for (std::size_t n = 0; n < geom.element_count(); ++n) {
    const Vec3 d = v - geom.position(n);
    const double r = norm(d);
    double w = ctx.directivity((1.0 / r) * d);
    if (w < kSensitivityCutoff) w = 0.0;
    sc.apod[n] = w;
    sc.valid[n] = 0;
    if (w == 0.0) continue;
    std::size_t i = 0;
    double frac = 0.0;
    if (detail::sample_position((v.z + r) * ctx.inv_c + ctx.offset, ctx.t0, ctx.fs, ctx.samples, i,
                                frac)) {
      sc.index[n] = static_cast<std::uint32_t>(i);
      ctx.interpolate.weights(frac, sc.w0[n], sc.w1[n]);
      sc.valid[n] = 1;
    }
  }
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kDAS: return "das";
    case Method::kPDAS: return "pdas";
    case Method::kCF: return "cf";
    case Method::kCVN: return "cvn";
    case Method::kCV: return "cv";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "p-das") lower = "pdas";
  if (lower == "cv_n") lower = "cvn";
  for (Method m : kMethods)
    if (method_name(m) == lower) return m;
  throw InvalidArgument("unknown beamforming method '" + std::string(name) +
                        "'; valid methods: das, pdas, cf, cvn, cv");
}

std::span<const Method> all_methods() { return kMethods; }

void BeamformerKind::validate() const {
  if (!(p >= 1.0)) throw InvalidConfiguration("p must be at least 1");
  if (!(epsilon > 0.0)) throw InvalidConfiguration("epsilon must be positive");
  if (!(bandwidth > 0.0 && bandwidth < 2.0))
    throw InvalidConfiguration("bandwidth must lie in (0, 2)");
  if (!(fine_dz > 0.0)) throw InvalidConfiguration("fine_dz must be positive");
  if (method == Method::kPDAS && p > 1.0 && fine_dz > kMaxPdasSpacing * (1.0 + 1e-9))
    throw InvalidConfiguration("p-DAS with p > 1 needs an axial spacing of 0.01 mm or finer");
}

BeamformerKind make_kind(Method m) {
  BeamformerKind k;
  k.method = m;
  return k;
}

cplx das(std::span<const cplx> s, std::span<const std::uint8_t> valid, std::span<const double> a) {
  cplx acc(0.0, 0.0);
  for (std::size_t n = 0; n < s.size(); ++n)
    if (valid[n] != 0) acc += a[n] * s[n];
  return acc;
}

cplx das(const DelayedSampleVector& s, const ApodizationVector& a) {
  if (s.s.size() != a.a.size()) throw InvalidArgument("das: length mismatch");
  return das(s.s, s.valid, a.a);
}

double pdas_accumulate(std::span<const double> s, double p) {
  double acc = 0.0;
  if (p == 1.0) {
    for (double x : s) acc += x;
    return acc;
  }
  if (p == 4.0) {
    for (double x : s) acc += std::copysign(std::sqrt(std::sqrt(std::abs(x))), x);
    return acc;
  }
  const double inv_p = 1.0 / p;
  for (double x : s) acc += std::copysign(std::pow(std::abs(x), inv_p), x);
  return acc;
}

std::vector<double> pdas_accumulate(std::span<const double> block, std::size_t channels, double p) {
  if (channels == 0 || block.size() % channels != 0)
    throw InvalidArgument("pdas_accumulate: block is not depths x channels");
  std::vector<double> out(block.size() / channels);
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = pdas_accumulate(block.subspan(m * channels, channels), p);
  return out;
}

std::vector<double> pdas_recover(std::span<const double> yhat, const PdasRecovery& params) {
  if (params.p > 1.0 && params.dz > kMaxPdasSpacing * (1.0 + 1e-9))
    throw InvalidConfiguration("p-DAS with p > 1 needs an axial spacing of 0.01 mm or finer");
  std::vector<double> y(yhat.begin(), yhat.end());
  if (params.p != 1.0)
    for (double& v : y) v = std::copysign(std::pow(std::abs(v), params.p), v);

  // Depth z maps to round-trip time 2z/c.
  const double fs_axial = params.speed_of_sound / (2.0 * params.dz);
  BandPass band;
  band.f_lo = params.f0 * (1.0 - 0.5 * params.bandwidth);
  band.f_hi = params.f0 * (1.0 + 0.5 * params.bandwidth);
  band.skirt = 0.2 * params.f0;
  const auto analytic = bandpass_analytic(y, fs_axial, band);
  std::vector<double> env(analytic.size());
  for (std::size_t i = 0; i < env.size(); ++i) env[i] = std::abs(analytic[i]);
  return env;
}

std::vector<double> decimate_average(std::span<const double> line, std::size_t first,
                                     std::size_t factor, std::size_t count) {
  if (factor == 0) throw InvalidArgument("decimation factor must be positive");
  const std::size_t h = factor / 2;
  std::vector<double> out(count, 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t c = first + j * factor;
    if (c < h || c + h >= line.size()) throw InvalidArgument("decimation window outside the line");
    double acc = 0.0;
    for (std::size_t m = c - h; m <= c + h; ++m) acc += line[m];
    out[j] = acc / static_cast<double>(2 * h + 1);
  }
  return out;
}

double cf_weight(std::span<const cplx> s, std::span<const std::uint8_t> valid, bool normalized) {
  cplx sum(0.0, 0.0);
  double energy = 0.0;
  std::size_t n_valid = 0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    if (valid[n] == 0) continue;
    sum += s[n];
    energy += std::norm(s[n]);
    ++n_valid;
  }
  if (!(energy > 0.0)) return 0.0;
  const double w = std::norm(sum) / energy;
  return normalized ? w / static_cast<double>(n_valid) : w;
}

double cf_weight(const DelayedSampleVector& s, bool normalized) {
  return cf_weight(s.s, s.valid, normalized);
}

double cv_weight(std::span<const cplx> s, std::span<const std::uint8_t> valid,
                 std::span<const double> a, bool inverse_apodize, double epsilon) {
  cplx sum(0.0, 0.0);
  cplx u_sum(0.0, 0.0);
  double u_energy = 0.0;
  std::size_t n_valid = 0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    if (valid[n] == 0) continue;
    if (inverse_apodize && !(a[n] > 0.0)) continue;
    const cplx u = inverse_apodize ? s[n] / a[n] : s[n];
    sum += s[n];
    u_sum += u;
    u_energy += std::norm(u);
    ++n_valid;
  }
  if (n_valid < 2) return 0.0;
  const cplx mean = u_sum / static_cast<double>(n_valid);
  double var = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    if (valid[n] == 0) continue;
    if (inverse_apodize && !(a[n] > 0.0)) continue;
    const cplx u = inverse_apodize ? s[n] / a[n] : s[n];
    var += std::norm(u - mean);
  }
  const double floor = epsilon * u_energy;
  const double denom = std::max(var, floor);
  if (!(denom > 0.0)) return 0.0;
  return std::norm(sum) / denom;
}

double cv_weight(const DelayedSampleVector& s, const ApodizationVector& a, bool inverse_apodize,
                 double epsilon) {
  if (s.s.size() != a.a.size()) throw InvalidArgument("cv_weight: length mismatch");
  return cv_weight(s.s, s.valid, a.a, inverse_apodize, epsilon);
}

double voxel_value(const BeamformerKind& kind, std::span<const cplx> s,
                   std::span<const std::uint8_t> valid, std::span<const double> a) {
  const double y = std::abs(das(s, valid, a));
  switch (kind.method) {
    case Method::kDAS: return y;
    case Method::kCF: return cf_weight(s, valid, kind.cf_normalized) * y;
    case Method::kCVN: return cv_weight(s, valid, a, false, kind.epsilon) * y;
    case Method::kCV: return cv_weight(s, valid, a, true, kind.epsilon) * y;
    case Method::kPDAS: break;
  }
  throw InvalidArgument("voxel_value does not handle p-DAS; use the line driver");
}

double BeamformedVolume::max() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

std::size_t BeamformedVolume::argmax() const {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

void normalize_to_sequence_max(std::vector<BeamformedVolume>& volumes) {
  double peak = 0.0;
  for (const auto& v : volumes) peak = std::max(peak, v.max());
  if (!(peak > 0.0)) return;
  for (auto& v : volumes) {
    for (double& x : v.values) x /= peak;
    v.normalization *= peak;
  }
}

double available_memory_bytes() {
  const long pages = sysconf(_SC_PHYS_PAGES);
  const long page = sysconf(_SC_PAGE_SIZE);
  if (pages <= 0 || page <= 0) return 4.0e9;
  return 0.5 * static_cast<double>(pages) * static_cast<double>(page);
}

double beamform_memory_estimate(const ChannelSequence& seq, const VoxelGrid& grid,
                                const BeamformerKind& kind, const BeamformOptions& opts) {
  if (seq.frames.empty()) return 0.0;
  const auto& f = seq.frames.front();
  const double frames = static_cast<double>(seq.frames.size());
  const double batch = static_cast<double>(std::min<std::size_t>(std::max<std::size_t>(opts.frame_batch, 1), seq.frames.size()));
  double bytes = frames * static_cast<double>(grid.size()) * sizeof(double);
  bytes += batch * static_cast<double>(f.channels * f.samples) * sizeof(cplx);
  const double workers = static_cast<double>(std::max(opts.workers, 1));
  if (kind.method == Method::kPDAS) {
    const PdasLayout layout(grid, kind);
    bytes += workers * batch * static_cast<double>(layout.count) * 3.0 * sizeof(double);
  }
  return bytes;
}

BeamformResult beamform_volume(const ChannelSequence& seq, const VoxelGrid& grid,
                               const BeamformerKind& kind, const ArrayGeometry& geom,
                               const AcquisitionConfig& acq, const BeamformOptions& opts) {
  kind.validate();
  validate_acquisition(acq, geom);
  check_inputs(seq, geom);

  const double need = beamform_memory_estimate(seq, grid, kind, opts);
  const double have = opts.memory_budget_bytes > 0.0 ? opts.memory_budget_bytes : available_memory_bytes();
  if (need > have) {
    throw CapacityError("beamforming needs " + std::to_string(need / 1e6) + " MB but only " +
                            std::to_string(have / 1e6) + " MB are available",
                        need, have);
  }

  BeamformResult result;
  result.volumes.reserve(seq.frames.size());
  result.frame_seconds.reserve(seq.frames.size());
  if (seq.frames.empty()) return result;

  const std::size_t n_el = geom.element_count();
  const DelayLaw law(geom, acq);
  const std::size_t samples = seq.frames.front().samples;
  const VoxelContext ctx{&geom,
                         DirectivityModel(geom, geom.center_frequency(), acq.speed_of_sound),
                         SampleInterpolator(kind.interpolation, geom.center_frequency(),
                                            seq.frames.front().sampling_frequency),
                         1.0 / acq.speed_of_sound,
                         law.pulse_offset(),
                         seq.frames.front().t0,
                         seq.frames.front().sampling_frequency,
                         samples};
  const int workers = std::max(opts.workers, 1);
  const std::size_t batch = std::max<std::size_t>(opts.frame_batch, 1);

  for (std::size_t f0 = 0; f0 < seq.frames.size(); f0 += batch) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t nb = std::min(batch, seq.frames.size() - f0);
    std::vector<AnalyticFrame> analytic;
    analytic.reserve(nb);
    for (std::size_t b = 0; b < nb; ++b) analytic.push_back(analytic_signal(seq.frames[f0 + b]));

    std::vector<BeamformedVolume> vols(nb, BeamformedVolume{grid, std::vector<double>(grid.size(), 0.0), kind, 1.0});

    if (kind.method != Method::kPDAS) {
      const auto n_rows = static_cast<long long>(grid.ny() * grid.nz());
#pragma omp parallel num_threads(workers)
      {
        Scratch sc(n_el);
#pragma omp for schedule(dynamic, 1)
        for (long long row = 0; row < n_rows; ++row) {
          const std::size_t j = static_cast<std::size_t>(row) % grid.ny();
          const std::size_t k = static_cast<std::size_t>(row) / grid.ny();
          for (std::size_t i = 0; i < grid.nx(); ++i) {
            voxel_geometry(grid.position(i, j, k), ctx, sc);
            for (std::size_t b = 0; b < nb; ++b) {
              const cplx* data = analytic[b].data.data();
              for (std::size_t n = 0; n < n_el; ++n) {
                if (sc.valid[n] == 0) {
                  sc.s[n] = cplx(0.0, 0.0);
                  continue;
                }
                const cplx* row_n = data + n * samples + sc.index[n];
                sc.s[n] = sc.w0[n] * row_n[0] + sc.w1[n] * row_n[1];
              }
              vols[b].values[grid.flatten(i, j, k)] = voxel_value(kind, sc.s, sc.valid, sc.apod);
            }
          }
        }
      }
    } else {
      const PdasLayout layout(grid, kind);
      const PdasRecovery rec = recovery_params(kind, geom, acq, layout.dz);
      const auto n_cols = static_cast<long long>(grid.nx() * grid.ny());
#pragma omp parallel num_threads(workers)
      {
        Scratch sc(n_el);
        std::vector<double> yhat(nb * layout.count);
#pragma omp for schedule(dynamic, 1)
        for (long long col = 0; col < n_cols; ++col) {
          const std::size_t i = static_cast<std::size_t>(col) % grid.nx();
          const std::size_t j = static_cast<std::size_t>(col) / grid.nx();
          const Vec3 base = grid.position(i, j, 0);
          for (std::size_t m = 0; m < layout.count; ++m) {
            voxel_geometry({base.x, base.y, layout.z(m)}, ctx, sc);
            for (std::size_t b = 0; b < nb; ++b) {
              const cplx* data = analytic[b].data.data();
              std::size_t used = 0;
              for (std::size_t n = 0; n < n_el; ++n) {
                if (sc.valid[n] == 0) continue;
                const cplx* row_n = data + n * samples + sc.index[n];
                sc.real[used++] = (sc.w0[n] * row_n[0] + sc.w1[n] * row_n[1]).real();
              }
              yhat[b * layout.count + m] =
                  pdas_accumulate(std::span<const double>(sc.real.data(), used), kind.p);
            }
          }
          for (std::size_t b = 0; b < nb; ++b) {
            const auto env = pdas_recover(std::span<const double>(yhat).subspan(b * layout.count, layout.count), rec);
            const auto out = decimate_average(env, layout.pad, layout.factor, grid.nz());
            for (std::size_t k = 0; k < grid.nz(); ++k) vols[b].values[grid.flatten(i, j, k)] = out[k];
          }
        }
      }
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& v : vols) {
      result.volumes.push_back(std::move(v));
      result.frame_seconds.push_back(elapsed / static_cast<double>(nb));
    }
  }
  if (opts.normalize) normalize_to_sequence_max(result.volumes);
  return result;
}

std::vector<BeamformedVolume> beamform_volume_reference(const ChannelSequence& seq,
                                                        const VoxelGrid& grid,
                                                        const BeamformerKind& kind,
                                                        const ArrayGeometry& geom,
                                                        const AcquisitionConfig& acq) {
  kind.validate();
  check_inputs(seq, geom);
  const DelayLaw law(geom, acq);
  const DirectivityModel model(geom, geom.center_frequency(), acq.speed_of_sound);
  std::vector<BeamformedVolume> out;
  for (const auto& frame : seq.frames) {
    const AnalyticFrame af = analytic_signal(frame);
    const SampleInterpolator interp(kind.interpolation, geom.center_frequency(), af.sampling_frequency);
    BeamformedVolume vol{grid, std::vector<double>(grid.size(), 0.0), kind, 1.0};
    if (kind.method != Method::kPDAS) {
      for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const Vec3 v = grid.position(grid.unflatten(idx));
        const auto apod = receive_apodization(v, geom, model);
        const auto s = gather_delayed_samples(af, v, law, apod, interp);
        double y = std::abs(das(s, apod));
        if (kind.method == Method::kCF) y *= cf_weight(s, kind.cf_normalized);
        if (kind.method == Method::kCVN) y *= cv_weight(s, apod, false, kind.epsilon);
        if (kind.method == Method::kCV) y *= cv_weight(s, apod, true, kind.epsilon);
        vol.values[idx] = y;
      }
    } else {
      const PdasLayout layout(grid, kind);
      const PdasRecovery rec = recovery_params(kind, geom, acq, layout.dz);
      for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
          const Vec3 base = grid.position(i, j, 0);
          std::vector<double> yhat(layout.count);
          for (std::size_t m = 0; m < layout.count; ++m) {
            const Vec3 v{base.x, base.y, layout.z(m)};
            const auto apod = receive_apodization(v, geom, model);
            const auto s = gather_delayed_samples(af, v, law, apod, interp);
            std::vector<double> real;
            for (std::size_t n = 0; n < s.s.size(); ++n)
              if (s.valid[n] != 0) real.push_back(s.s[n].real());
            yhat[m] = pdas_accumulate(real, kind.p);
          }
          const auto line = decimate_average(pdas_recover(yhat, rec), layout.pad, layout.factor, grid.nz());
          for (std::size_t k = 0; k < grid.nz(); ++k) vol.values[grid.flatten(i, j, k)] = line[k];
        }
      }
    }
    out.push_back(std::move(vol));
  }
  return out;
}

}  // namespace usbf
