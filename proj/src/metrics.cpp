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

#include "usbf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "usbf/errors.hpp"

namespace usbf {
namespace {

double to_db(double ratio) {
  if (!(ratio > 0.0)) return -kSnrCap;
  return std::max(20.0 * std::log10(ratio), -kSnrCap);
}

double axis_spacing(const VoxelGrid& g, Axis a) {
  switch (a) {
    case Axis::kX: return g.spacing().x;
    case Axis::kY: return g.spacing().y;
    case Axis::kZ: return g.spacing().z;
  }
  return 0.0;
}

std::size_t axis_size(const VoxelGrid& g, Axis a) {
  switch (a) {
    case Axis::kX: return g.nx();
    case Axis::kY: return g.ny();
    case Axis::kZ: return g.nz();
  }
  return 0;
}

struct LobePeaks {
  double main = 0.0;
  double side = 0.0;
};

LobePeaks lobe_peaks(const BeamformedVolume& volume, std::size_t index,
                     std::span<const MainLobe> lobes, double slab) {
  if (index >= lobes.size()) throw InvalidArgument("scatterer index out of range");
  const MainLobe& own = lobes[index];
  const VoxelGrid& g = volume.grid;
  LobePeaks out;
  out.main = volume.values[g.flatten(own.peak)];
  bool any_side = false;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Vec3 p = g.position(g.unflatten(idx));
    const double v = volume.values[idx];
    if (own.contains(p)) {
      out.main = std::max(out.main, v);
      continue;
    }
    if (std::abs(p.z - own.center.z) > slab) continue;
    bool excluded = false;
    for (const auto& l : lobes)
      if (l.contains(p)) {
        excluded = true;
        break;
      }
    if (excluded) continue;
    any_side = true;
    out.side = std::max(out.side, v);
  }
  if (!any_side) throw InvalidRegion("side-lobe region around scatterer " + std::to_string(index) + " is empty");
  if (!(out.main > 0.0)) throw InvalidRegion("main lobe of scatterer " + std::to_string(index) + " has no signal");
  return out;
}

std::string pm(std::span<const double> v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f+/-%.*f", precision, mean(v), precision, stddev(v));
  return buf;
}

}  // namespace

double profile_fwhm(std::span<const double> profile, std::size_t peak, double spacing) {
  if (peak >= profile.size()) throw InvalidArgument("peak index outside the profile");
  const double top = profile[peak];
  if (!(top > 0.0)) throw WidthUnbounded("profile peak is not positive");
  const double half = 0.5 * top;

  std::size_t l = peak;
  while (l > 0 && profile[l - 1] >= half) --l;
  if (l == 0) throw WidthUnbounded("profile stays above half maximum on the low side");
  // crossing between l-1 (below) and l (above)
  const double left = static_cast<double>(l - 1) + (half - profile[l - 1]) / (profile[l] - profile[l - 1]);

  std::size_t r = peak;
  while (r + 1 < profile.size() && profile[r + 1] >= half) ++r;
  if (r + 1 >= profile.size()) throw WidthUnbounded("profile stays above half maximum on the high side");
  const double right = static_cast<double>(r) + (profile[r] - half) / (profile[r] - profile[r + 1]);
  return (right - left) * spacing;
}

double fwhm(const BeamformedVolume& volume, const Index3& peak, Axis axis) {
  const VoxelGrid& g = volume.grid;
  const std::size_t n = axis_size(g, axis);
  std::vector<double> line(n);
  for (std::size_t m = 0; m < n; ++m) {
    Index3 idx = peak;
    if (axis == Axis::kX) idx.i = m;
    if (axis == Axis::kY) idx.j = m;
    if (axis == Axis::kZ) idx.k = m;
    line[m] = volume.values[g.flatten(idx)];
  }
  const std::size_t at = axis == Axis::kX ? peak.i : (axis == Axis::kY ? peak.j : peak.k);
  return profile_fwhm(line, at, axis_spacing(g, axis)) * 1e3;
}

Index3 local_peak(const BeamformedVolume& volume, const Vec3& point, double radius) {
  const VoxelGrid& g = volume.grid;
  bool found = false;
  std::size_t best = 0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (norm(g.position(g.unflatten(idx)) - point) > radius) continue;
    if (!found || volume.values[idx] > volume.values[best]) best = idx;
    found = true;
  }
  if (!found) throw InvalidRegion("no voxel within the search radius of the scatterer");
  return g.unflatten(best);
}

bool MainLobe::contains(const Vec3& p) const {
  const Vec3 d = p - center;
  const double q = (d.x * d.x) / (semi_axes.x * semi_axes.x) +
                   (d.y * d.y) / (semi_axes.y * semi_axes.y) +
                   (d.z * d.z) / (semi_axes.z * semi_axes.z);
  return q <= 1.0;
}

MainLobe main_lobe_region(const BeamformedVolume& volume, const Vec3& truth) {
  MainLobe lobe;
  lobe.center = truth;
  lobe.peak = local_peak(volume, truth, 0.5e-3);
  lobe.semi_axes = {fwhm(volume, lobe.peak, Axis::kX) * 1e-3, fwhm(volume, lobe.peak, Axis::kY) * 1e-3,
                    fwhm(volume, lobe.peak, Axis::kZ) * 1e-3};
  return lobe;
}

double spsmr(const BeamformedVolume& volume, std::size_t index, std::span<const MainLobe> lobes,
             double slab) {
  const LobePeaks p = lobe_peaks(volume, index, lobes, slab);
  return to_db(p.side / p.main);
}

CpsmrResult cpsmr_and_max(const BeamformedVolume& volume, std::span<const MainLobe> lobes,
                          double slab) {
  if (lobes.size() < 2) throw InvalidArgument("cross-PSMR needs at least two scatterers");
  std::vector<LobePeaks> peaks;
  for (std::size_t i = 0; i < lobes.size(); ++i) peaks.push_back(lobe_peaks(volume, i, lobes, slab));
  CpsmrResult out;
  out.count = lobes.size();
  out.matrix.resize(out.count * out.count);
  out.max_psmr = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.count; ++i)
    for (std::size_t j = 0; j < out.count; ++j) {
      const double v = to_db(peaks[i].side / peaks[j].main);
      out.matrix[i * out.count + j] = v;
      out.max_psmr = std::max(out.max_psmr, v);
    }
  return out;
}

SnrResult image_snr(const BeamformedVolume& volume, std::span<const std::size_t> signal_voxels,
                    std::span<const std::size_t> noise_voxels) {
  if (signal_voxels.empty()) throw InvalidRegion("signal region is empty");
  if (noise_voxels.empty()) throw InvalidRegion("noise region is empty");
  double s = 0.0;
  for (std::size_t idx : signal_voxels) s += volume.values.at(idx);
  s /= static_cast<double>(signal_voxels.size());
  double e = 0.0;
  for (std::size_t idx : noise_voxels) e += volume.values.at(idx) * volume.values.at(idx);
  const double rms = std::sqrt(e / static_cast<double>(noise_voxels.size()));
  if (!(rms > 0.0)) return {kSnrCap, true};
  if (!(s > 0.0)) return {-kSnrCap, false};
  return {20.0 * std::log10(s / rms), false};
}

std::vector<std::size_t> midgap_noise_region(const VoxelGrid& grid, std::vector<double> depths,
                                             double thickness) {
  std::sort(depths.begin(), depths.end());
  std::vector<std::size_t> out;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const double z = grid.position(grid.unflatten(idx)).z;
    for (std::size_t m = 0; m + 1 < depths.size(); ++m) {
      const double mid = 0.5 * (depths[m] + depths[m + 1]);
      if (std::abs(z - mid) <= 0.5 * thickness) {
        out.push_back(idx);
        break;
      }
    }
  }
  return out;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

PsfMetrics compute_psf_metrics(const BeamformedVolume& volume, const Scene& scene,
                               double processing_time) {
  if (scene.empty()) throw InvalidArgument("scene has no scatterers");
  PsfMetrics m;
  m.processing_time = processing_time;
  std::vector<MainLobe> lobes;
  for (const auto& s : scene.scatterers) lobes.push_back(main_lobe_region(volume, s.position));
  std::vector<std::size_t> signal;
  std::vector<double> depths;
  for (std::size_t i = 0; i < lobes.size(); ++i) {
    m.lateral_fwhm.push_back(lobes[i].semi_axes.x * 1e3);
    m.elevational_fwhm.push_back(lobes[i].semi_axes.y * 1e3);
    m.spsmr.push_back(spsmr(volume, i, lobes));
    signal.push_back(volume.grid.flatten(lobes[i].peak));
    depths.push_back(lobes[i].center.z);
  }
  if (lobes.size() >= 2) {
    m.cpsmr = cpsmr_and_max(volume, lobes);
    m.max_psmr = m.cpsmr.max_psmr;
    m.snr = image_snr(volume, signal, midgap_noise_region(volume.grid, depths));
  } else {
    m.cpsmr.count = 1;
    m.cpsmr.matrix = {m.spsmr.front()};
    m.max_psmr = m.spsmr.front();
    // No gap between scatterers: use everything more than 1 mm away in depth.
    std::vector<std::size_t> noise;
    for (std::size_t idx = 0; idx < volume.grid.size(); ++idx)
      if (std::abs(volume.grid.position(volume.grid.unflatten(idx)).z - depths.front()) > 1e-3)
        noise.push_back(idx);
    m.snr = image_snr(volume, signal, noise);
  }
  return m;
}

std::string format_report(const std::string& title, std::span<const ReportRow> rows) {
  std::ostringstream os;
  os << title << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-18s %-18s %-18s %-14s %-10s %-10s\n", "method",
                "lateral_fwhm_mm", "elev_fwhm_mm", "spsmr_db", "max_psmr_db", "snr_db", "time_s");
  os << line;
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    char snr[32];
    std::snprintf(snr, sizeof snr, m.snr.capped ? ">%.1f" : "%.1f", m.snr.db);
    std::snprintf(line, sizeof line, "%-8s %-18s %-18s %-18s %-14.2f %-10s %-10.3f\n",
                  r.label.c_str(), pm(m.lateral_fwhm, 3).c_str(), pm(m.elevational_fwhm, 3).c_str(),
                  pm(m.spsmr, 1).c_str(), m.max_psmr, snr, m.processing_time);
    os << line;
  }
  return os.str();
}

std::string report_csv(std::span<const ReportRow> rows) {
  std::ostringstream os;
  os << "method,lateral_fwhm_mm,lateral_fwhm_std,elevational_fwhm_mm,elevational_fwhm_std,"
        "spsmr_db,spsmr_std,max_psmr_db,snr_db,snr_capped,processing_time_s\n";
  os.precision(10);
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    os << r.label << ',' << mean(m.lateral_fwhm) << ',' << stddev(m.lateral_fwhm) << ','
       << mean(m.elevational_fwhm) << ',' << stddev(m.elevational_fwhm) << ',' << mean(m.spsmr)
       << ',' << stddev(m.spsmr) << ',' << m.max_psmr << ',' << m.snr.db << ','
       << (m.snr.capped ? 1 : 0) << ',' << m.processing_time << '\n';
  }
  return os.str();
}

Image2D mip(const VoxelGrid& grid, std::span<const double> values, Axis axis) {
  if (values.size() != grid.size()) throw InvalidArgument("volume size does not match its grid");
  Image2D img;
  const Vec3& o = grid.origin();
  const Vec3& s = grid.spacing();
  std::size_t depth = 0;
  switch (axis) {
    case Axis::kZ:
      img = {grid.nx(), grid.ny(), s.x, s.y, o.x, o.y, {}};
      depth = grid.nz();
      break;
    case Axis::kY:
      img = {grid.nx(), grid.nz(), s.x, s.z, o.x, o.z, {}};
      depth = grid.ny();
      break;
    case Axis::kX:
      img = {grid.ny(), grid.nz(), s.y, s.z, o.y, o.z, {}};
      depth = grid.nx();
      break;
  }
  img.values.assign(img.width * img.height, -std::numeric_limits<double>::infinity());
  for (std::size_t v = 0; v < img.height; ++v)
    for (std::size_t u = 0; u < img.width; ++u) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t d = 0; d < depth; ++d) {
        std::size_t idx = 0;
        if (axis == Axis::kZ) idx = grid.flatten(u, v, d);
        if (axis == Axis::kY) idx = grid.flatten(u, d, v);
        if (axis == Axis::kX) idx = grid.flatten(d, u, v);
        best = std::max(best, values[idx]);
      }
      img.values[v * img.width + u] = best;
    }
  return img;
}

Image2D mip(const BeamformedVolume& volume, Axis axis) {
  return mip(volume.grid, volume.values, axis);
}

std::vector<double> profile(const Image2D& image, const ProfileSpec& spec) {
  if (spec.average_axis != 0 && spec.average_axis != 1)
    throw InvalidArgument("profile averaging axis must be 0 (u) or 1 (v)");
  const std::size_t extent = spec.average_axis == 0 ? image.width : image.height;
  if (spec.lo > spec.hi || spec.hi >= extent) throw InvalidArgument("profile band outside the image");
  const std::size_t len = spec.average_axis == 0 ? image.height : image.width;
  std::vector<double> out(len, 0.0);
  const double count = static_cast<double>(spec.hi - spec.lo + 1);
  for (std::size_t m = 0; m < len; ++m) {
    double acc = 0.0;
    for (std::size_t a = spec.lo; a <= spec.hi; ++a)
      acc += spec.average_axis == 0 ? image.at(a, m) : image.at(m, a);
    out[m] = acc / count;
  }
  return out;
}

double ChannelHistogram::phase_support_fraction(double mass) const {
  std::vector<double> marginal(phase_bins, 0.0);
  double total = 0.0;
  for (std::size_t a = 0; a < amplitude_bins; ++a)
    for (std::size_t p = 0; p < phase_bins; ++p) {
      marginal[p] += counts[a * phase_bins + p];
      total += counts[a * phase_bins + p];
    }
  if (!(total > 0.0)) return 0.0;
  std::sort(marginal.begin(), marginal.end(), std::greater<>());
  double acc = 0.0;
  std::size_t used = 0;
  while (used < marginal.size() && acc < mass * total) acc += marginal[used++];
  return static_cast<double>(used) / static_cast<double>(phase_bins);
}

ChannelHistogram channel_histogram(const DelayedSampleVector& s, std::size_t amplitude_bins,
                                   std::size_t phase_bins) {
  if (amplitude_bins == 0 || phase_bins == 0) throw InvalidArgument("histogram needs at least one bin per axis");
  ChannelHistogram h;
  h.amplitude_bins = amplitude_bins;
  h.phase_bins = phase_bins;
  h.counts.assign(amplitude_bins * phase_bins, 0.0);
  for (std::size_t n = 0; n < s.s.size(); ++n)
    if (s.valid[n] != 0) h.max_amplitude = std::max(h.max_amplitude, std::abs(s.s[n]));
  for (std::size_t n = 0; n < s.s.size(); ++n) {
    if (s.valid[n] == 0) continue;
    const double amp = h.max_amplitude > 0.0 ? std::abs(s.s[n]) / h.max_amplitude : 0.0;
    const double ph = (std::arg(s.s[n]) + std::numbers::pi) / (2.0 * std::numbers::pi);
    const auto a = std::min(amplitude_bins - 1, static_cast<std::size_t>(amp * static_cast<double>(amplitude_bins)));
    const auto p = std::min(phase_bins - 1, static_cast<std::size_t>(ph * static_cast<double>(phase_bins)));
    h.counts[a * phase_bins + p] += 1.0;
  }
  return h;
}

std::vector<double> weight_map(const ChannelFrame& frame, const VoxelGrid& grid,
                               const BeamformerKind& kind, const ArrayGeometry& geom,
                               const AcquisitionConfig& acq) {
  if (kind.method == Method::kPDAS) throw InvalidArgument("p-DAS has no per-voxel weight");
  const AnalyticFrame af = analytic_signal(frame);
  const DelayLaw law(geom, acq);
  const DirectivityModel model(geom, geom.center_frequency(), acq.speed_of_sound);
  const SampleInterpolator interp(kind.interpolation, geom.center_frequency(), af.sampling_frequency);
  std::vector<double> out(grid.size(), 1.0);
  if (kind.method == Method::kDAS) return out;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Vec3 v = grid.position(grid.unflatten(idx));
    const auto apod = receive_apodization(v, geom, model);
    const auto s = gather_delayed_samples(af, v, law, apod, interp);
    if (kind.method == Method::kCF) out[idx] = cf_weight(s, kind.cf_normalized);
    if (kind.method == Method::kCVN) out[idx] = cv_weight(s, apod, false, kind.epsilon);
    if (kind.method == Method::kCV) out[idx] = cv_weight(s, apod, true, kind.epsilon);
  }
  return out;
}

void write_pgm(const std::string& path, const Image2D& image, double db_range) {
  if (!(db_range > 0.0)) throw InvalidArgument("db range must be positive");
  double peak = 0.0;
  for (double v : image.values) peak = std::max(peak, v);
  std::vector<unsigned char> px(image.values.size(), 0);
  if (peak > 0.0) {
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double v = image.values[i];
      if (!(v > 0.0)) continue;
      const double db = 20.0 * std::log10(v / peak);
      const double g = std::clamp((db + db_range) / db_range, 0.0, 1.0);
      px[i] = static_cast<unsigned char>(std::lround(255.0 * g));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace usbf
