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

#include "usbf/srus.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "usbf/errors.hpp"

namespace usbf {
namespace {

// Casorati rows handled per Gram/projection block.
constexpr std::size_t kBlockRows = 4096;

std::size_t frame_size(const ChannelSequence& seq) { return seq.frames.front().data.size(); }

// Rows [r0, r0 + rows) of the Casorati matrix, one column per frame.
Eigen::MatrixXd casorati_block(const ChannelSequence& seq, std::size_t r0, std::size_t rows) {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(seq.frames.size()));
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const double* src = seq.frames[f].data.data() + r0;
    for (std::size_t r = 0; r < rows; ++r) b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = src[r];
  }
  return b;
}

std::size_t half(std::size_t n) { return n / 2; }

}  // namespace

void ClutterFilterConfig::validate(std::size_t frames) const {
  const std::size_t removed = low_cutoff + high_cutoff.value_or(0);
  if (removed >= frames)
    throw InvalidConfiguration("clutter filter cutoffs (" + std::to_string(removed) +
                               " components) must leave part of the rank of " +
                               std::to_string(frames) + " frames");
}

ClutterProjection::ClutterProjection(const ChannelSequence& seq, const ClutterFilterConfig& cfg)
    : frames_(seq.frames.size()) {
  if (frames_ < 2) throw InvalidArgument("SVD clutter filter needs at least two frames");
  seq.validate();
  cfg.validate(frames_);

  const auto k = static_cast<Eigen::Index>(frames_);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  const std::size_t m = frame_size(seq);
  for (std::size_t r0 = 0; r0 < m; r0 += kBlockRows) {
    const Eigen::MatrixXd b = casorati_block(seq, r0, std::min(kBlockRows, m - r0));
    gram.noalias() += b.transpose() * b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigen decomposition of the Gram matrix failed");
  // Eigen sorts ascending; walk from the top.
  for (Eigen::Index i = k - 1; i >= 0; --i) singular_values_.push_back(std::sqrt(std::max(eig.eigenvalues()(i), 0.0)));

  auto take = [&](Eigen::Index col) {
    std::vector<double> v(frames_);
    for (Eigen::Index f = 0; f < k; ++f) v[static_cast<std::size_t>(f)] = eig.eigenvectors()(f, col);
    removed_.push_back(std::move(v));
  };
  for (std::size_t i = 0; i < cfg.low_cutoff; ++i) take(k - 1 - static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < cfg.high_cutoff.value_or(0); ++i) take(static_cast<Eigen::Index>(i));
}

ChannelSequence ClutterProjection::apply(const ChannelSequence& seq) const {
  if (seq.frames.size() != frames_) throw InvalidArgument("sequence length differs from the fitted basis");
  seq.validate();
  ChannelSequence out = seq;
  if (removed_.empty()) return out;

  const auto k = static_cast<Eigen::Index>(frames_);
  Eigen::MatrixXd v(k, static_cast<Eigen::Index>(removed_.size()));
  for (std::size_t c = 0; c < removed_.size(); ++c)
    for (Eigen::Index f = 0; f < k; ++f) v(f, static_cast<Eigen::Index>(c)) = removed_[c][static_cast<std::size_t>(f)];

  const std::size_t m = frame_size(seq);
  for (std::size_t r0 = 0; r0 < m; r0 += kBlockRows) {
    const std::size_t rows = std::min(kBlockRows, m - r0);
    Eigen::MatrixXd b = casorati_block(seq, r0, rows);
    b.noalias() -= (b * v) * v.transpose();
    for (std::size_t f = 0; f < frames_; ++f) {
      double* dst = out.frames[f].data.data() + r0;
      for (std::size_t r = 0; r < rows; ++r) dst[r] = b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f));
    }
  }
  return out;
}

ChannelSequence svd_clutter_filter(const ChannelSequence& seq, const ClutterFilterConfig& cfg) {
  return ClutterProjection(seq, cfg).apply(seq);
}

Template3D estimate_psf_template(const BeamformerKind& kind, const ArrayGeometry& geom,
                                 const AcquisitionConfig& acq, const Vec3& grid_spacing,
                                 const TemplateOptions& opts) {
  const double depth = opts.depth.value_or(20e-3);
  if (!(depth > 0.0)) throw InvalidArgument("template depth must be positive");
  if (!(grid_spacing.x > 0.0 && grid_spacing.y > 0.0 && grid_spacing.z > 0.0))
    throw InvalidArgument("template grid spacing must be positive");

  const auto reach = [](double extent, double spacing) {
    return static_cast<std::size_t>(std::floor(extent / spacing + 1e-9)) + 2;
  };
  const Index3 h{reach(opts.max_half_extent.x, grid_spacing.x), reach(opts.max_half_extent.y, grid_spacing.y),
                 reach(opts.max_half_extent.z, grid_spacing.z)};
  const VoxelGrid grid = VoxelGrid::centered({0.0, 0.0, depth}, grid_spacing,
                                             {2 * h.i + 1, 2 * h.j + 1, 2 * h.k + 1});

  Scene scene;
  scene.scatterers.push_back({{0.0, 0.0, depth}, 1.0});
  AcquisitionConfig a = acq;
  const double zr = static_cast<double>(h.k) * grid_spacing.z + 1e-3;
  set_record_window(a, geom, depth - zr, depth + zr,
                    std::hypot(static_cast<double>(h.i) * grid_spacing.x, static_cast<double>(h.j) * grid_spacing.y));
  ChannelSequence seq;
  seq.frames.push_back(Simulator(geom, a).frame(scene));
  seq.frame_rate = a.frame_rate;
  BeamformOptions bo;
  bo.workers = opts.workers;
  const auto vol = beamform_volume(seq, grid, kind, geom, a, bo).volumes.front();

  const Index3 pk = grid.unflatten(vol.argmax());
  const double peak = vol.values[grid.flatten(pk)];
  if (!(peak > 0.0)) throw std::runtime_error("template simulation produced an empty image");
  const double floor = peak * std::pow(10.0, opts.support_db / 20.0);

  // Support half-extent per axis, symmetric about the peak, capped and kept inside the grid.
  Index3 cap{std::min({reach(opts.max_half_extent.x, grid_spacing.x) - 2, pk.i, grid.nx() - 1 - pk.i}),
             std::min({reach(opts.max_half_extent.y, grid_spacing.y) - 2, pk.j, grid.ny() - 1 - pk.j}),
             std::min({reach(opts.max_half_extent.z, grid_spacing.z) - 2, pk.k, grid.nz() - 1 - pk.k})};
  Index3 sup{0, 0, 0};
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (vol.values[idx] < floor) continue;
    const Index3 q = grid.unflatten(idx);
    const auto dist = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    sup.i = std::max(sup.i, dist(q.i, pk.i));
    sup.j = std::max(sup.j, dist(q.j, pk.j));
    sup.k = std::max(sup.k, dist(q.k, pk.k));
  }
  sup = {std::max<std::size_t>(1, std::min(sup.i, cap.i)), std::max<std::size_t>(1, std::min(sup.j, cap.j)),
         std::max<std::size_t>(1, std::min(sup.k, cap.k))};

  Template3D t;
  t.dims = {2 * sup.i + 1, 2 * sup.j + 1, 2 * sup.k + 1};
  t.spacing = grid_spacing;
  t.values.resize(t.dims.i * t.dims.j * t.dims.k);
  for (std::size_t k = 0; k < t.dims.k; ++k)
    for (std::size_t j = 0; j < t.dims.j; ++j)
      for (std::size_t i = 0; i < t.dims.i; ++i)
        t.values[i + t.dims.i * (j + t.dims.j * k)] =
            vol.at(pk.i - sup.i + i, pk.j - sup.j + j, pk.k - sup.k + k) / peak;
  return t;
}

std::vector<double> ncc3d(const VoxelGrid& grid, std::span<const double> volume,
                          const Template3D& tmpl, int workers) {
  if (volume.size() != grid.size()) throw InvalidArgument("volume size does not match its grid");
  const Index3& td = tmpl.dims;
  if (td.i % 2 == 0 || td.j % 2 == 0 || td.k % 2 == 0) throw InvalidArgument("template dims must be odd");
  if (td.i > grid.nx() || td.j > grid.ny() || td.k > grid.nz())
    throw InvalidArgument("template is larger than the volume");

  const std::size_t count = tmpl.values.size();
  double t_mean = 0.0;
  for (double v : tmpl.values) t_mean += v;
  t_mean /= static_cast<double>(count);
  std::vector<double> tz(count);
  double t_norm2 = 0.0;
  for (std::size_t m = 0; m < count; ++m) {
    tz[m] = tmpl.values[m] - t_mean;
    t_norm2 += tz[m] * tz[m];
  }

  std::vector<double> out(grid.size(), 0.0);
  if (!(t_norm2 > 0.0)) return out;
  const std::size_t hx = half(td.i), hy = half(td.j), hz = half(td.k);
  const std::size_t nx = grid.nx(), ny = grid.ny();
  const auto k_lo = static_cast<long long>(hz);
  const auto k_hi = static_cast<long long>(grid.nz() - hz);

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(workers, 1))
  for (long long kk = k_lo; kk < k_hi; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    for (std::size_t j = hy; j + hy < ny; ++j)
      for (std::size_t i = hx; i + hx < nx; ++i) {
        const std::size_t base = (i - hx) + nx * ((j - hy) + ny * (k - hz));
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t c = 0; c < td.k; ++c)
          for (std::size_t b = 0; b < td.j; ++b) {
            const double* row = volume.data() + base + nx * (b + ny * c);
            for (std::size_t a = 0; a < td.i; ++a) {
              sum += row[a];
              lo = std::min(lo, row[a]);
              hi = std::max(hi, row[a]);
            }
          }
        if (lo == hi) continue;
        const double p_mean = sum / static_cast<double>(count);
        double num = 0.0;
        double p_norm2 = 0.0;
        std::size_t m = 0;
        for (std::size_t c = 0; c < td.k; ++c)
          for (std::size_t b = 0; b < td.j; ++b) {
            const double* row = volume.data() + base + nx * (b + ny * c);
            for (std::size_t a = 0; a < td.i; ++a, ++m) {
              const double d = row[a] - p_mean;
              num += d * tz[m];
              p_norm2 += d * d;
            }
          }
        if (!(p_norm2 > 0.0)) continue;
        out[grid.flatten(i, j, k)] = std::clamp(num / std::sqrt(p_norm2 * t_norm2), -1.0, 1.0);
      }
  }
  return out;
}

std::vector<double> natural_spline_second_derivatives(std::span<const double> y) {
  const std::size_t n = y.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  // Tridiagonal system for interior nodes: m[i-1] + 4 m[i] + m[i+1] = 6 (y[i-1] - 2 y[i] + y[i+1]).
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double rhs = 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]);
    const double denom = 4.0 - (i > 1 ? c[i - 1] : 0.0);
    c[i] = 1.0 / denom;
    d[i] = (rhs - (i > 1 ? d[i - 1] : 0.0)) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = d[i] - c[i] * m[i + 1];
    if (i == 1) break;
  }
  return m;
}

double natural_spline_eval(std::span<const double> y, std::span<const double> second, double x) {
  const std::size_t n = y.size();
  if (n == 0) throw InvalidArgument("spline needs at least one node");
  if (n == 1) return y[0];
  x = std::clamp(x, 0.0, static_cast<double>(n - 1));
  auto i = static_cast<std::size_t>(x);
  if (i >= n - 1) i = n - 2;
  const double t = x - static_cast<double>(i);
  const double a = 1.0 - t;
  return a * y[i] + t * y[i + 1] +
         ((a * a * a - a) * second[i] + (t * t * t - t) * second[i + 1]) / 6.0;
}

std::vector<LocalizationEvent> detect_and_localize(const VoxelGrid& grid,
                                                   std::span<const double> coef,
                                                   std::size_t frame, const DetectOptions& opts,
                                                   DetectStats* stats) {
  if (coef.size() != grid.size()) throw InvalidArgument("coefficient map does not match its grid");
  if (opts.window < 3 || opts.window % 2 == 0) throw InvalidArgument("localization window must be odd and >= 3");
  if (opts.upsample == 0) throw InvalidArgument("upsample factor must be positive");
  for (double c : coef)
    if (!std::isfinite(c)) throw InvalidArgument("coefficient map is not finite");

  const std::size_t w = opts.window;
  const std::size_t r = w / 2;
  const std::size_t nx = grid.nx(), ny = grid.ny(), nz = grid.nz();
  const std::size_t fine = (w - 1) * opts.upsample + 1;
  const double step = 1.0 / static_cast<double>(opts.upsample);
  DetectStats local;
  std::vector<LocalizationEvent> events;

  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const double c = coef[grid.flatten(i, j, k)];
        if (!(c >= opts.min_coef)) continue;
        bool is_max = true;
        for (int dk = -1; dk <= 1 && is_max; ++dk)
          for (int dj = -1; dj <= 1 && is_max; ++dj)
            for (int di = -1; di <= 1; ++di) {
              if (di == 0 && dj == 0 && dk == 0) continue;
              const long long a = static_cast<long long>(i) + di;
              const long long b = static_cast<long long>(j) + dj;
              const long long e = static_cast<long long>(k) + dk;
              if (a < 0 || b < 0 || e < 0 || a >= static_cast<long long>(nx) ||
                  b >= static_cast<long long>(ny) || e >= static_cast<long long>(nz))
                continue;
              if (!(c > coef[grid.flatten(static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                                          static_cast<std::size_t>(e))])) {
                is_max = false;
                break;
              }
            }
        if (!is_max) continue;
        ++local.maxima;
        if (i < r || j < r || k < r || i + r >= nx || j + r >= ny || k + r >= nz) {
          ++local.border_discarded;
          continue;
        }

        // Separable natural-spline upsampling: x, then y, then z.
        std::vector<double> ax(fine * w * w);
        std::vector<double> line(w), m2;
        for (std::size_t c2 = 0; c2 < w; ++c2)
          for (std::size_t b2 = 0; b2 < w; ++b2) {
            for (std::size_t a2 = 0; a2 < w; ++a2) line[a2] = coef[grid.flatten(i - r + a2, j - r + b2, k - r + c2)];
            m2 = natural_spline_second_derivatives(line);
            for (std::size_t u = 0; u < fine; ++u)
              ax[u + fine * (b2 + w * c2)] = natural_spline_eval(line, m2, static_cast<double>(u) * step);
          }
        std::vector<double> axy(fine * fine * w);
        for (std::size_t c2 = 0; c2 < w; ++c2)
          for (std::size_t u = 0; u < fine; ++u) {
            for (std::size_t b2 = 0; b2 < w; ++b2) line[b2] = ax[u + fine * (b2 + w * c2)];
            m2 = natural_spline_second_derivatives(line);
            for (std::size_t v = 0; v < fine; ++v)
              axy[u + fine * (v + fine * c2)] = natural_spline_eval(line, m2, static_cast<double>(v) * step);
          }
        double best = -std::numeric_limits<double>::infinity();
        std::size_t bu = 0, bv = 0, bw = 0;
        for (std::size_t v = 0; v < fine; ++v)
          for (std::size_t u = 0; u < fine; ++u) {
            for (std::size_t c2 = 0; c2 < w; ++c2) line[c2] = axy[u + fine * (v + fine * c2)];
            m2 = natural_spline_second_derivatives(line);
            for (std::size_t s = 0; s < fine; ++s) {
              const double val = natural_spline_eval(line, m2, static_cast<double>(s) * step);
              if (val > best) {
                best = val;
                bu = u;
                bv = v;
                bw = s;
              }
            }
          }
        const Vec3 p0 = grid.position(i - r, j - r, k - r);
        const Vec3& sp = grid.spacing();
        LocalizationEvent ev;
        ev.frame = frame;
        ev.position = {p0.x + static_cast<double>(bu) * step * sp.x, p0.y + static_cast<double>(bv) * step * sp.y,
                       p0.z + static_cast<double>(bw) * step * sp.z};
        ev.ncc_peak = c;
        events.push_back(ev);
      }
  if (stats != nullptr) {
    stats->maxima += local.maxima;
    stats->border_discarded += local.border_discarded;
  }
  return events;
}

std::vector<double> threshold_volume(std::span<const double> values, double threshold_db,
                                     double reference) {
  std::vector<double> out(values.begin(), values.end());
  if (std::isinf(threshold_db) && threshold_db < 0.0) return out;
  const double floor = reference * std::pow(10.0, threshold_db / 20.0);
  for (double& v : out)
    if (v < floor) v = 0.0;
  return out;
}

double DensityMap::total() const {
  double s = 0.0;
  for (double c : counts) s += c;
  return s;
}

DensityMap accumulate_density(std::span<const LocalizationEvent> events, const VoxelGrid& sr_grid) {
  DensityMap map{sr_grid, std::vector<double>(sr_grid.size(), 0.0), 0};
  for (const auto& e : events) {
    const Vec3 q = sr_grid.to_voxel(e.position);
    const double ri = std::round(q.x), rj = std::round(q.y), rk = std::round(q.z);
    if (ri < 0.0 || rj < 0.0 || rk < 0.0 || ri > static_cast<double>(sr_grid.nx() - 1) ||
        rj > static_cast<double>(sr_grid.ny() - 1) || rk > static_cast<double>(sr_grid.nz() - 1)) {
      ++map.dropped;
      continue;
    }
    map.counts[sr_grid.flatten(static_cast<std::size_t>(ri), static_cast<std::size_t>(rj),
                               static_cast<std::size_t>(rk))] += 1.0;
  }
  return map;
}

std::vector<BeamformedVolume> srus_volumes(const ChannelSequence& seq, const VoxelGrid& grid,
                                           const SrusConfig& cfg, const ArrayGeometry& geom,
                                           const AcquisitionConfig& acq,
                                           std::vector<double>* seconds) {
  if (seq.frames.empty()) return {};
  const ChannelSequence* input = &seq;
  ChannelSequence filtered;
  if (cfg.apply_clutter_filter) {
    filtered = svd_clutter_filter(seq, cfg.clutter);
    input = &filtered;
  }
  BeamformOptions bo;
  bo.workers = cfg.workers;
  bo.normalize = true;
  auto result = beamform_volume(*input, grid, cfg.kind, geom, acq, bo);
  if (seconds != nullptr) *seconds = result.frame_seconds;
  return std::move(result.volumes);
}

std::vector<LocalizationEvent> localize_volumes(std::span<const BeamformedVolume> volumes,
                                                const Template3D& tmpl, double threshold_db,
                                                const DetectOptions& detect, int workers,
                                                DetectStats* stats) {
  std::vector<std::vector<LocalizationEvent>> per_frame(volumes.size());
  std::vector<DetectStats> per_stats(volumes.size());
  const auto n = static_cast<long long>(volumes.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(workers, 1))
  for (long long f = 0; f < n; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    const auto& vol = volumes[fi];
    const auto masked = threshold_volume(vol.values, threshold_db);
    const auto coef = ncc3d(vol.grid, masked, tmpl, 1);
    per_frame[fi] = detect_and_localize(vol.grid, coef, fi, detect, &per_stats[fi]);
  }
  std::vector<LocalizationEvent> events;
  for (std::size_t f = 0; f < volumes.size(); ++f) {
    events.insert(events.end(), per_frame[f].begin(), per_frame[f].end());
    if (stats != nullptr) {
      stats->maxima += per_stats[f].maxima;
      stats->border_discarded += per_stats[f].border_discarded;
    }
  }
  return events;
}

SrusResult run_srus(const ChannelSequence& seq, const VoxelGrid& grid, const SrusConfig& cfg,
                    const ArrayGeometry& geom, const AcquisitionConfig& acq) {
  SrusResult res;
  res.density = accumulate_density({}, grid.refined(cfg.detect.upsample));
  if (seq.frames.empty()) return res;
  const auto volumes = srus_volumes(seq, grid, cfg, geom, acq, &res.beamform_seconds);
  TemplateOptions topt = cfg.templ;
  if (!topt.depth) topt.depth = grid.origin().z + 0.5 * static_cast<double>(grid.nz() - 1) * grid.spacing().z;
  topt.workers = cfg.workers;
  const Template3D tmpl = estimate_psf_template(cfg.kind, geom, acq, grid.spacing(), topt);
  res.events = localize_volumes(volumes, tmpl, cfg.threshold_db, cfg.detect, cfg.workers, &res.stats);
  res.density = accumulate_density(res.events, res.density.grid);
  return res;
}

CalibrationResult calibrate_threshold(std::span<const BeamformedVolume> volumes,
                                      const Template3D& tmpl, std::size_t target,
                                      const DetectOptions& detect, int workers, double lo_db,
                                      double hi_db, double tolerance, std::size_t max_iter) {
  if (!(lo_db < hi_db)) throw InvalidArgument("calibration range must satisfy lo < hi");
  const auto count_at = [&](double db) {
    return localize_volumes(volumes, tmpl, db, detect, workers).size();
  };
  const auto close = [&](std::size_t c) {
    return std::abs(static_cast<double>(c) - static_cast<double>(target)) <=
           tolerance * static_cast<double>(target);
  };
  CalibrationResult r;
  r.bracket_lo_db = lo_db;
  r.bracket_hi_db = hi_db;
  r.count_at_lo = count_at(lo_db);
  r.count_at_hi = count_at(hi_db);
  for (auto [db, c] : {std::pair{lo_db, r.count_at_lo}, std::pair{hi_db, r.count_at_hi}})
    if (close(c)) {
      r.threshold_db = db;
      r.count = c;
      r.converged = true;
      return r;
    }
  // More events at the low end is the expected direction.
  if (!(r.count_at_lo > target && r.count_at_hi < target)) {
    r.threshold_db = std::abs(static_cast<double>(r.count_at_lo) - static_cast<double>(target)) <
                             std::abs(static_cast<double>(r.count_at_hi) - static_cast<double>(target))
                         ? lo_db
                         : hi_db;
    r.count = r.threshold_db == lo_db ? r.count_at_lo : r.count_at_hi;
    return r;
  }
  double lo = lo_db, hi = hi_db;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const std::size_t c = count_at(mid);
    r.threshold_db = mid;
    r.count = c;
    if (close(c)) {
      r.converged = true;
      return r;
    }
    if (c > target)
      lo = mid;
    else
      hi = mid;
  }
  return r;
}

}  // namespace usbf
