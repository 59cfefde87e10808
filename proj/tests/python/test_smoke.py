# SPDX-FileCopyrightText: Copyright (c) 2026 The usbf3d Authors. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import numpy as np
import pytest

usbf = pytest.importorskip("usbf", reason="python package not installed (pip install -e . --no-build-isolation)")

CONFIG = """
seed: 5
scene:
  type: points
  scatterers:
    - {position: [0.0, 0.0, 0.02]}
grid: {lo: [-3.0e-4, -3.0e-4, 0.0185], hi: [3.0e-4, 3.0e-4, 0.0215], spacing: [5.0e-5, 5.0e-5, 5.0e-5]}
"""


@pytest.fixture(scope="module")
def sim():
    cfg = usbf.Config(CONFIG)
    return cfg, usbf.simulate(cfg)


def test_simulate_shapes(sim):
    _, out = sim
    assert out["rf"].shape[:2] == (1, 1024)
    assert out["truth"].shape == (1, 5)
    assert out["fs"] == pytest.approx(31.2e6)


@pytest.mark.parametrize("method", ["das", "cf", "cvn", "cv"])
def test_beamform_peaks_at_scatterer(sim, method):
    cfg, out = sim
    vols, secs = usbf.beamform(cfg, out["rf"], out["t0"], out["fs"], out["frame_rate"], method=method)
    assert vols.shape == (1,) + cfg.grid_shape
    assert len(secs) == 1
    k, j, i = np.unravel_index(np.argmax(vols[0]), vols[0].shape)
    ox, oy, oz = cfg.grid_origin
    sx, sy, sz = cfg.grid_spacing
    assert abs(ox + i * sx) <= sx + 1e-12
    assert abs(oy + j * sy) <= sy + 1e-12
    assert abs(oz + k * sz - 0.02) <= sz + 1e-12


def test_adaptive_narrower_than_das(sim):
    cfg, out = sim
    widths = {}
    for m in ("das", "cv"):
        vols, _ = usbf.beamform(cfg, out["rf"], out["t0"], out["fs"], method=m)
        widths[m] = usbf.psf_metrics(cfg, vols[0], out["truth"][:, 1:4], method=m)["lateral_fwhm_mm"][0]
    assert widths["cv"] < widths["das"]


def test_weights():
    rng = np.random.default_rng(0)
    s = rng.normal(size=64) + 1j * rng.normal(size=64)
    cf = usbf.cf_weight(s)
    ref = abs(s.sum()) ** 2 / (len(s) * (abs(s) ** 2).sum())
    assert cf == pytest.approx(ref, rel=1e-12)
    assert usbf.cf_weight(np.full(8, 2 - 1j)) == pytest.approx(1.0)
    assert usbf.cv_weight(np.array([1.0, -1.0], dtype=complex), np.ones(2)) == 0.0


def test_errors():
    with pytest.raises(ValueError, match="beamformer.metod"):
        usbf.Config("beamformer: {metod: cv}")
    cfg = usbf.Config(CONFIG)
    with pytest.raises(ValueError):
        cfg.method = "mvdr"
    assert usbf.methods() == ["das", "pdas", "cf", "cvn", "cv"]
