# Copyright 2026 The steglab authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math

import numpy as np
import pytest

import steglab


def random_cover(h=64, w=64, c=3, seed=7):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(h, w, c), dtype=np.uint8)


def test_png_round_trip(tmp_path):
    cover = random_cover()
    path = str(tmp_path / "img.png")
    steglab.save_png(cover, path)
    back = steglab.load_png(path)
    assert back.shape == (64, 64, 3)
    assert np.array_equal(back, cover)


def test_capacity_matches_documented_values():
    gray = random_cover(c=1)
    rgb = random_cover(c=3)
    assert steglab.capacity(gray, 0.4) == 1638
    assert steglab.capacity(rgb, 0.4) == 4915
    with pytest.raises(ValueError):
        steglab.capacity(rgb, 1.5)


def test_embed_extract_round_trip():
    cover = random_cover()
    bits = steglab.random_bits(steglab.capacity(cover, 0.4), seed=3)
    stego = steglab.embed(cover, bits, key=99)
    assert np.max(np.abs(stego.astype(int) - cover.astype(int))) <= 1
    got = steglab.extract(stego, key=99, n_bits=len(bits))
    assert list(got) == list(bits)
    wrong = steglab.extract(stego, key=100, n_bits=len(bits))
    agree = sum(a == b for a, b in zip(wrong, bits)) / len(bits)
    assert 0.4 < agree < 0.6


def test_hpf_residual_is_zero_on_constants():
    x = np.full((2, 1, 16, 16), 0.25)
    r = steglab.hpf_residual(x)
    assert r.shape == (2, 1, 16, 16)
    assert np.max(np.abs(r)) == 0.0


def test_joint_loss_balanced_point():
    total, adv, stego = steglab.joint_loss([0.5], [0.5], [0.5], [0.5])
    assert math.isclose(total, 2 * math.log(0.5), rel_tol=0, abs_tol=1e-9)
    assert math.isclose(adv, 2 * math.log(0.5), abs_tol=1e-9)
    assert math.isclose(stego, 2 * math.log(0.5), abs_tol=1e-9)


def test_config_json_round_trip():
    cfg = json.loads(steglab.default_config_json())
    assert cfg["game"]["alpha"] == 0.85
    assert cfg["game"]["batch_size"] == 64
    assert cfg["optimizer"]["gamma_g"] == 2e-4
    desk = json.loads(steglab.desk_config_json())
    assert desk["generator"]["base"] == 64
    assert desk["steganalyser"]["widths"] == [8, 16, 32, 64]
    # Parsing is idempotent.
    again = steglab.parse_config_json(steglab.default_config_json())
    assert json.loads(again) == cfg
    with pytest.raises(IOError):
        steglab.parse_config_json("{ not json")


def test_error_mapping(tmp_path):
    with pytest.raises(IOError):
        steglab.load_png(str(tmp_path / "missing.png"))
    with pytest.raises(IOError):
        steglab.generate(str(tmp_path / "missing.bin"), 1, seed=1)
    cover = random_cover(c=1)
    too_many = steglab.random_bits(steglab.capacity(cover, 1.0) + 1, seed=1)
    with pytest.raises(ValueError):
        steglab.embed(cover, too_many, key=5)
