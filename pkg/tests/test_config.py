import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superradar.config import (SPEED_OF_LIGHT, ImageGrid, RadarConfig, config_digest,
                               config_from_dict, derive_image_grid, derive_virtual_array,
                               load_config, reference_config, save_config, sin_azimuth_grid,
                               velocity_axis, velocity_resolution)


def test_single_tx_virtual_array_is_rx_array():
    lam = SPEED_OF_LIGHT / 77e9
    cfg = reference_config(tx_positions_m=[0.0], rx_positions_m=[k * lam / 2 for k in range(8)])
    va = derive_virtual_array(cfg)
    np.testing.assert_allclose(va.element_positions_m, cfg.rx_positions_m)
    assert va.num_elements == 8 and va.is_uniform


def test_reference_virtual_array_enumerated():
    cfg = reference_config()
    lam = SPEED_OF_LIGHT / cfg.carrier_frequency_hz
    # enumerate all Tx+Rx sums and sort, independent of the package
    sums = sorted(t + r for t in cfg.tx_positions_m for r in cfg.rx_positions_m)
    expected = [m * lam / 2 for m in range(32)]
    np.testing.assert_allclose(sums, expected, atol=1e-12)
    va = derive_virtual_array(cfg)
    np.testing.assert_allclose(va.element_positions_m, expected, atol=1e-12)
    assert va.is_uniform
    assert va.element_spacing_m == pytest.approx(lam / 2, rel=1e-12)
    # pair_index maps Tx i / Rx k to slot i*8 + k for this layout
    np.testing.assert_array_equal(va.pair_index, np.arange(32).reshape(4, 8))


def test_duplicate_virtual_positions_rejected():
    with pytest.raises(ValueError):
        RadarConfig(**dict(reference_config().to_dict(), tx_positions_m=[0.0, 0.0]))
    # same positions with distinct Tx list order is rejected by derive_virtual_array
    lam = SPEED_OF_LIGHT / 77e9
    cfg = reference_config(tx_positions_m=[0.0, lam / 2], rx_positions_m=[0.0, lam / 2],
                           chirps_per_frame=64)
    with pytest.raises(ValueError, match="duplicate"):
        derive_virtual_array(cfg)


def test_range_spacing_from_bandwidth():
    cfg = reference_config()
    b = cfg.chirp_slope_hz_per_s * cfg.samples_per_chirp / cfg.sampling_rate_hz
    assert b == pytest.approx(535.34e6, rel=1e-4)
    grid = derive_image_grid(cfg)
    assert grid.range_bin_spacing_m == pytest.approx(SPEED_OF_LIGHT / (2 * b), rel=1e-12)
    assert grid.range_bin_spacing_m == pytest.approx(0.28, rel=1e-12)


def test_sin_grid_values():
    u = sin_azimuth_grid(64)
    assert u[0] == -1.0 and u[-1] == pytest.approx(1 - 2 / 64, abs=1e-15)
    np.testing.assert_allclose(np.diff(u), 2 / 64, atol=1e-15)
    assert derive_image_grid(reference_config()).num_angle_bins == 64


def test_nonuniform_grid_fails():
    u = sin_azimuth_grid(8).copy()
    u[3] += 1e-3
    with pytest.raises(ValueError):
        ImageGrid(0.28, 4, u, 8)


def test_bin_lookup():
    grid = derive_image_grid(reference_config())
    assert grid.range_bin(30.0) == 107
    assert grid.angle_bin(0.25) == 40
    assert grid.angle_bin(0.0) == 32
    # 1 - 1/64 rounds to bin 64, which wraps to -1
    assert grid.angle_bin(1 - 1 / 64 + 1e-9) == 0


def test_velocity_axis():
    cfg = reference_config()
    res = velocity_resolution(cfg)
    assert res == pytest.approx(SPEED_OF_LIGHT / (2 * 77e9 * 64 * 12e-6), rel=1e-12)
    v = velocity_axis(cfg)
    assert v.size == 16 and v[8] == 0.0 and v[0] == pytest.approx(-8 * res)


@pytest.mark.parametrize("bad", [
    dict(chirps_per_frame=63),              # not divisible by 4 Tx
    dict(samples_per_chirp=400),            # does not fit in T_c * f_s = 300
    dict(angle_bins=16),                    # fewer than 32 elements
    dict(chirp_slope_hz_per_s=-1.0),
    dict(rx_positions_m=[0.0, 0.0]),
])
def test_invalid_configs(bad):
    with pytest.raises(ValueError):
        reference_config(**bad)


def test_range_warning_when_grid_short():
    with pytest.warns(RuntimeWarning):
        derive_image_grid(reference_config(max_range_m=150.0))


def test_load_precedence(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"chirps_per_frame": 128, "max_range_m": 40.0}))
    cfg = load_config(path, {"max_range_m": 45.0})
    assert cfg.chirps_per_frame == 128 and cfg.max_range_m == 45.0
    assert load_config().to_dict() == reference_config().to_dict()
    # angle_bins follows the final array unless set
    lam = SPEED_OF_LIGHT / 77e9
    cfg = load_config(None, {"rx_positions_m": [k * lam / 2 for k in range(4)],
                             "tx_positions_m": [0.0, 4 * lam / 2], "chirps_per_frame": 64})
    assert cfg.angle_bins == 16


def test_unknown_field_rejected():
    with pytest.raises(ValueError, match="unknown"):
        config_from_dict(dict(reference_config().to_dict(), bogus=1))


def test_save_round_trip(tmp_path):
    cfg = reference_config(chirps_per_frame=128)
    save_config(cfg, tmp_path / "c.json")
    back = load_config(tmp_path / "c.json")
    assert back == cfg
    assert config_digest(back) == config_digest(cfg)
    assert config_digest(reference_config()) != config_digest(cfg)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 12))
def test_uniform_tdm_layout_property(n_tx, n_rx):
    lam = SPEED_OF_LIGHT / 77e9
    cfg = reference_config(tx_positions_m=[i * n_rx * lam / 2 for i in range(n_tx)],
                           rx_positions_m=[k * lam / 2 for k in range(n_rx)],
                           chirps_per_frame=16 * n_tx)
    va = derive_virtual_array(cfg)
    assert va.num_elements == n_tx * n_rx and va.is_uniform
    np.testing.assert_allclose(va.element_positions_m, np.arange(n_tx * n_rx) * lam / 2, atol=1e-12)
