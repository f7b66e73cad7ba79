import numpy as np
import pytest

from oracles import dirichlet_numeric
from superradar.config import reference_config
from superradar.dsp import Windows
from superradar.pairs import upscale_config
from superradar.psf import dirichlet_power, dirichlet_reference, lobe_metrics, measure_psf


@pytest.mark.parametrize("e", [8, 32, 384])
def test_reference_kernel_matches_dense_sampling(e):
    sl, width = dirichlet_numeric(e)
    ref = dirichlet_reference(e)
    assert ref["sidelobe_db"] == pytest.approx(sl, abs=1e-4)
    assert ref["width_3db"] == pytest.approx(width, rel=1e-5)


def test_32_element_constants():
    ref = dirichlet_reference(32)
    # frozen from the dense-sampling oracle
    assert ref["sidelobe_db"] == pytest.approx(-13.2329, abs=1e-3)
    assert ref["width_3db"] == pytest.approx(0.0553917, rel=1e-5)
    # large-aperture limit of the first side-lobe
    assert dirichlet_reference(384)["sidelobe_db"] == pytest.approx(-13.26, abs=0.01)


def test_dirichlet_power_peak_and_null():
    assert dirichlet_power(0.0, 32) == 1.0
    assert dirichlet_power(2 / 32, 32) == pytest.approx(0.0, abs=1e-20)


def test_lobe_metrics_on_sampled_kernel():
    s = np.linspace(-0.5, 0.5, 20001)
    m = lobe_metrics(dirichlet_power(s, 32), s[1] - s[0])
    ref = dirichlet_reference(32)
    assert m["width_3db"] == pytest.approx(ref["width_3db"], rel=1e-4)
    assert m["sidelobe_db"] == pytest.approx(ref["sidelobe_db"], abs=1e-3)


def test_measured_psf_reference_config():
    m = measure_psf(reference_config())
    ref = dirichlet_reference(32)
    assert m["num_elements"] == 32
    assert m["sidelobe_db"] == pytest.approx(ref["sidelobe_db"], abs=0.3)
    assert m["width_3db_sin"] == pytest.approx(ref["width_3db"], rel=0.05)
    assert m["peak_sin"] == 0.0
    assert m["peak_range_bin"] == round(20 / 0.28)


def test_hann_window_lowers_sidelobes():
    rect = measure_psf(reference_config())
    hann = measure_psf(reference_config(), windows=Windows(angle="hann"))
    assert hann["sidelobe_db"] < rect["sidelobe_db"] - 10
    assert hann["width_3db_sin"] > rect["width_3db_sin"]


def test_super_psf_narrower():
    cfg = reference_config()
    a = measure_psf(cfg)
    b = measure_psf(upscale_config(cfg, 4))
    assert a["width_3db_sin"] / b["width_3db_sin"] == pytest.approx(4, rel=0.01)
    assert b["sidelobe_db"] <= a["sidelobe_db"]
