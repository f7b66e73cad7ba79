"""Input / super-radar image pairs of one scene."""

import hashlib
from dataclasses import dataclass

import numpy as np

from superradar.config import derive_virtual_array
from superradar.dsp import Windows, process_frame
from superradar.synthesis import NoiseSpec, add_noise, synthesize_clean

DEFAULT_KAPPA = 12


def upscale_config(config, kappa):
    """Super-radar twin: kappa times more Rx per Tx group, same lambda/2-style spacing.

    Tx count and range axis are unchanged; the virtual aperture and the
    angle grid grow by ``kappa``.
    """
    kappa = int(kappa)
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    if kappa == 1:
        return config
    va = derive_virtual_array(config)
    if not va.is_uniform:
        raise ValueError("upscaling needs a uniform virtual array")
    d = va.element_spacing_m
    n_rx = kappa * config.num_rx
    rx0 = config.rx_positions_m[0]
    tx0 = config.tx_positions_m[0]
    return config.replace(
        rx_positions_m=tuple(rx0 + k * d for k in range(n_rx)),
        tx_positions_m=tuple(tx0 + i * n_rx * d for i in range(config.num_tx)),
        angle_bins=kappa * config.angle_bins,
    )


def frame_seed(master_seed, index):
    """Seed of frame ``index``: first 8 bytes of blake2b("master:index"), little-endian."""
    digest = hashlib.blake2b(f"{int(master_seed)}:{int(index)}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def sub_seeds(seed, n):
    """``n`` independent 63-bit seeds derived from one frame seed."""
    states = np.random.SeedSequence(int(seed)).generate_state(n, dtype=np.uint64)
    return [int(s) >> 1 for s in states]


@dataclass
class FramePair:
    input_image: object
    super_image: object
    scene: object
    seed: int
    kappa: int
    super_clean: object = None


def generate_pair(scene, config, kappa=DEFAULT_KAPPA, seed=0, noise_variance=None,
                  keep_clean=False, windows=Windows()):
    """Render ``scene`` with the input radar and its kappa super-radar twin.

    Both images see identical reflection points; noise is drawn
    independently for each with the same image-domain variance.
    ``keep_clean`` also returns the noiseless super image.
    """
    if noise_variance is None:
        noise_variance = config.noise_image_variance
    s_in, s_sup = sub_seeds(seed, 2)
    wk = windows.as_kwargs()

    raw = add_noise(synthesize_clean(scene, config), config, NoiseSpec(noise_variance, s_in), **wk)
    input_image = process_frame(raw, config, windows)

    cfg_sup = upscale_config(config, kappa)
    clean = synthesize_clean(scene, cfg_sup)
    raw_sup = add_noise(clean, cfg_sup, NoiseSpec(noise_variance, s_sup), **wk)
    super_image = process_frame(raw_sup, cfg_sup, windows)
    super_clean = process_frame(clean, cfg_sup, windows) if keep_clean else None
    return FramePair(input_image, super_image, scene, int(seed), kappa, super_clean)
