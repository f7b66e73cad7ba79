"""Dechirped (beat-domain) received signal of a scene, fast-chirp TDM MIMO.

For point q seen by Tx i / Rx k on chirp m, sample n::

    y = c_q * exp(j 2 pi (f_c tau_ik + f_b t_n + f_D m T_c))

with ``f_b = 2 alpha r / c`` (reference-range beat tone), ``f_D = 2 v f_c / c``
and ``t_n = n / f_s``. The signs follow from mixing the echo with the
conjugate transmit chirp ``exp(-j 2 pi (f_c t + alpha t^2 / 2))``.
Stop-and-hop: range is frozen within a chirp, motion shows up only as the
chirp-to-chirp phase.

Because every factor is separable the frame is accumulated as one matrix
product ``[rx * chirp, point] @ [point, sample]``.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from superradar.config import SPEED_OF_LIGHT, derive_image_grid
from superradar.windows import power_gain

_TWO_PI = 2 * np.pi
# points per matmul block; bounds the [rx*chirp, block] temporary
_BLOCK = 256


@dataclass(frozen=True)
class NoiseSpec:
    """Complex Gaussian noise, specified by its per-component image-domain variance."""

    image_domain_variance: float
    seed: int = 0

    def __post_init__(self):
        if self.image_domain_variance < 0:
            raise ValueError("image_domain_variance must be >= 0")


@dataclass
class RawDataCube:
    samples: np.ndarray          # complex [num_rx, M, N]
    tx_schedule: np.ndarray      # int [M], active Tx per chirp
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples.ndim != 3:
            raise ValueError("samples must be [rx, chirp, sample]")
        self.tx_schedule = np.asarray(self.tx_schedule, dtype=np.int64)
        if self.tx_schedule.shape != (self.samples.shape[1],):
            raise ValueError("tx_schedule length must equal the chirp count")

    @property
    def shape(self):
        return self.samples.shape


def tdm_schedule(config):
    return np.arange(config.chirps_per_frame) % config.num_tx


def path_delay(x, y, tx_pos, rx_pos, far_field=True):
    """Round-trip delay Tx -> point -> Rx for antennas on the x axis.

    ``far_field`` uses the plane-wave form ``(2 r - (tx + rx) sin az) / c``;
    otherwise exact distances to each antenna. Broadcasts over inputs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if far_field:
        r = np.hypot(x, y)
        u = x / r
        return (2 * r - (tx_pos + rx_pos) * u) / SPEED_OF_LIGHT
    d_tx = np.hypot(x - tx_pos, y)
    d_rx = np.hypot(x - rx_pos, y)
    return (d_tx + d_rx) / SPEED_OF_LIGHT


def synthesize_chirp_samples(point, config, tx_index, rx_index, chirp_index, far_field=True):
    """Beat samples of one point for one Tx/Rx pair and chirp (length N)."""
    x, y = point.position
    r = np.hypot(x, y)
    tau = path_delay(x, y, config.tx_positions_m[tx_index], config.rx_positions_m[rx_index], far_field)
    f_b = 2 * config.chirp_slope_hz_per_s * r / SPEED_OF_LIGHT
    f_d = 2 * point.radial_velocity_mps * config.carrier_frequency_hz / SPEED_OF_LIGHT
    t = np.arange(config.samples_per_chirp) / config.sampling_rate_hz
    phase = (config.carrier_frequency_hz * tau
             + f_b * t
             + f_d * chirp_index * config.chirp_duration_s)
    return point.reflectivity * np.exp(1j * _TWO_PI * phase)


def array_gain_normalization(config):
    """Per-element amplitude scale 1/sqrt(E).

    With it the coherent array sum of a point has the same peak intensity and
    total energy for any aperture, so an input image and its super-radar twin
    share one intensity scale.
    """
    return 1.0 / np.sqrt(len(config.tx_positions_m) * len(config.rx_positions_m))


def in_grid_mask(scene, config):
    grid = derive_image_grid_quiet(config)
    r = scene.ranges
    r_edge = (grid.num_range_bins - 0.5) * grid.range_bin_spacing_m
    return (r > 0) & (r < r_edge) & (scene.y > 0)


def derive_image_grid_quiet(config):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return derive_image_grid(config)


def synthesize_clean(scene, config, far_field=True):
    """Noiseless frame. Points outside the range grid are skipped and counted."""
    m_count, n_count = config.chirps_per_frame, config.samples_per_chirp
    n_rx = config.num_rx
    schedule = tdm_schedule(config)
    keep = in_grid_mask(scene, config)
    skipped = int(np.count_nonzero(~keep))
    out = np.zeros((n_rx * m_count, n_count), dtype=np.complex128)

    tx = np.asarray(config.tx_positions_m)
    rx = np.asarray(config.rx_positions_m)
    t = np.arange(n_count) / config.sampling_rate_hz
    chirp_t = np.arange(m_count) * config.chirp_duration_s
    tx_of_chirp = tx[schedule]                               # [M]
    g = array_gain_normalization(config)
    f_c = config.carrier_frequency_hz

    idx = np.flatnonzero(keep)
    for start in range(0, idx.size, _BLOCK):
        sel = idx[start:start + _BLOCK]
        x, y = scene.x[sel], scene.y[sel]
        c_q = scene.reflectivity[sel] * g
        r = np.hypot(x, y)
        f_b = 2 * config.chirp_slope_hz_per_s * r / SPEED_OF_LIGHT
        f_d = 2 * scene.radial_velocity[sel] * f_c / SPEED_OF_LIGHT
        # carrier delay phase per (rx, chirp, point); the Tx is fixed by the chirp
        tau = path_delay(x[None, None, :], y[None, None, :],
                         tx_of_chirp[None, :, None], rx[:, None, None], far_field)
        left = np.exp(1j * _TWO_PI * (f_c * tau + f_d[None, None, :] * chirp_t[None, :, None]))
        left *= c_q[None, None, :]
        right = np.exp(1j * _TWO_PI * np.outer(f_b, t))      # [Q, N]
        out += left.reshape(n_rx * m_count, sel.size) @ right

    return RawDataCube(
        samples=out.reshape(n_rx, m_count, n_count),
        tx_schedule=schedule,
        metadata={"skipped_points": skipped, "num_points": len(scene), "far_field": far_field},
    )


def raw_noise_std(config, image_variance, range_window="rect", doppler_window="rect",
                  angle_window="rect"):
    """Per-component std of raw-sample noise giving ``image_variance`` per image component.

    Range and Doppler FFTs are unitary, so white noise keeps its variance up
    to the window power gain. The zero-padded unitary K-point beamformer sums
    E elements, scaling noise power by sum(w_a**2) / K.
    """
    e = config.num_tx * config.num_rx
    gain = (power_gain(range_window, config.samples_per_chirp)
            * power_gain(doppler_window, config.chirps_per_tx)
            * power_gain(angle_window, e) * e / config.angle_bins)
    return float(np.sqrt(image_variance / gain))


def add_noise(cube, config, noise, **windows):
    """Return a copy of ``cube`` with calibrated complex Gaussian noise added."""
    if noise is None or noise.image_domain_variance == 0:
        return RawDataCube(cube.samples.copy(), cube.tx_schedule, dict(cube.metadata))
    std = raw_noise_std(config, noise.image_domain_variance, **windows)
    rng = np.random.default_rng(noise.seed)
    w = rng.standard_normal((2,) + cube.samples.shape)
    samples = cube.samples + std * (w[0] + 1j * w[1])
    meta = dict(cube.metadata, noise_seed=int(noise.seed), raw_noise_std=std)
    return RawDataCube(samples, cube.tx_schedule, meta)


def synthesize_frame(scene, config, noise=None, far_field=True, **windows):
    """Full frame: superposition over points plus calibrated noise.

    ``noise`` defaults to the scene's noise spec; ``windows`` are the
    processing windows the noise is calibrated for.
    """
    if noise is None:
        noise = scene.noise
    cube = synthesize_clean(scene, config, far_field)
    return add_noise(cube, config, noise, **windows)
