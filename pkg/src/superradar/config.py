"""Radar waveform/array description and the grids derived from it."""

import dataclasses
import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

# tolerance for calling a virtual array uniform
UNIFORM_TOL_M = 1e-9


@dataclass(frozen=True)
class RadarConfig:
    """Fast-chirp FMCW MIMO radar with a linear (azimuth-only) array.

    Positions are scalars along the array axis in meters. ``angle_bins=None``
    resolves to twice the virtual element count.
    """

    carrier_frequency_hz: float
    chirp_slope_hz_per_s: float
    chirp_duration_s: float
    chirps_per_frame: int
    sampling_rate_hz: float
    samples_per_chirp: int
    tx_positions_m: tuple
    rx_positions_m: tuple
    noise_image_variance: float = 8e-5
    max_range_m: float = 50.0
    angle_bins: int = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "tx_positions_m", tuple(float(p) for p in self.tx_positions_m))
        set_(self, "rx_positions_m", tuple(float(p) for p in self.rx_positions_m))
        set_(self, "chirps_per_frame", int(self.chirps_per_frame))
        set_(self, "samples_per_chirp", int(self.samples_per_chirp))
        n_virtual = len(self.tx_positions_m) * len(self.rx_positions_m)
        if self.angle_bins is None:
            set_(self, "angle_bins", 2 * n_virtual)
        set_(self, "angle_bins", int(self.angle_bins))
        self._validate(n_virtual)

    def _validate(self, n_virtual):
        if not self.carrier_frequency_hz > 0:
            raise ValueError("carrier_frequency_hz must be positive")
        if not self.chirp_slope_hz_per_s > 0:
            raise ValueError("chirp_slope_hz_per_s must be positive")
        if not self.sampling_rate_hz > 0 or self.samples_per_chirp < 1:
            raise ValueError("sampling_rate_hz and samples_per_chirp must be positive")
        if self.chirps_per_frame < 1:
            raise ValueError("chirps_per_frame must be >= 1")
        # small slack for float products such as 12e-6 * 25e6
        if self.chirp_duration_s * self.sampling_rate_hz < self.samples_per_chirp * (1 - 1e-12):
            raise ValueError("samples_per_chirp does not fit in one chirp (T_c * f_s < N)")
        for name in ("tx_positions_m", "rx_positions_m"):
            pos = np.asarray(getattr(self, name))
            if pos.size == 0:
                raise ValueError(f"{name} must be non-empty")
            if np.any(np.diff(pos) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
        if self.chirps_per_frame % len(self.tx_positions_m):
            raise ValueError("chirps_per_frame must be divisible by the number of Tx (TDM)")
        if self.angle_bins < n_virtual:
            raise ValueError("angle_bins must be >= number of virtual elements")
        if self.noise_image_variance < 0:
            raise ValueError("noise_image_variance must be >= 0")
        if not self.max_range_m > 0:
            raise ValueError("max_range_m must be positive")

    @property
    def wavelength_m(self):
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    @property
    def num_tx(self):
        return len(self.tx_positions_m)

    @property
    def num_rx(self):
        return len(self.rx_positions_m)

    @property
    def chirps_per_tx(self):
        return self.chirps_per_frame // self.num_tx

    @property
    def bandwidth_hz(self):
        """Swept bandwidth over the sampled part of the chirp."""
        return self.chirp_slope_hz_per_s * self.samples_per_chirp / self.sampling_rate_hz

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["tx_positions_m"] = list(self.tx_positions_m)
        d["rx_positions_m"] = list(self.rx_positions_m)
        return d

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def reference_config(**overrides):
    """4-Tx/8-Rx 77 GHz radar: 0.28 m range bins, 32-element lambda/2 virtual array."""
    f_c = 77e9
    f_s = 25e6
    n = 256
    lam = SPEED_OF_LIGHT / f_c
    d = lam / 2
    slope = SPEED_OF_LIGHT * f_s / (2 * 0.28 * n)
    params = dict(
        carrier_frequency_hz=f_c,
        chirp_slope_hz_per_s=slope,
        chirp_duration_s=12e-6,
        chirps_per_frame=64,
        sampling_rate_hz=f_s,
        samples_per_chirp=n,
        tx_positions_m=[i * 8 * d for i in range(4)],
        rx_positions_m=[k * d for k in range(8)],
        noise_image_variance=8e-5,
        max_range_m=50.0,
        angle_bins=None,
    )
    params.update(overrides)
    return RadarConfig(**params)


@dataclass(frozen=True)
class VirtualArray:
    element_positions_m: np.ndarray
    element_spacing_m: float
    wavelength_m: float
    is_uniform: bool
    # pair_index[i, k] -> position of Tx i / Rx k in element_positions_m
    pair_index: np.ndarray = field(repr=False)

    @property
    def num_elements(self):
        return self.element_positions_m.size


def derive_virtual_array(config):
    tx = np.asarray(config.tx_positions_m)
    rx = np.asarray(config.rx_positions_m)
    sums = (tx[:, None] + rx[None, :]).ravel()
    order = np.argsort(sums, kind="stable")
    pos = sums[order]
    if pos.size > 1 and np.any(np.diff(pos) < UNIFORM_TOL_M):
        raise ValueError("degenerate virtual array: duplicate virtual element positions")
    pair_index = np.empty(sums.size, dtype=np.int64)
    pair_index[order] = np.arange(sums.size)
    if pos.size > 1:
        steps = np.diff(pos)
        spacing = float(steps.mean())
        uniform = bool(np.all(np.abs(steps - spacing) < UNIFORM_TOL_M))
    else:
        spacing, uniform = config.wavelength_m / 2, True
    return VirtualArray(
        element_positions_m=pos,
        element_spacing_m=spacing if uniform else float("nan"),
        wavelength_m=config.wavelength_m,
        is_uniform=uniform,
        pair_index=pair_index.reshape(tx.size, rx.size),
    )


@dataclass(frozen=True)
class ImageGrid:
    range_bin_spacing_m: float
    num_range_bins: int
    sin_azimuth_values: np.ndarray
    num_angle_bins: int

    def __post_init__(self):
        u = self.sin_azimuth_values
        if u.size != self.num_angle_bins:
            raise ValueError("sin_azimuth_values length mismatch")
        if u.size > 1:
            steps = np.diff(u)
            if np.any(np.abs(steps - 2.0 / u.size) > 1e-12):
                raise ValueError("sin-azimuth grid must be uniform")

    @property
    def range_values_m(self):
        return np.arange(self.num_range_bins) * self.range_bin_spacing_m

    @property
    def sin_step(self):
        return 2.0 / self.num_angle_bins

    def range_bin(self, r):
        """Index of the range cell containing ``r`` (cells centred on bin ranges)."""
        return np.floor(np.asarray(r) / self.range_bin_spacing_m + 0.5).astype(np.int64)

    def angle_bin(self, u):
        """Index of the sin-azimuth cell containing ``u``; wraps like the FFT grid."""
        k = np.floor((np.asarray(u) + 1.0) / self.sin_step + 0.5).astype(np.int64)
        return np.mod(k, self.num_angle_bins)


def sin_azimuth_grid(num_bins):
    return -1.0 + 2.0 * np.arange(num_bins) / num_bins


def derive_image_grid(config):
    spacing = SPEED_OF_LIGHT * config.sampling_rate_hz / (
        2 * config.chirp_slope_hz_per_s * config.samples_per_chirp)
    n = config.samples_per_chirp
    if n * spacing < config.max_range_m:
        warnings.warn(
            f"unambiguous range {n * spacing:.2f} m is below max_range_m={config.max_range_m}",
            RuntimeWarning, stacklevel=2)
    return ImageGrid(
        range_bin_spacing_m=spacing,
        num_range_bins=n,
        sin_azimuth_values=sin_azimuth_grid(config.angle_bins),
        num_angle_bins=config.angle_bins,
    )


def velocity_resolution(config):
    """Radial velocity per Doppler bin under TDM (M/I chirps per Tx, interval I*T_c)."""
    frame_time = config.chirps_per_tx * config.num_tx * config.chirp_duration_s
    return SPEED_OF_LIGHT / (2 * config.carrier_frequency_hz * frame_time)


def velocity_axis(config):
    """Velocities of the fftshifted Doppler bins, ascending."""
    d = config.chirps_per_tx
    signed = np.arange(d) - d // 2
    return signed * velocity_resolution(config)


# ---------------------------------------------------------------------------
# structured-text configuration


def config_from_dict(d):
    known = {f.name for f in dataclasses.fields(RadarConfig)}
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return RadarConfig(**d)


def load_config(path=None, overrides=None):
    """Defaults < JSON file < ``overrides`` (a dict of field values)."""
    params = reference_config().to_dict()
    # unset angle_bins means "2x elements" of the final array
    params["angle_bins"] = None
    if path is not None:
        with open(path) as fh:
            params.update(json.load(fh))
    if overrides:
        params.update(overrides)
    return config_from_dict(params)


def save_config(config, path):
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_digest(config):
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
