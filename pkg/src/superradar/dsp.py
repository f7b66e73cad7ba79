"""Range FFT -> Doppler FFT -> beamforming -> three-channel range/sin-azimuth image.

All transforms are unitary (``norm="ortho"``); with rectangular windows every
stage preserves energy. Doppler and angle axes are stored in ascending
order (Doppler is fftshifted, the angle grid starts at sin = -1).
"""

from dataclasses import dataclass

import numpy as np

from superradar import kernels
from superradar.config import (SPEED_OF_LIGHT, ImageGrid, derive_virtual_array,
                               sin_azimuth_grid, velocity_axis, velocity_resolution)
from superradar.scene import DEFAULT_FOV_DEG
from superradar.synthesis import derive_image_grid_quiet
from superradar.windows import get_window


@dataclass
class RangeDopplerAngleCube:
    data: np.ndarray                  # complex [range, doppler, angle]
    range_bin_spacing_m: float
    velocities_mps: np.ndarray        # [doppler], ascending
    sin_azimuth_values: np.ndarray    # [angle], ascending

    @property
    def power(self):
        return self.data.real**2 + self.data.imag**2


@dataclass
class RadarImage:
    """Range x sin-azimuth image: strongest-Doppler complex value plus Doppler map."""

    real_part: np.ndarray
    imag_part: np.ndarray
    doppler_map: np.ndarray
    range_bin_spacing_m: float
    sin_azimuth_values: np.ndarray
    velocity_resolution_mps: float = 0.0

    @property
    def shape(self):
        return self.real_part.shape

    @property
    def intensity(self):
        return self.real_part**2 + self.imag_part**2

    @property
    def complex(self):
        return self.real_part + 1j * self.imag_part

    @property
    def grid(self):
        return ImageGrid(self.range_bin_spacing_m, self.shape[0],
                         np.asarray(self.sin_azimuth_values), self.shape[1])

    def channels(self):
        return np.stack([self.real_part, self.imag_part, self.doppler_map])


def range_fft(cube, window="rect"):
    """Unitary N-point FFT along the sample axis of a [rx, chirp, sample] cube."""
    samples = cube.samples if hasattr(cube, "samples") else cube
    w = get_window(window, samples.shape[-1])
    return np.fft.fft(samples * w, axis=-1, norm="ortho")


def doppler_fft(spectra, tx_schedule, num_tx, window="rect"):
    """Regroup chirps per Tx and FFT over slow time.

    Returns [rx, tx, doppler, range] with the Doppler axis fftshifted.
    """
    tx_schedule = np.asarray(tx_schedule)
    n_rx, m, n = spectra.shape
    if m % num_tx:
        raise ValueError("chirp count must be divisible by the number of Tx")
    if not np.array_equal(tx_schedule, np.arange(m) % num_tx):
        raise ValueError("only the cyclic TDM schedule 0..I-1 is supported")
    d = m // num_tx
    # chirp m = l * I + i  ->  [rx, l, i, range] -> [rx, i, l, range]
    grouped = spectra.reshape(n_rx, d, num_tx, n).transpose(0, 2, 1, 3)
    w = get_window(window, d)[None, None, :, None]
    rd = np.fft.fft(grouped * w, axis=2, norm="ortho")
    return np.fft.fftshift(rd, axes=2)


def tdm_compensation(config):
    """Phase factors [tx, doppler] undoing the i*T_c Doppler lag of Tx i."""
    d = config.chirps_per_tx
    signed = np.arange(d) - d // 2
    f_d = signed / (d * config.num_tx * config.chirp_duration_s)
    lag = np.arange(config.num_tx) * config.chirp_duration_s
    return np.exp(-2j * np.pi * np.outer(lag, f_d))


def to_virtual(rd, config, compensate=True):
    """[rx, tx, doppler, range] -> [range, doppler, element] in ascending element position."""
    va = derive_virtual_array(config)
    if compensate:
        rd = rd * tdm_compensation(config)[None, :, :, None]
    n_rx, n_tx, d, n = rd.shape
    flat = rd.transpose(3, 2, 1, 0).reshape(n, d, n_tx * n_rx)   # (i, k) -> i*R + k
    out = np.empty_like(flat)
    out[..., va.pair_index.ravel()] = flat
    return out


def beamform_vectors(x, config, num_angle_bins=None, window="rect"):
    """Beamform element vectors (last axis) onto the uniform sin-azimuth grid.

    lambda/2 arrays use a zero-padded unitary FFT; other uniform spacings use
    the explicit steering sum scaled by 1/sqrt(K).
    """
    va = derive_virtual_array(config)
    if not va.is_uniform:
        raise ValueError("beamforming requires a uniform virtual array")
    e = va.num_elements
    k = config.angle_bins if num_angle_bins is None else int(num_angle_bins)
    if k < e:
        raise ValueError("num_angle_bins must be >= number of virtual elements")
    xw = x * get_window(window, e)
    lam = va.wavelength_m
    if abs(va.element_spacing_m - lam / 2) <= 1e-6 * lam:
        # exp(j pi e u_k) with u_k = -1 + 2k/K equals (-1)^e exp(j 2 pi e k / K)
        sign = np.where(np.arange(e) % 2 == 0, 1.0, -1.0)
        return np.fft.ifft(xw * sign, n=k, axis=-1, norm="ortho")
    rel = va.element_positions_m - va.element_positions_m[0]
    steer = np.exp(2j * np.pi * np.outer(sin_azimuth_grid(k), rel) / lam) / np.sqrt(k)
    return xw @ steer.T


def beamform(rd, config, num_angle_bins=None, window="rect", compensate=True):
    """Per-Tx range-Doppler maps -> :class:`RangeDopplerAngleCube`."""
    grid = derive_image_grid_quiet(config)
    k = config.angle_bins if num_angle_bins is None else int(num_angle_bins)
    data = beamform_vectors(to_virtual(rd, config, compensate), config, k, window)
    return RangeDopplerAngleCube(
        data=data,
        range_bin_spacing_m=grid.range_bin_spacing_m,
        velocities_mps=velocity_axis(config),
        sin_azimuth_values=sin_azimuth_grid(k),
    )


def extract_channels(cube, use_numba=None):
    idx, value = kernels.doppler_peak(cube.data, use_numba=use_numba)
    vel = np.asarray(cube.velocities_mps)
    res = float(vel[1] - vel[0]) if vel.size > 1 else 0.0
    return RadarImage(
        real_part=value.real.copy(),
        imag_part=value.imag.copy(),
        doppler_map=vel[idx],
        range_bin_spacing_m=cube.range_bin_spacing_m,
        sin_azimuth_values=np.asarray(cube.sin_azimuth_values),
        velocity_resolution_mps=res,
    )


@dataclass(frozen=True)
class Windows:
    range: str = "rect"
    doppler: str = "rect"
    angle: str = "rect"

    def as_kwargs(self):
        return dict(range_window=self.range, doppler_window=self.doppler, angle_window=self.angle)


def process_to_cube(raw, config, windows=Windows()):
    spectra = range_fft(raw, windows.range)
    rd = doppler_fft(spectra, raw.tx_schedule, config.num_tx, windows.doppler)
    return beamform(rd, config, window=windows.angle)


def process_frame(raw, config, windows=Windows()):
    """Raw cube -> :class:`RadarImage` through the whole chain."""
    return extract_channels(process_to_cube(raw, config, windows))


def analytic_bins(r, u, v, config):
    """Fractional (range, angle, doppler) bin positions of a point in processed data."""
    grid = derive_image_grid_quiet(config)
    d = config.chirps_per_tx
    return (np.asarray(r) / grid.range_bin_spacing_m,
            (np.asarray(u) + 1.0) * config.angle_bins / 2.0,
            np.asarray(v) / velocity_resolution(config) + d // 2)


# ---------------------------------------------------------------------------
# polar -> Cartesian


@dataclass
class CartesianImage:
    data: np.ndarray          # [ny, nx]
    x_values: np.ndarray
    y_values: np.ndarray
    valid: np.ndarray         # False where the pixel lies outside the field of view

    @property
    def dx(self):
        return float(self.x_values[1] - self.x_values[0])

    @property
    def dy(self):
        return float(self.y_values[1] - self.y_values[0])


def to_cartesian(channel, range_bin_spacing_m, sin_azimuth_values, resolution_m=0.2,
                 extent=None, fov_deg=DEFAULT_FOV_DEG, use_numba=None):
    """Bilinear resampling of a [range, sin-azimuth] channel onto an x/y grid.

    ``resolution_m`` is a scalar or (dx, dy). ``extent`` is
    (x_min, x_max, y_min, y_max); by default it covers the field of view out
    to the last range bin.
    """
    channel = np.asarray(channel, dtype=np.float64)
    dx, dy = np.broadcast_to(np.asarray(resolution_m, dtype=float), (2,))
    if not (dx > 0 and dy > 0):
        raise ValueError("resolution must be positive")
    n_r, n_a = channel.shape
    u = np.asarray(sin_azimuth_values, dtype=float)
    r_max = (n_r - 1) * range_bin_spacing_m
    s_fov = np.sin(np.deg2rad(fov_deg))
    if extent is None:
        extent = (-r_max * s_fov, r_max * s_fov, 0.0, r_max)
    x0, x1, y0, y1 = extent
    xs = x0 + dx * np.arange(int(np.floor((x1 - x0) / dx + 1e-9)) + 1)
    ys = y0 + dy * np.arange(int(np.floor((y1 - y0) / dy + 1e-9)) + 1)
    xx, yy = np.meshgrid(xs, ys)
    rr = np.hypot(xx, yy)
    uu = np.divide(xx, rr, out=np.zeros_like(rr), where=rr > 0)
    step = u[1] - u[0]
    fi = rr / range_bin_spacing_m
    fj = (uu - u[0]) / step
    in_fov = (yy > 0) & (np.abs(uu) <= s_fov + 1e-12) & (rr <= r_max)
    fi = np.where(in_fov, fi, -1.0)
    data, ok = kernels.bilinear(channel, fi, fj, use_numba=use_numba)
    return CartesianImage(data=data, x_values=xs, y_values=ys, valid=ok & in_fov)
