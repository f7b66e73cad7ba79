"""Point spread function measurement and the uniform-array reference kernel."""

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from superradar.config import derive_virtual_array
from superradar.dsp import Windows, beamform_vectors, doppler_fft, range_fft, to_virtual
from superradar.scene import ReflectionPoint, Scene
from superradar.synthesis import synthesize_clean


def dirichlet_power(offset_sin, num_elements):
    """Normalised array-factor power of an E-element lambda/2 array at a sin offset."""
    x = np.pi * np.asarray(offset_sin, dtype=float) / 2
    num = np.sin(num_elements * x)
    den = num_elements * np.sin(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(np.abs(den) < 1e-15, 1.0, (num / np.where(den == 0, 1, den)) ** 2)
    return out


def dirichlet_reference(num_elements):
    """First side-lobe level (dB) and -3 dB main-lobe width (sin units), evaluated numerically."""
    e = num_elements
    null = 2.0 / e
    res = minimize_scalar(lambda s: -dirichlet_power(s, e), bounds=(null, 2 * null),
                          method="bounded", options={"xatol": 1e-12})
    sidelobe_db = 10 * np.log10(dirichlet_power(res.x, e))
    half = brentq(lambda s: dirichlet_power(s, e) - 0.5, 1e-12, null, xtol=1e-15)
    return {"sidelobe_db": float(sidelobe_db), "width_3db": float(2 * half)}


def lobe_metrics(cut, step):
    """-3 dB width and first side-lobe level of a 1-D power cut.

    ``step`` is the sample spacing. Crossings are linearly interpolated on
    power; the side-lobe peak is refined by a parabola through the dB
    samples around the sampled maximum.
    """
    p = np.asarray(cut, dtype=float)
    i0 = int(np.argmax(p))
    p = p / p[i0]
    n = p.size

    def crossing(direction):
        i = i0
        while 0 <= i + direction < n and p[i + direction] >= 0.5:
            i += direction
        j = i + direction
        if not 0 <= j < n:
            return float(i)
        frac = (p[i] - 0.5) / (p[i] - p[j])
        return i + direction * frac

    width = (crossing(1) - crossing(-1)) * step

    def first_sidelobe(direction):
        i = i0
        while 0 <= i + direction < n and p[i + direction] <= p[i]:
            i += direction
        while 0 <= i + direction < n and p[i + direction] >= p[i]:
            i += direction
        if i in (0, n - 1) or i == i0:
            return -np.inf
        db = 10 * np.log10(np.maximum(p[i - 1:i + 2], 1e-300))
        denom = db[0] - 2 * db[1] + db[2]
        if denom >= 0:
            return float(db[1])
        return float(db[1] - (db[0] - db[2]) ** 2 / (8 * denom))

    sidelobe = max(first_sidelobe(1), first_sidelobe(-1))
    return {"width_3db": float(width), "sidelobe_db": float(sidelobe), "peak_index": i0}


def point_cube_slices(config, position=(0.0, 20.0), velocity=0.0, windows=Windows()):
    """Virtual-array vectors of a single noiseless point: [range, doppler, element]."""
    scene = Scene.from_points([ReflectionPoint(tuple(position), velocity, 1.0 + 0j)])
    raw = synthesize_clean(scene, config)
    rd = doppler_fft(range_fft(raw, windows.range), raw.tx_schedule, config.num_tx, windows.doppler)
    return to_virtual(rd, config)


def measure_psf(config, position=(0.0, 20.0), velocity=0.0, oversample=16, windows=Windows()):
    """Measure angle and range PSF of one point through the processing chain.

    Only the strongest range-Doppler bin is beamformed, on a grid
    ``oversample`` times finer than the element count, so this stays cheap
    for large super-radar apertures.
    """
    virt = point_cube_slices(config, position, velocity, windows)
    energy = np.sum(np.abs(virt) ** 2, axis=-1)
    ri, di = np.unravel_index(np.argmax(energy), energy.shape)
    e = derive_virtual_array(config).num_elements
    k = oversample * e
    angle_cut = np.abs(beamform_vectors(virt[ri, di], config, k, windows.angle)) ** 2
    angle = lobe_metrics(angle_cut, 2.0 / k)
    # range cut at the peak angle, on the processing grid
    beam = beamform_vectors(virt[:, di, :], config, k, windows.angle)
    range_cut = np.abs(beam[:, angle["peak_index"]]) ** 2
    return {
        "num_elements": int(e),
        "width_3db_sin": angle["width_3db"],
        "sidelobe_db": angle["sidelobe_db"],
        "peak_sin": float(-1.0 + 2.0 * angle["peak_index"] / k),
        "peak_range_bin": int(ri),
        "peak_doppler_bin": int(di),
        "range_width_3db_bins": lobe_metrics(range_cut, 1.0)["width_3db"],
        "angle_cut": angle_cut,
    }
