import numpy as np
from scipy.signal import windows as _sw

WINDOWS = ("rect", "hann")


def get_window(name, n):
    """Periodic taper of length ``n``; ``rect`` is all ones."""
    if name in (None, "rect", "rectangular", "boxcar"):
        return np.ones(n)
    if name in ("hann", "hanning"):
        return _sw.hann(n, sym=False)
    raise ValueError(f"unknown window {name!r}; expected one of {WINDOWS}")


def power_gain(name, n):
    """Mean squared window value: white-noise power gain of a windowed unitary DFT."""
    w = get_window(name, n)
    return float(np.mean(w**2))
