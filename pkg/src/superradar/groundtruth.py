"""Reflection-probability ground truth, pixel partition and the weighted boosting loss."""

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from superradar.config import ImageGrid, sin_azimuth_grid

LABEL_NOISE, LABEL_SPREAD, LABEL_REFLECTION = 0, 1, 2
SPREAD_THRESHOLD_DB = 8.0
EPS = 1e-7


@dataclass(frozen=True)
class SigmaModel:
    """Noise variance and range-dependent reflection variance 100 R_max^2 s_n^2 / r^2."""

    noise_variance: float = 8e-5
    max_range_m: float = 50.0
    min_range_m: float = 1.0

    def variance_ratio(self, r):
        """sigma_s^2 / sigma_n^2 at range ``r`` (clamped below ``min_range_m``)."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("range must be positive")
        r = np.maximum(r, self.min_range_m)
        return 100.0 * self.max_range_m**2 / r**2

    def signal_variance(self, r):
        return self.variance_ratio(r) * self.noise_variance


def _probability(power, ratio, noise_var):
    # p = 1 / (1 + ratio * exp(-x/(2 s_n^2) + x/(2 s_s^2))); exact 1/(1 + ratio) at x = 0
    a = power / (2 * noise_var) * (1.0 - 1.0 / ratio)
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + ratio * np.exp(-a))


def intensity_to_probability(z, r, model=SigmaModel()):
    """Posterior reflection probability of a pixel with complex value ``z`` at range ``r``.

    Equal priors, chi-square (2 dof) intensity with per-component variance
    sigma_s^2(r) for reflections and sigma_n^2 for noise.
    """
    power = np.abs(np.asarray(z)) ** 2
    return _probability(power, model.variance_ratio(r), model.noise_variance)


@dataclass
class ProbabilityMap:
    p: np.ndarray
    signal_variance: np.ndarray   # per range row


def probability_map(image, model=SigmaModel()):
    """Map every pixel of ``image`` to a reflection probability.

    Range bin 0 sits at r = 0 and is evaluated at the clamp range.
    """
    r = np.maximum(image.grid.range_values_m, model.min_range_m)
    p = _probability(image.intensity, model.variance_ratio(r)[:, None], model.noise_variance)
    return ProbabilityMap(p=p, signal_variance=model.signal_variance(r))


def binary_mapping(z, threshold):
    """1 where |z|^2 >= threshold (inclusive), else 0."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    return (np.abs(np.asarray(z)) ** 2 >= threshold).astype(np.float64)


def estimate_noise_std(image):
    """Empirical std of the complex pixel values of a scene-free image."""
    return float(np.sqrt(np.mean(image.intensity)))


@dataclass
class PixelPartition:
    labels: np.ndarray    # uint8, 0 noise / 1 spreading function / 2 reflection
    threshold: float      # amplitude threshold used for the spreading set

    @property
    def reflection(self):
        return self.labels == LABEL_REFLECTION

    @property
    def spread(self):
        return self.labels == LABEL_SPREAD

    @property
    def noise(self):
        return self.labels == LABEL_NOISE


def reflection_cells(scene, grid):
    """Boolean mask of grid cells that contain at least one scene point."""
    mask = np.zeros((grid.num_range_bins, grid.num_angle_bins), dtype=bool)
    if len(scene) == 0:
        return mask
    ri = grid.range_bin(scene.ranges)
    ai = grid.angle_bin(scene.sin_azimuth)
    ok = (scene.ranges > 0) & (ri >= 0) & (ri < grid.num_range_bins)
    mask[ri[ok], ai[ok]] = True
    return mask


def partition_pixels(input_image, scene, noise_std, kappa=1, threshold_db=SPREAD_THRESHOLD_DB):
    """Split the output grid into reflection / spreading-function / noise pixels.

    The output grid is the input grid refined ``kappa`` times in angle.
    Reflection pixels are cells holding a scene point. Spreading pixels are
    the remaining pixels whose input-image amplitude is at least
    ``threshold_db`` above ``noise_std``; each input column covers the
    ``kappa`` output columns whose centres fall in its cell.
    """
    amp_thr = noise_std * 10 ** (threshold_db / 20)
    grid_in = input_image.grid
    k_in = grid_in.num_angle_bins
    k_out = kappa * k_in
    grid_out = ImageGrid(grid_in.range_bin_spacing_m, grid_in.num_range_bins,
                         sin_azimuth_grid(k_out), k_out)
    above = np.sqrt(input_image.intensity) >= amp_thr
    cols = np.mod(np.floor(np.arange(k_out) / kappa + 0.5).astype(np.int64), k_in)
    above_out = above[:, cols]
    refl = reflection_cells(scene, grid_out)
    labels = np.full(refl.shape, LABEL_NOISE, dtype=np.uint8)
    labels[above_out] = LABEL_SPREAD
    labels[refl] = LABEL_REFLECTION
    return PixelPartition(labels=labels, threshold=float(amp_thr))


# ---------------------------------------------------------------------------
# loss


@dataclass(frozen=True)
class LossWeights:
    rho_r: float = 0.1
    rho_s: float = 1.0
    rho_n: float = 5.0

    def __post_init__(self):
        w = (self.rho_r, self.rho_s, self.rho_n)
        if min(w) < 0 or max(w) <= 0:
            raise ValueError("weights must be >= 0 with at least one > 0")

    def scaled(self, c):
        return LossWeights(self.rho_r * c, self.rho_s * c, self.rho_n * c)


PARTITION_MODES = ("full", "signal_noise", "none")
LOSS_VARIANTS = ("ce", "l1")

# ablation grid: (loss, ground-truth mapping, partition mode)
ABLATION_CONFIGS = (
    ("l1", "probability", "none"),
    ("l1", "probability", "full"),
    ("ce", "probability", "signal_noise"),
    ("ce", "binary", "full"),
    ("ce", "probability", "full"),
)


def pixel_loss(p_hat, p, variant="ce"):
    p_hat = np.asarray(p_hat, dtype=float)
    p = np.asarray(p, dtype=float)
    if variant == "ce":
        # log arguments floored at EPS; xlogy keeps exact zeros for p in {0, 1}
        return -(xlogy(p, np.maximum(p_hat, EPS)) + xlogy(1 - p, np.maximum(1 - p_hat, EPS)))
    if variant == "l1":
        return np.abs(p - p_hat)
    raise ValueError(f"unknown loss variant {variant!r}")


def _sets(partition, weights, mode):
    lab = partition.labels
    if mode == "full":
        return [(lab == LABEL_REFLECTION, weights.rho_r),
                (lab == LABEL_SPREAD, weights.rho_s),
                (lab == LABEL_NOISE, weights.rho_n)]
    if mode == "signal_noise":
        return [(lab == LABEL_REFLECTION, weights.rho_r),
                (lab != LABEL_REFLECTION, weights.rho_n)]
    if mode == "none":
        return [(np.ones(lab.shape, dtype=bool), 1.0)]
    raise ValueError(f"unknown partition mode {mode!r}")


def boost_loss(p_hat, p, partition, weights=LossWeights(), variant="ce",
               partition_mode="full", per_set_mean=False):
    """Weighted per-set sum of pixel losses between prediction and reference.

    ``per_set_mean`` divides each set's sum by its size (empty sets count 0).
    """
    p_hat = getattr(p_hat, "p", p_hat)
    p = getattr(p, "p", p)
    p_hat = np.asarray(p_hat, dtype=float)
    p = np.asarray(p, dtype=float)
    if p_hat.shape != p.shape or p.shape != partition.labels.shape:
        raise ValueError(f"shape mismatch: {p_hat.shape}, {p.shape}, {partition.labels.shape}")
    per_pixel = pixel_loss(p_hat, p, variant)
    total = 0.0
    for mask, rho in _sets(partition, weights, partition_mode):
        s = float(np.sum(per_pixel[mask]))
        if per_set_mean:
            n = int(np.count_nonzero(mask))
            s = s / n if n else 0.0
        total += rho * s
    return total


def reference_map(super_image, mapping="probability", model=SigmaModel(), threshold=None):
    """Ground-truth target from the super image: probability or binary mapping."""
    if mapping == "probability":
        return probability_map(super_image, model).p
    if mapping == "binary":
        if threshold is None:
            raise ValueError("binary mapping needs a threshold")
        return binary_mapping(super_image.complex, threshold)
    raise ValueError(f"unknown mapping {mapping!r}")
