"""Reflection-point detection scoring: greedy matching, precision-recall, AP.

Detections are centres of pixels at or above a threshold; ground truth is
the centres of above-noise pixels of a reference image. A detection is a
true positive when an unmatched ground-truth point lies within the match
radius (25 cm by default).
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from superradar import kernels

MATCH_RADIUS_M = 0.25
DEFAULT_NUM_THRESHOLDS = 100


def pixel_centers_xy(image):
    """Cartesian (x, y) of every pixel centre, shape [range, angle, 2]."""
    g = image.grid
    r = g.range_values_m[:, None]
    u = np.asarray(g.sin_azimuth_values)[None, :]
    return np.stack(np.broadcast_arrays(r * u, r * np.sqrt(1.0 - u**2)), axis=-1)


def noise_threshold(noise_std, db=8.0):
    """Intensity threshold ``db`` above the noise standard deviation."""
    return float((noise_std * 10 ** (db / 20)) ** 2)


def extract_gt_points(super_image, threshold):
    """Centres of pixels whose intensity is at least ``threshold``; shape [n, 2]."""
    mask = super_image.intensity >= threshold
    return pixel_centers_xy(super_image)[mask]


@dataclass
class MatchResult:
    tp: int
    fp: int
    fn: int
    matched_gt: np.ndarray   # per detection in input order, -1 when unmatched


def _candidates(dets, gts, radius):
    """CSR lists of ground-truth indices within ``radius`` of each detection, nearest first."""
    n = len(dets)
    if len(gts) == 0 or n == 0:
        return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    tree = cKDTree(gts)
    lists = tree.query_ball_point(dets, r=radius)
    counts = np.fromiter((len(c) for c in lists), dtype=np.int64, count=n)
    ptr = np.concatenate([[0], np.cumsum(counts)])
    cand = np.fromiter((g for c in lists for g in c), dtype=np.int64, count=int(ptr[-1]))
    if cand.size:
        owner = np.repeat(np.arange(n), counts)
        dist = np.hypot(*(dets[owner] - gts[cand]).T)
        order = np.lexsort((cand, dist, owner))
        cand = cand[order]
    return ptr, cand


def greedy_assign(dets, gts, radius=MATCH_RADIUS_M, scores=None, use_numba=None):
    """Greedy matching in descending score order (ties by detection index).

    Returns ``(order, matched)``: the processing order and, per position in
    it, the matched ground-truth index or -1.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    dets = np.asarray(dets, dtype=float).reshape(-1, 2)
    gts = np.asarray(gts, dtype=float).reshape(-1, 2)
    if scores is None:
        order = np.arange(len(dets))
    else:
        order = np.argsort(-np.asarray(scores, dtype=float), kind="stable")
    ptr, cand = _candidates(dets, gts, radius)
    matched = kernels.greedy_match(order, ptr, cand, len(gts), use_numba=use_numba)
    return order, matched


def match_detections(dets, gts, radius=MATCH_RADIUS_M, scores=None, use_numba=None):
    order, matched = greedy_assign(dets, gts, radius, scores, use_numba)
    per_det = np.full(len(order), -1, dtype=np.int64)
    per_det[order] = matched
    tp = int(np.count_nonzero(matched >= 0))
    return MatchResult(tp=tp, fp=len(order) - tp, fn=len(np.reshape(gts, (-1, 2))) - tp,
                       matched_gt=per_det)


@dataclass
class EvalReport:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    average_precision: float
    match_radius_m: float

    def to_table(self, path=None):
        lines = ["threshold\tprecision\trecall"]
        lines += [f"{t:.9e}\t{p:.9f}\t{r:.9f}"
                  for t, p, r in zip(self.thresholds, self.precision, self.recall)]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def summary(self):
        return {"average_precision": float(self.average_precision),
                "match_radius_m": float(self.match_radius_m),
                "num_thresholds": int(self.thresholds.size),
                "num_gt": int(self.tp[0] + self.fn[0]) if self.tp.size else 0}

    def write_summary(self, path):
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def average_precision(recall, precision):
    """Trapezoidal area under the precision envelope, anchored at recall 0."""
    recall = np.asarray(recall, dtype=float)
    precision = np.asarray(precision, dtype=float)
    order = np.lexsort((-precision, recall))
    r = recall[order]
    p = precision[order]
    # envelope: best precision achievable at this recall or higher
    p = np.maximum.accumulate(p[::-1])[::-1]
    r = np.concatenate([[0.0], r])
    p = np.concatenate([[p[0]], p])
    return float(np.trapezoid(p, r) if hasattr(np, "trapezoid") else np.trapz(p, r))


def default_thresholds(scores, noise_floor=None, num=DEFAULT_NUM_THRESHOLDS):
    """Log-spaced thresholds from the noise floor (median score by default) to the maximum."""
    scores = np.asarray(scores, dtype=float)
    top = float(scores.max()) if scores.size else 1.0
    if top <= 0:
        return np.linspace(0.0, 1.0, num)
    floor = float(np.median(scores)) if noise_floor is None else float(noise_floor)
    floor = min(max(floor, top * 1e-12), top)
    return np.geomspace(floor, top, num)


def unique_thresholds(scores):
    """Every distinct finite score, descending; makes AP invariant to monotone rescaling."""
    s = np.unique(np.asarray(scores, dtype=float))
    return s[np.isfinite(s)][::-1]


def _threshold_array(scores, thresholds, noise_floor):
    if thresholds is None:
        thresholds = default_thresholds(scores, noise_floor)
    elif isinstance(thresholds, str) and thresholds == "unique":
        thresholds = unique_thresholds(scores)
    thresholds = np.sort(np.asarray(thresholds, dtype=float))[::-1]
    if thresholds.size < 2:
        raise ValueError("need at least two thresholds")
    return thresholds


def threshold_counts(image, gt_points, thresholds, radius=MATCH_RADIUS_M, scores=None,
                     use_numba=None):
    """(tp, n_det) at each of the descending ``thresholds``.

    Detections at a threshold are a prefix of the score-sorted pixel list,
    so one greedy pass serves every threshold.
    """
    if scores is None:
        scores = image.intensity
    gts = np.asarray(gt_points, dtype=float).reshape(-1, 2)
    flat = np.asarray(scores, dtype=float).ravel()
    keep = np.flatnonzero(flat >= thresholds[-1])
    centers = pixel_centers_xy(image).reshape(-1, 2)[keep]
    s = flat[keep]
    order, matched = greedy_assign(centers, gts, radius, s, use_numba)
    sorted_scores = s[order]
    cum_tp = np.concatenate([[0], np.cumsum(matched >= 0)])
    n_det = np.searchsorted(-sorted_scores, -thresholds, side="right")
    return cum_tp[n_det], n_det


def _report(thresholds, tp, n_det, n_gt, radius):
    fp = n_det - tp
    fn = n_gt - tp
    precision = np.where(n_det > 0, tp / np.maximum(n_det, 1), 1.0)
    recall = tp / n_gt if n_gt else np.zeros(thresholds.size)
    ap = average_precision(recall, precision) if n_gt else 0.0
    return EvalReport(thresholds=thresholds, precision=precision.astype(float),
                      recall=np.asarray(recall, dtype=float), tp=tp, fp=fp, fn=fn,
                      average_precision=ap, match_radius_m=float(radius))


def precision_recall_ap(image, gt_points, thresholds=None, radius=MATCH_RADIUS_M,
                        scores=None, noise_floor=None, use_numba=None):
    """Sweep detection thresholds over ``image`` and score against ``gt_points``.

    ``scores`` overrides the per-pixel score (default: intensity).
    ``thresholds`` is an array, ``"unique"`` or None for the log-spaced default.
    """
    if scores is None:
        scores = image.intensity
    scores = np.asarray(scores, dtype=float)
    thresholds = _threshold_array(scores, thresholds, noise_floor)
    gts = np.asarray(gt_points, dtype=float).reshape(-1, 2)
    tp, n_det = threshold_counts(image, gts, thresholds, radius, scores, use_numba)
    return _report(thresholds, tp, n_det, len(gts), radius)


def pooled_precision_recall(items, thresholds=None, radius=MATCH_RADIUS_M, noise_floor=None,
                            use_numba=None):
    """Precision/recall over several frames with counts summed per threshold.

    ``items`` is a sequence of ``(image, gt_points)``. Default thresholds
    span the pooled intensities.
    """
    items = list(items)
    if not items:
        raise ValueError("no frames to evaluate")
    if thresholds is None or isinstance(thresholds, str):
        pooled = np.concatenate([img.intensity.ravel() for img, _ in items])
        thresholds = _threshold_array(pooled, thresholds, noise_floor)
    else:
        thresholds = _threshold_array(None, thresholds, None)
    tp = np.zeros(thresholds.size, dtype=np.int64)
    n_det = np.zeros(thresholds.size, dtype=np.int64)
    n_gt = 0
    for image, gts in items:
        gts = np.asarray(gts, dtype=float).reshape(-1, 2)
        t, n = threshold_counts(image, gts, thresholds, radius, None, use_numba)
        tp += t
        n_det += n
        n_gt += len(gts)
    return _report(thresholds, tp, n_det, n_gt, radius)
