"""Independent reference implementations used to check the package.

These are deliberately slow and literal: explicit sums instead of FFTs,
exhaustive search instead of greedy matching, closed-form densities instead
of logistic shortcuts. None of them import package internals beyond plain
data containers.
"""

import itertools
import math

import numpy as np

C = 299_792_458.0


def small_config_params():
    """A reduced radar (2 Tx x 4 Rx, 32 samples, 8 chirps) for brute-force checks."""
    f_c = 77e9
    lam = C / f_c
    d = lam / 2
    f_s = 25e6
    return dict(
        carrier_frequency_hz=f_c,
        chirp_slope_hz_per_s=C * f_s / (2 * 0.28 * 256),
        chirp_duration_s=12e-6,
        chirps_per_frame=8,
        sampling_rate_hz=f_s,
        samples_per_chirp=32,
        tx_positions_m=[0.0, 4 * d],
        rx_positions_m=[k * d for k in range(4)],
        noise_image_variance=8e-5,
        max_range_m=50.0,
        angle_bins=None,
    )


# --- signal model ------------------------------------------------------------

def beat_cube(points, p):
    """Raw beat samples [rx, chirp, sample] by direct per-sample evaluation.

    ``points`` is a list of (x, y, v, c). ``p`` is a dict of config fields.
    Far-field delay, 1/sqrt(E) array normalisation, Tx ``m % I`` on chirp m.
    """
    tx, rx = p["tx_positions_m"], p["rx_positions_m"]
    n_tx, n_rx = len(tx), len(rx)
    m_count, n_count = p["chirps_per_frame"], p["samples_per_chirp"]
    f_c, alpha, f_s, t_c = (p["carrier_frequency_hz"], p["chirp_slope_hz_per_s"],
                            p["sampling_rate_hz"], p["chirp_duration_s"])
    g = 1 / math.sqrt(n_tx * n_rx)
    out = np.zeros((n_rx, m_count, n_count), dtype=complex)
    for x, y, v, c in points:
        r = math.hypot(x, y)
        u = x / r
        f_b = 2 * alpha * r / C
        f_d = 2 * v * f_c / C
        for k in range(n_rx):
            for m in range(m_count):
                i = m % n_tx
                tau = (2 * r - (tx[i] + rx[k]) * u) / C
                for n in range(n_count):
                    ph = f_c * tau + f_b * n / f_s + f_d * m * t_c
                    out[k, m, n] += g * c * complex(math.cos(2 * math.pi * ph),
                                                    math.sin(2 * math.pi * ph))
    return out


def dft_matrix(n):
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / math.sqrt(n)


def process_direct(raw, p):
    """[range, doppler, angle] cube by explicit DFT sums and steering vectors.

    Doppler bins are reported in ascending signed order (-D/2 .. D/2-1);
    angle bins on u_k = -1 + 2k/K.
    """
    tx, rx = p["tx_positions_m"], p["rx_positions_m"]
    n_tx, n_rx = len(tx), len(rx)
    m_count, n_count = p["chirps_per_frame"], p["samples_per_chirp"]
    d = m_count // n_tx
    e = n_tx * n_rx
    k_bins = p["angle_bins"] or 2 * e
    lam = C / p["carrier_frequency_hz"]
    t_c = p["chirp_duration_s"]

    rng_spec = raw @ dft_matrix(n_count).T                      # [rx, chirp, range]
    signed = np.arange(d) - d // 2
    # Doppler DFT over the chirps of each Tx, evaluated at signed bins
    dop = np.zeros((n_rx, n_tx, d, n_count), dtype=complex)
    for i in range(n_tx):
        chirps = rng_spec[:, i::n_tx, :]                        # [rx, d, range]
        for b, s in enumerate(signed):
            w = np.exp(-2j * np.pi * s * np.arange(d) / d) / math.sqrt(d)
            dop[:, i, b, :] = np.einsum("l,kln->kn", w, chirps)
            # undo the i*T_c sampling lag of this Tx
            f_d = s / (d * n_tx * t_c)
            dop[:, i, b, :] *= np.exp(-2j * np.pi * f_d * i * t_c)
    pos = np.array([[tx[i] + rx[k] for k in range(n_rx)] for i in range(n_tx)])
    u = -1 + 2 * np.arange(k_bins) / k_bins
    # steering: conjugate of the -2 pi pos u / lam element phase, unitary scaling
    steer = np.exp(2j * np.pi * np.outer(u, pos.ravel()) / lam) / math.sqrt(k_bins)
    x = dop.transpose(3, 2, 1, 0).reshape(n_count, d, e)         # element index i*R + k
    return np.einsum("ae,rde->rda", steer, x)


# --- array kernel ------------------------------------------------------------

def dirichlet_numeric(e, samples=2_000_001):
    """First side-lobe (dB) and -3 dB full width of |sin(E x)/(E sin x)|^2, x = pi s / 2.

    Dense sampling on s in (0, 4/E) with local quadratic refinement.
    """
    s = np.linspace(1e-9, 4.0 / e, samples)
    x = np.pi * s / 2
    p = (np.sin(e * x) / (e * np.sin(x))) ** 2
    # first local maximum past the first null
    null = np.argmax(np.diff(p) > 0)
    j = null + np.argmax(p[null:])
    sidelobe = 10 * math.log10(p[j])
    half = np.argmax(p < 0.5)
    # linear interpolation of the half-power crossing
    s_half = s[half - 1] + (0.5 - p[half - 1]) / (p[half] - p[half - 1]) * (s[half] - s[half - 1])
    return sidelobe, 2 * s_half


# --- probability mapping -----------------------------------------------------

def chi2_posterior(power, sig_s, sig_n):
    """P(H1 | |z|^2) with equal priors and exponential (2-dof chi-square) densities."""
    f1 = math.exp(-power / (2 * sig_s)) / (2 * sig_s)
    f0 = math.exp(-power / (2 * sig_n)) / (2 * sig_n)
    return f1 / (f1 + f0)


# --- loss --------------------------------------------------------------------

def loss_direct(p_hat, p, labels, weights, variant="ce", eps=1e-7):
    """Pixel-by-pixel loop over the weighted loss; labels 0 noise, 1 spread, 2 reflection."""
    rho = {2: weights[0], 1: weights[1], 0: weights[2]}
    total = 0.0
    for ph, pp, lab in zip(np.ravel(p_hat), np.ravel(p), np.ravel(labels)):
        if variant == "ce":
            term = 0.0
            if pp > 0:
                term -= pp * math.log(max(ph, eps))
            if pp < 1:
                term -= (1 - pp) * math.log(max(1 - ph, eps))
        else:
            term = abs(pp - ph)
        total += rho[int(lab)] * term
    return total


# --- matching ----------------------------------------------------------------

def max_matching(dets, gts, radius):
    """Size of a maximum one-to-one matching within ``radius`` (bitmask DP)."""
    n_g = len(gts)
    adj = [[j for j in range(n_g) if math.dist(d, gts[j]) <= radius] for d in dets]
    best = {0: 0}
    for cands in adj:
        nxt = dict(best)
        for mask, val in best.items():
            for j in cands:
                if not mask >> j & 1:
                    m2 = mask | 1 << j
                    if nxt.get(m2, -1) < val + 1:
                        nxt[m2] = val + 1
        best = nxt
    return max(best.values())


def max_matching_permutations(dets, gts, radius):
    """Same quantity by trying every injective assignment (tiny inputs only)."""
    best = 0
    small, large = (dets, gts) if len(dets) <= len(gts) else (gts, dets)
    for perm in itertools.permutations(range(len(large)), len(small)):
        cnt = sum(math.dist(small[a], large[b]) <= radius for a, b in enumerate(perm))
        best = max(best, cnt)
    return best


def pr_direct(points, scores, gts, thresholds, radius):
    """Precision/recall per threshold with an explicit greedy loop per threshold."""
    prec, rec = [], []
    for t in thresholds:
        det = [(s, i) for i, s in enumerate(scores) if s >= t]
        det.sort(key=lambda a: (-a[0], a[1]))
        taken = set()
        tp = 0
        for _, i in det:
            cand = sorted((math.dist(points[i], g), j) for j, g in enumerate(gts)
                          if j not in taken and math.dist(points[i], g) <= radius)
            if cand:
                taken.add(cand[0][1])
                tp += 1
        prec.append(tp / len(det) if det else 1.0)
        rec.append(tp / len(gts))
    return np.array(prec), np.array(rec)


def ap_direct(recall, precision):
    """Area under the interpolated precision curve, written as a loop."""
    pts = sorted(zip(recall, precision), key=lambda a: (a[0], -a[1]))
    r = [0.0] + [a[0] for a in pts]
    raw = [a[1] for a in pts]
    env = []
    for i in range(len(raw)):
        env.append(max(raw[i:]))
    env = [env[0]] + env
    return sum((r[i + 1] - r[i]) * (env[i] + env[i + 1]) / 2 for i in range(len(r) - 1))
