"""Second Renyi operator entanglement from pairs of independent replicas."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from . import engine
from ._validation import InvalidParameterError, check_positive_int
from .markov import OccupationConfig, build_transfer_matrix, initial_support, light_cone_edges

CASES = {1: "right_edge", 2: "left_edge", 3: "left_movers"}
DEFAULT_BLOCKS = 100


@dataclass(frozen=True)
class Region:
    """Entanglement region near the light cone of ``initial`` at time ``t``.

    case 1: ``l_A`` consecutive sites ending at the right edge;
    case 2: ``l_A`` consecutive sites starting at the left edge;
    case 3: the first ``l_A`` left-mover sites from the left edge (every other site).
    """

    case: int
    l_A: int
    t: int
    initial: object = "Z1"

    def __post_init__(self):
        if self.case not in CASES:
            raise InvalidParameterError(f"case must be 1, 2 or 3, got {self.case!r}")
        check_positive_int(self.l_A, "l_A", minimum=0)
        check_positive_int(self.t, "t", minimum=1)
        if isinstance(self.initial, (list, set)):
            object.__setattr__(self, "initial", tuple(self.initial))
        available = self.capacity(self.case, self.t, self.initial)
        if self.l_A > available:
            raise InvalidParameterError(
                f"case {self.case} at t={self.t} has room for {available} sites, got l_A={self.l_A}"
            )

    @staticmethod
    def capacity(case, t, initial="Z1") -> int:
        left, right = light_cone_edges(initial_support(initial), t)
        if case == 3:
            return (right - left) // 2 + 1
        return right - left + 1

    @property
    def sites(self) -> tuple:
        left, right = light_cone_edges(initial_support(self.initial), self.t)
        if self.case == 1:
            return tuple(range(right - self.l_A + 1, right + 1))
        if self.case == 2:
            return tuple(range(left, left + self.l_A))
        return tuple(left + 2 * j for j in range(self.l_A))


def _check_time(cfg, expected, name):
    if cfg.time != expected:
        raise InvalidParameterError(f"{name}.time={cfg.time}, expected {expected}")


def naive_estimator(b1: OccupationConfig, b2: OccupationConfig, region) -> float:
    """prod over x in A of 3^{-b1_x} [b1_x == b2_x]."""
    _check_time(b1, region.t, "b1")
    _check_time(b2, region.t, "b2")
    val = 1.0
    for x in region.sites:
        o1, o2 = b1.occupation(x), b2.occupation(x)
        if o1 != o2:
            return 0.0
        if o1:
            val /= 3.0
    return val


def resummed_estimator(b1_prev: OccupationConfig, b2_prev: OccupationConfig, region, alpha, transfer=None) -> float:
    """Expectation of :func:`naive_estimator` over the last layer, given both replicas one layer earlier."""
    _check_time(b1_prev, region.t - 1, "b1_prev")
    _check_time(b2_prev, region.t - 1, "b2_prev")
    if transfer is None:
        transfer = build_transfer_matrix(alpha)
    factors = engine.pair_factors(transfer)
    members = set(region.sites)
    parity = region.t % 2
    val = 1.0
    for a in sorted({x if (x - parity) % 2 == 0 else x - 1 for x in members}):
        m = 2 * (a in members) + ((a + 1) in members)
        s1 = 2 * b1_prev.occupation(a) + b1_prev.occupation(a + 1)
        s2 = 2 * b2_prev.occupation(a) + b2_prev.occupation(a + 1)
        val *= factors[s1, s2, m]
    return float(val)


@dataclass
class EntanglementAccumulator:
    """Running sums of an estimator for several regions, split into jackknife blocks.

    Pair ``i`` of ``n_total`` belongs to block ``i * n_blocks // n_total``.
    """

    n_regions: int
    n_total: int
    n_blocks: int = DEFAULT_BLOCKS
    n_pairs: int = 0
    sum_I: np.ndarray = None
    sum_I2: np.ndarray = None
    block_sums: np.ndarray = None
    block_counts: np.ndarray = None

    def __post_init__(self):
        if self.n_total < self.n_blocks:
            raise InvalidParameterError(f"need at least n_blocks={self.n_blocks} pairs, got {self.n_total}")
        if self.sum_I is None:
            self.sum_I = np.zeros(self.n_regions)
            self.sum_I2 = np.zeros(self.n_regions)
            self.block_sums = np.zeros((self.n_blocks, self.n_regions))
            self.block_counts = np.zeros(self.n_blocks, np.int64)

    def add(self, values, start):
        """Add per-pair values (shape (n, n_regions)) for pair indices start..start+n-1."""
        values = np.asarray(values, dtype=float).reshape(-1, self.n_regions)
        idx = np.arange(start, start + values.shape[0])
        blocks = idx * self.n_blocks // self.n_total
        self.sum_I += values.sum(axis=0)
        self.sum_I2 += (values**2).sum(axis=0)
        for r in range(self.n_regions):
            self.block_sums[:, r] += np.bincount(blocks, weights=values[:, r], minlength=self.n_blocks)
        self.block_counts += np.bincount(blocks, minlength=self.n_blocks)
        self.n_pairs += values.shape[0]

    def merge(self, other):
        if (self.n_regions, self.n_total, self.n_blocks) != (other.n_regions, other.n_total, other.n_blocks):
            raise InvalidParameterError("incompatible accumulators")
        return EntanglementAccumulator(
            self.n_regions,
            self.n_total,
            self.n_blocks,
            self.n_pairs + other.n_pairs,
            self.sum_I + other.sum_I,
            self.sum_I2 + other.sum_I2,
            self.block_sums + other.block_sums,
            self.block_counts + other.block_counts,
        )

    def mean(self):
        return self.sum_I / self.n_pairs

    def variance(self):
        m = self.mean()
        return np.maximum(self.sum_I2 / self.n_pairs - m**2, 0.0) * self.n_pairs / (self.n_pairs - 1)

    def mean_stderr(self):
        return np.sqrt(self.variance() / self.n_pairs)

    def leave_one_out_means(self):
        """(n_blocks, n_regions) means with one block removed."""
        return (self.sum_I - self.block_sums) / (self.n_pairs - self.block_counts)[:, None]

    def entropy(self):
        """-ln<I> per region, with jackknife errors; inf where <I> <= 0."""
        m = self.mean()
        with np.errstate(divide="ignore", invalid="ignore"):
            S = np.where(m > 0, -np.log(np.where(m > 0, m, 1.0)), np.inf)
            loo = self.leave_one_out_means()
            S_loo = np.where(loo > 0, -np.log(np.where(loo > 0, loo, 1.0)), np.inf)
            B = self.n_blocks
            err = np.sqrt((B - 1) / B * np.sum((S_loo - S_loo.mean(axis=0)) ** 2, axis=0))
        err = np.where(np.isfinite(S), err, np.nan)
        return S, err


@dataclass
class EntropyEstimate:
    regions: list
    resummed: EntanglementAccumulator
    naive: EntanglementAccumulator

    @property
    def S(self):
        return self.resummed.entropy()[0]

    @property
    def stderr(self):
        return self.resummed.entropy()[1]

    @property
    def l_A(self):
        return np.array([r.l_A for r in self.regions])


def estimate_entropies(
    initial,
    alpha,
    regions,
    n_pairs,
    seed,
    n_blocks=DEFAULT_BLOCKS,
    threads=1,
    chunk_size=engine.DEFAULT_CHUNK_SIZE,
    transfer=None,
) -> EntropyEstimate:
    """Run ``n_pairs`` replica pairs once and evaluate every region (all at the same t)."""
    regions = list(regions)
    if not regions:
        raise InvalidParameterError("no regions given")
    times = {r.t for r in regions}
    if len(times) != 1:
        raise InvalidParameterError("all regions must share the measurement time")
    t = times.pop()
    n_pairs = check_positive_int(n_pairs, "n_pairs")
    res = EntanglementAccumulator(len(regions), n_pairs, n_blocks)
    nai = EntanglementAccumulator(len(regions), n_pairs, n_blocks)
    start = 0
    for resummed, naive in engine.simulate_replica_pairs(
        initial, alpha, t, [r.sites for r in regions], n_pairs, seed,
        threads=threads, chunk_size=chunk_size, transfer=transfer,
    ):
        res.add(resummed, start)
        nai.add(naive, start)
        start += resummed.shape[0]
    return EntropyEstimate(regions, res, nai)


def estimate_entropy(initial, alpha, region, n_pairs, seed, **kwargs):
    """(S, stderr) from the resummed estimator for a single region."""
    if region.l_A == 0:
        return 0.0, 0.0
    est = estimate_entropies(initial, alpha, [region], n_pairs, seed, **kwargs)
    S, err = est.resummed.entropy()
    return float(S[0]), float(err[0])


@dataclass
class VolumeLawFit:
    slope: float
    intercept: float
    slope_err: float
    l_window: tuple
    parity_offset: float = 0.0

    def as_dict(self):
        return {
            "slope": self.slope,
            "slope_err": self.slope_err,
            "intercept": self.intercept,
            "window": list(self.l_window),
        }


def _wls(A, y, sigma):
    """Weighted least squares; zero errors are floored just below the smallest positive one."""
    A = np.asarray(A, float)
    y = np.asarray(y, float)
    sigma = np.asarray(sigma, float)
    weighted = np.all(np.isfinite(sigma)) and np.any(sigma > 0)
    if weighted:
        sigma = np.maximum(sigma, 1e-3 * sigma[sigma > 0].min())
    else:
        sigma = np.ones_like(y)
    Aw = A / sigma[:, None]
    beta, *_ = np.linalg.lstsq(Aw, y / sigma, rcond=None)
    cov = np.linalg.pinv(Aw.T @ Aw)
    if not weighted:
        resid = y - A @ beta
        cov = cov * float(resid @ resid) / max(y.size - A.shape[1], 1)
    return beta, cov


def _select_window(l_A, window):
    l_A = np.asarray(l_A)
    if window is None:
        return np.ones(l_A.size, bool), (int(l_A.min()), int(l_A.max()))
    lo, hi = window
    return (l_A >= lo) & (l_A <= hi), (int(lo), int(hi))


DEFAULT_L_MIN = 4


def reliable_window(l_A, stderr, l_min=DEFAULT_L_MIN, max_stderr=0.1):
    """(l_min, l_max) with l_max the largest size before the first point whose error exceeds ``max_stderr``.

    Once the replica pairs stop sampling the rare configurations that
    dominate the purity, -ln of the sample mean is biased upward and its
    jackknife error blows up; the fit should stop before that.
    """
    l_A = np.asarray(l_A)
    stderr = np.asarray(stderr, dtype=float)
    order = np.argsort(l_A)
    l_max = None
    for l, e in zip(l_A[order], stderr[order]):
        if l < l_min:
            continue
        if not (np.isfinite(e) and e <= max_stderr):
            break
        l_max = int(l)
    if l_max is None or l_max - l_min < 2:
        raise InvalidParameterError(
            f"fewer than 3 sizes from l_A={l_min} have stderr <= {max_stderr}; increase the pair count"
        )
    return int(l_min), l_max


def _use_parity(l_A, parity):
    odd = int(np.sum(l_A % 2 == 1))
    both = min(odd, l_A.size - odd) >= 2
    if parity is None:
        return both
    if parity and not both:
        raise InvalidParameterError("a parity offset needs at least two even and two odd l_A in the window")
    return bool(parity)


def fit_volume_law(points, window=None, parity=None) -> VolumeLawFit:
    """Weighted least squares S = slope * l_A + intercept [+ offset * (l_A odd)].

    Brick-wall entropies zigzag between odd and even l_A. With errors that
    grow with l_A a plain line then picks up the first step rather than the
    mean growth, so by default an odd-l_A offset is fitted whenever both
    parities have two points (``parity=None``); ``False`` fits a plain line.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise InvalidParameterError("points must be (l_A, S[, stderr]) rows")
    l_A, S = pts[:, 0], pts[:, 1]
    err = pts[:, 2] if pts.shape[1] == 3 else np.zeros_like(S)
    sel, win = _select_window(l_A, window)
    sel &= np.isfinite(S)
    if np.unique(l_A[sel]).size < 3:
        raise InvalidParameterError(f"window {win} holds fewer than 3 distinct l_A values")
    x = l_A[sel]
    cols = [x, np.ones_like(x)]
    if _use_parity(np.unique(x).astype(int), parity):
        cols.append((x.astype(int) % 2).astype(float))
    beta, cov = _wls(np.column_stack(cols), S[sel], err[sel])
    offset = float(beta[2]) if beta.size == 3 else 0.0
    return VolumeLawFit(float(beta[0]), float(beta[1]), float(np.sqrt(max(cov[0, 0], 0.0))), win, offset)


def fit_volume_law_jackknife(est: EntropyEstimate, window=None, parity=None) -> VolumeLawFit:
    """Volume-law fit whose slope error is a block jackknife over the replica pairs.

    The entropies at different l_A come from the same pairs and are correlated,
    so the slope is refit on every leave-one-block-out sample.
    """
    S, err = est.resummed.entropy()
    base = fit_volume_law(np.column_stack([est.l_A, S, err]), window, parity)
    loo = est.resummed.leave_one_out_means()
    with np.errstate(divide="ignore"):
        S_loo = -np.log(loo)
    slopes = [fit_volume_law(np.column_stack([est.l_A, row, err]), window, parity).slope for row in S_loo]
    B = len(slopes)
    jk = float(np.sqrt((B - 1) / B * np.sum((np.array(slopes) - np.mean(slopes)) ** 2)))
    return VolumeLawFit(base.slope, base.intercept, jk, base.l_window, base.parity_offset)


@dataclass
class Extrapolation:
    a_inf: float
    error: float
    exponent: float
    converged: bool
    amplitude: float = 0.0

    def __iter__(self):
        return iter((self.a_inf, self.error))


def _power_law(t, a_inf, c, p):
    return a_inf - c * t ** (-p)


def extrapolate_infinite_time(fits, p_bounds=(1e-3, 5.0)) -> Extrapolation:
    """Fit a(t) = a_inf - c t^{-p} to (t, a[, a_err]) rows."""
    data = np.asarray(fits, dtype=float)
    if data.ndim != 2 or data.shape[1] not in (2, 3):
        raise InvalidParameterError("fits must be (t, a[, a_err]) rows")
    t, a = data[:, 0], data[:, 1]
    sigma = data[:, 2] if data.shape[1] == 3 else None
    if np.unique(t).size < 3:
        raise InvalidParameterError("need at least 3 distinct times")
    if np.ptp(a) == 0.0:
        err = 0.0 if sigma is None else float(1.0 / np.sqrt(np.sum(sigma**-2.0)))
        return Extrapolation(float(a[0]), err, float("nan"), True, 0.0)
    order = np.argsort(t)
    c0 = (a[order][-1] - a[order][0]) / (t[order][0] ** -1.0 - t[order][-1] ** -1.0)
    p0 = (a[order][-1] + 0.1 * abs(a[order][-1]), c0, 1.0)
    bounds = ([-np.inf, -np.inf, p_bounds[0]], [np.inf, np.inf, p_bounds[1]])
    converged = True
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            popt, pcov = curve_fit(
                _power_law, t, a, p0=p0, sigma=sigma, absolute_sigma=sigma is not None,
                bounds=bounds, maxfev=20000,
            )
    except RuntimeError:
        converged = False
        popt, pcov = np.array(p0), np.full((3, 3), np.inf)
    err = float(np.sqrt(pcov[0, 0])) if np.isfinite(pcov[0, 0]) else math.inf
    at_bound = np.isclose(popt[2], p_bounds[0]) or np.isclose(popt[2], p_bounds[1])
    return Extrapolation(float(popt[0]), err, float(popt[2]), converged and not at_bound, float(popt[1]))
