"""Operator density estimates, light-cone profiles and the bulk relaxation fit."""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import engine
from ._validation import InvalidParameterError
from .markov import OccupationConfig, initial_support, light_cone_edges


class FitWindowError(ValueError):
    """The requested window contains points where the log-residual is undefined."""


@dataclass
class DensityAccumulator:
    """Occupation counts per recorded time on a common site window.

    ``counts[t]`` is an int64 array over sites ``origin .. origin + width - 1``.
    Sites outside the window have never been occupied.
    """

    recorded_times: tuple
    origin: int = 0
    width: int = 0
    n_samples: int = 0
    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        self.recorded_times = tuple(sorted({int(t) for t in self.recorded_times}))
        for t in self.recorded_times:
            self.counts.setdefault(t, np.zeros(self.width, np.int64))

    def _cover(self, lo, hi):
        new_origin = min(self.origin, lo) if self.width else lo
        new_stop = max(self.origin + self.width, hi + 1) if self.width else hi + 1
        if new_origin == self.origin and new_stop == self.origin + self.width:
            return
        off = self.origin - new_origin
        for t, c in self.counts.items():
            grown = np.zeros(new_stop - new_origin, np.int64)
            grown[off : off + c.size] = c
            self.counts[t] = grown
        self.origin, self.width = new_origin, new_stop - new_origin

    def add_counts(self, t, origin, counts):
        if t not in self.counts:
            raise InvalidParameterError(f"time {t} is not recorded")
        self._cover(origin, origin + len(counts) - 1)
        start = origin - self.origin
        self.counts[t][start : start + len(counts)] += counts

    def density(self, x, t) -> float:
        return self.count(x, t) / self.n_samples

    def count(self, x, t) -> int:
        if t not in self.counts:
            raise InvalidParameterError(f"time {t} is not recorded")
        i = x - self.origin
        if 0 <= i < self.width:
            return int(self.counts[t][i])
        return 0

    def stderr(self, x, t) -> float:
        rho = self.density(x, t)
        return float(np.sqrt(rho * (1.0 - rho) / self.n_samples))

    def profile(self, t):
        """(sites, rho, stderr) arrays over the stored window at time t."""
        if t not in self.counts:
            raise InvalidParameterError(f"time {t} is not recorded")
        rho = self.counts[t] / self.n_samples
        sites = np.arange(self.origin, self.origin + self.width)
        return sites, rho, np.sqrt(rho * (1.0 - rho) / self.n_samples)

    def merge(self, other: "DensityAccumulator") -> "DensityAccumulator":
        """Combine accumulators built from disjoint trajectory sets."""
        if self.recorded_times != other.recorded_times:
            raise InvalidParameterError("accumulators record different times")
        out = DensityAccumulator(self.recorded_times, self.origin, self.width, self.n_samples)
        for t in self.recorded_times:
            out.counts[t] = self.counts[t].copy()
        for t in other.recorded_times:
            out.add_counts(t, other.origin, other.counts[t])
        out.n_samples += other.n_samples
        return out

    def write_csv(self, path_or_file, times=None):
        rows = []
        for t in self.recorded_times if times is None else times:
            sites, rho, err = self.profile(t)
            nz = np.flatnonzero(self.counts[t])
            if nz.size:
                sl = slice(nz[0], nz[-1] + 1)
                rows.extend(zip(sites[sl], [t] * (nz[-1] + 1 - nz[0]), rho[sl], err[sl]))
        write_rows(path_or_file, ("x", "t", "rho", "stderr"), rows)


def write_rows(path_or_file, header, rows):
    """CSV with a header; floats use the shortest round-trip representation."""

    def fmt(v):
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        if isinstance(v, (np.integer,)):
            return str(int(v))
        return v

    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def record(cfg: OccupationConfig, acc: DensityAccumulator, new_sample=True) -> DensityAccumulator:
    """Add one configuration's occupations at ``cfg.time``.

    With ``new_sample`` the sample count is incremented, so call it once per
    trajectory for the first recorded time and with ``new_sample=False`` after.
    """
    if cfg.time not in acc.counts:
        raise InvalidParameterError(f"time {cfg.time} is not recorded")
    if len(cfg):
        acc.add_counts(cfg.time, cfg.window_origin, cfg.bits.astype(np.int64))
    if new_sample:
        acc.n_samples += 1
    return acc


def simulate_density(initial, alpha, times, n_samples, seed, threads=1, chunk_size=engine.DEFAULT_CHUNK_SIZE, transfer=None):
    """Monte Carlo estimate of rho(x, t) at the requested times."""
    geom, times, counts = engine.simulate_density_counts(
        initial, alpha, times, n_samples, seed, threads=threads, chunk_size=chunk_size, transfer=transfer
    )
    acc = DensityAccumulator(times, geom.origin, geom.width, int(n_samples))
    for i, t in enumerate(times):
        acc.counts[t] = counts[i].copy()
    return acc


@dataclass
class LightConeProfile:
    side: str
    time: int
    values: np.ndarray
    stderr: np.ndarray
    edge: int

    def __getitem__(self, d):
        return float(self.values[d])


def light_cone_edge(initial, side, t) -> int:
    left, right = light_cone_edges(initial_support(initial), t)
    if side == "left":
        return left
    if side == "right":
        return right
    raise InvalidParameterError(f"side must be 'left' or 'right', got {side!r}")


def extract_light_cone(acc: DensityAccumulator, side, t, initial, depth=8) -> LightConeProfile:
    """Density at distance d = 0..depth-1 inward from the light-cone edge."""
    if t not in acc.counts:
        raise InvalidParameterError(f"time {t} is not recorded")
    edge = light_cone_edge(initial, side, t)
    step = -1 if side == "right" else 1
    xs = [edge + step * d for d in range(depth)]
    rho = np.array([acc.density(x, t) for x in xs])
    err = np.sqrt(rho * (1.0 - rho) / acc.n_samples)
    return LightConeProfile(side, t, rho, err, edge)


@dataclass
class RelaxationFit:
    """ln(3/4 - rho) = ln(amplitude) - rate * (t / layers_per_step)."""

    rate: float
    amplitude: float
    fit_window: tuple
    residual: float
    layers_per_step: int = 2


def default_fit_window(times, rho, stderr, start_level=0.5, n_sigma=5.0):
    """From the first t past the initial dip with rho >= start_level to the last t before 3/4 - rho < n_sigma * stderr."""
    times = np.asarray(times)
    rho = np.asarray(rho)
    dip = int(np.argmin(np.where(times > 0, rho, np.inf)))
    above = dip + np.flatnonzero(rho[dip:] >= start_level)
    if above.size == 0:
        raise FitWindowError(f"density never reaches {start_level}")
    i0 = above[0]
    i1 = i0
    while i1 + 1 < times.size and 0.75 - rho[i1 + 1] >= n_sigma * stderr[i1 + 1]:
        i1 += 1
    if i1 - i0 < 2:
        raise FitWindowError(
            f"window [{times[i0]}, {times[i1]}] has fewer than 3 points; increase the sample count"
        )
    return int(times[i0]), int(times[i1])


def fit_log_residual(t, rho, layers_per_step=1):
    """Least squares fit of ln(3/4 - rho) against t / layers_per_step."""
    t = np.asarray(t, dtype=float)
    rho = np.asarray(rho, dtype=float)
    gap = 0.75 - rho
    if np.any(gap <= 0):
        bad = t[gap <= 0]
        raise FitWindowError(f"rho >= 3/4 at t={bad.tolist()}; shrink the fit window")
    if t.size < 2:
        raise FitWindowError("need at least two points")
    x = t / layers_per_step
    y = np.log(gap)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, icpt]) - y) ** 2)))
    return -float(slope), float(np.exp(icpt)), resid


def fit_relaxation(acc: DensityAccumulator, x0=0, window=None, layers_per_step=2) -> RelaxationFit:
    """Bulk relaxation rate at site ``x0``.

    The rate is reported per ``layers_per_step`` layers; the default of two
    layers (one odd and one even layer) is the unit in which a fixed site
    relaxes as (1 - alpha) per step.
    """
    times = np.array(acc.recorded_times)
    rho = np.array([acc.density(x0, t) for t in times])
    err = np.sqrt(rho * (1.0 - rho) / acc.n_samples)
    if window is None:
        window = default_fit_window(times, rho, err)
    t_min, t_max = window
    sel = (times >= t_min) & (times <= t_max)
    if sel.sum() < 2:
        raise FitWindowError(f"window {window} holds fewer than two recorded times")
    rate, amp, resid = fit_log_residual(times[sel], rho[sel], layers_per_step)
    return RelaxationFit(rate, amp, (int(t_min), int(t_max)), resid, layers_per_step)
