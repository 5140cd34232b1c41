"""Batch Monte Carlo runs over many independent trajectories.

Trajectories are processed in fixed-size chunks. Chunk ``c`` draws all its
randomness from ``PCG64(SeedSequence(seed, spawn_key=(c,)))``, one row of
uniforms per trajectory, so a run is fully determined by (seed, chunk_size)
and does not depend on how chunks are scheduled over threads. Results are
always merged in chunk order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._validation import InvalidParameterError, check_positive_int, check_seed
from .markov import build_transfer_matrix, cumulative_columns, initial_support

DEFAULT_CHUNK_SIZE = 512


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


@dataclass(frozen=True)
class Geometry:
    """Fixed simulation window holding the whole light cone up to ``n_layers``."""

    support: tuple
    n_layers: int
    origin: int
    width: int

    @classmethod
    def build(cls, support, n_layers, extra_sites=()):
        x_min, x_max = min(support), max(support)
        lo = x_min - n_layers - 1
        hi = x_max + n_layers + 1
        if len(extra_sites):
            lo = min(lo, min(extra_sites))
            hi = max(hi, max(extra_sites))
        return cls(tuple(support), n_layers, lo, hi - lo + 1)

    @property
    def x_min(self):
        return self.support[0]

    @property
    def x_max(self):
        return self.support[-1]

    def initial_bits(self):
        bits = np.zeros(self.width, np.uint8)
        bits[np.array(self.support) - self.origin] = 1
        return bits

    def uniforms_per_trajectory(self, n_layers=None):
        n = self.n_layers if n_layers is None else n_layers
        return int(_kernels.uniforms_per_trajectory(self.x_min, self.x_max, 0, n))

    def sites(self):
        return np.arange(self.origin, self.origin + self.width)

    def mask(self, sites):
        m = np.zeros(self.width, np.uint8)
        idx = np.asarray(list(sites), dtype=np.int64) - self.origin
        if idx.size and (idx.min() < 0 or idx.max() >= self.width):
            raise InvalidParameterError("region extends beyond the simulation window")
        m[idx] = 1
        return m


def _chunks(n_items, chunk_size):
    n_chunks = -(-n_items // chunk_size)
    for c in range(n_chunks):
        yield c, min(chunk_size, n_items - c * chunk_size)


def _map_ordered(fn, tasks, threads):
    if threads <= 1:
        for task in tasks:
            yield fn(task)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(fn, tasks)


def _sampling_table(alpha, transfer):
    if transfer is None:
        transfer = build_transfer_matrix(alpha)
    return cumulative_columns(transfer)


def simulate_density_counts(
    initial, alpha, times, n_samples, seed, threads=1, chunk_size=DEFAULT_CHUNK_SIZE, transfer=None
):
    """Occupation counts at the requested times.

    Returns ``(geometry, times, counts)`` where ``counts[i, j]`` is the number
    of trajectories with site ``geometry.origin + j`` occupied at ``times[i]``.
    """
    support = initial_support(initial)
    n_samples = check_positive_int(n_samples, "n_samples")
    seed = check_seed(seed)
    chunk_size = check_positive_int(chunk_size, "chunk_size")
    times = sorted({check_positive_int(t, "t", minimum=0) for t in times})
    if not times:
        raise InvalidParameterError("no times to record")
    geom = Geometry.build(support, times[-1])
    cum = _sampling_table(alpha, transfer)
    rec_index = np.full(geom.n_layers + 1, -1, np.int64)
    rec_index[times] = np.arange(len(times))
    init = geom.initial_bits()
    n_u = geom.uniforms_per_trajectory()

    def run(task):
        c, n = task
        u = chunk_generator(seed, c).random((n, max(n_u, 1)), dtype=np.float32)
        counts = np.zeros((len(times), geom.width), np.int64)
        _kernels.density_chunk(
            init, geom.origin, geom.x_min, geom.x_max, geom.n_layers, cum, u, rec_index, counts
        )
        return counts

    total = np.zeros((len(times), geom.width), np.int64)
    for counts in _map_ordered(run, list(_chunks(n_samples, chunk_size)), threads):
        total += counts
    return geom, times, total


def sample_final_configs(
    initial, alpha, t, n_samples, seed, threads=1, chunk_size=DEFAULT_CHUNK_SIZE, transfer=None
):
    """Configurations after ``t`` layers as a ``(n_samples, width)`` uint8 array."""
    support = initial_support(initial)
    n_samples = check_positive_int(n_samples, "n_samples")
    seed = check_seed(seed)
    geom = Geometry.build(support, check_positive_int(t, "t", minimum=0))
    cum = _sampling_table(alpha, transfer)
    init = geom.initial_bits()
    n_u = geom.uniforms_per_trajectory()

    def run(task):
        c, n = task
        u = chunk_generator(seed, c).random((n, max(n_u, 1)), dtype=np.float32)
        out = np.empty((n, geom.width), np.uint8)
        _kernels.final_configs_chunk(init, geom.origin, geom.x_min, geom.x_max, geom.n_layers, cum, u, out)
        return out

    parts = list(_map_ordered(run, list(_chunks(n_samples, chunk_size)), threads))
    return geom, np.concatenate(parts, axis=0)


def pair_factors(transfer) -> np.ndarray:
    """Per-gate-pair factors of the last-layer resummed estimator.

    ``factors[s1, s2, m]``: expectation over the final outputs of both replicas
    (drawn from columns s1 and s2) of prod 3^{-b} * [b1 == b2] over the sites
    selected by m (3: both sites, 2: left only, 1: right only).
    """
    transfer = np.asarray(transfer, dtype=np.float64)
    weight = np.array([1.0, 1.0 / 3.0])
    out_bits = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
    both = weight[out_bits[:, 0]] * weight[out_bits[:, 1]]
    factors = np.zeros((4, 4, 4))
    factors[:, :, 0] = 1.0
    factors[:, :, 3] = np.einsum("o,oa,ob->ab", both, transfer, transfer)
    for m, site in ((2, 0), (1, 1)):
        marg = np.zeros((2, 4))
        for o in range(4):
            marg[out_bits[o, site]] += transfer[o]
        factors[:, :, m] = np.einsum("v,va,vb->ab", weight, marg, marg)
    return factors


def simulate_replica_pairs(
    initial,
    alpha,
    t,
    region_sites,
    n_pairs,
    seed,
    threads=1,
    chunk_size=DEFAULT_CHUNK_SIZE,
    transfer=None,
):
    """Yield ``(resummed, naive)`` per-pair estimator arrays, one chunk at a time.

    ``region_sites`` is a list of site collections; each yielded array has
    shape ``(pairs_in_chunk, len(region_sites))``. Both replicas of a pair come
    from the same chunk stream (rows 2j and 2j+1).
    """
    support = initial_support(initial)
    t = check_positive_int(t, "t", minimum=1)
    n_pairs = check_positive_int(n_pairs, "n_pairs")
    seed = check_seed(seed)
    all_sites = [x for sites in region_sites for x in sites]
    geom = Geometry.build(support, t, extra_sites=all_sites)
    if transfer is None:
        transfer = build_transfer_matrix(alpha)
    cum = cumulative_columns(transfer)
    factors = pair_factors(transfer)
    masks = np.stack([geom.mask(sites) for sites in region_sites]) if region_sites else np.zeros((0, geom.width), np.uint8)
    init = geom.initial_bits()
    n_u = geom.uniforms_per_trajectory()

    def run(task):
        c, n = task
        u = chunk_generator(seed, c).random((2 * n, n_u), dtype=np.float32)
        resummed = np.empty((n, masks.shape[0]))
        naive = np.empty((n, masks.shape[0]))
        _kernels.replica_chunk(
            init, geom.origin, geom.x_min, geom.x_max, t, cum, u, masks, factors, resummed, naive
        )
        return resummed, naive

    yield from _map_ordered(run, list(_chunks(n_pairs, chunk_size)), threads)
