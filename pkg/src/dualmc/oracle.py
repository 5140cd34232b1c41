"""Exact evolution of the full support distribution on a small window.

The distribution is a dense tensor with one axis of length 2 per site, so a
gate on sites (x, x+1) is a 4x4 contraction over two adjacent axes.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import InvalidParameterError, check_positive_int
from .markov import build_transfer_matrix, initial_support

MAX_SITES = 24


class LightConeError(RuntimeError):
    """The operator would leave the exact window."""


@dataclass
class ExactDistribution:
    """``weights[b_0, ..., b_{L-1}]`` for sites ``origin .. origin + L - 1``."""

    weights: np.ndarray
    origin: int
    time: int = 0

    @property
    def L(self) -> int:
        return self.weights.ndim

    @classmethod
    def point_mass(cls, support, L, origin, time=0) -> "ExactDistribution":
        L = check_positive_int(L, "L")
        if L > MAX_SITES:
            raise InvalidParameterError(f"L={L} exceeds the dense limit {MAX_SITES}")
        weights = np.zeros((2,) * L)
        idx = [0] * L
        for x in support:
            if not origin <= x < origin + L:
                raise InvalidParameterError(f"site {x} outside window")
            idx[x - origin] = 1
        weights[tuple(idx)] = 1.0
        return cls(weights, origin, time)

    @classmethod
    def initial(cls, kind, L, origin=None) -> "ExactDistribution":
        """Initial operator centred in a window of L sites (or starting at ``origin``)."""
        support = initial_support(kind)
        if origin is None:
            centre = (min(support) + max(support)) // 2
            origin = centre - (L - 1) // 2
        return cls.point_mass(support, L, origin)

    def total(self) -> float:
        return float(self.weights.sum())

    def flat(self) -> np.ndarray:
        """Weights indexed by the integer whose binary digits read b_0 ... b_{L-1}."""
        return self.weights.reshape(-1)

    def sites(self):
        return np.arange(self.origin, self.origin + self.L)


def _apply_pair(weights, i, transfer):
    L = weights.ndim
    shaped = weights.reshape(2**i, 4, 2 ** (L - i - 2))
    return np.einsum("ab,ibj->iaj", transfer, shaped).reshape(weights.shape)


def _occupation_marginal(weights, i):
    axes = tuple(k for k in range(weights.ndim) if k != i)
    return weights.sum(axis=axes)


def exact_layer(dist: ExactDistribution, alpha, transfer=None) -> ExactDistribution:
    """Apply brick-wall layer ``dist.time + 1`` exactly.

    Raises :class:`LightConeError` if a gate straddling the window edge could
    move weight outside it.
    """
    if transfer is None:
        transfer = build_transfer_matrix(alpha)
    layer = dist.time + 1
    w = dist.weights
    L = dist.L
    first = 0 if (dist.origin - layer) % 2 == 0 else 1
    if first == 1 and _occupation_marginal(w, 0)[1] > 0:
        raise LightConeError(f"left window edge reached at layer {layer}")
    if (L - 1 - first) % 2 == 0 and _occupation_marginal(w, L - 1)[1] > 0:
        raise LightConeError(f"right window edge reached at layer {layer}")
    for i in range(first, L - 1, 2):
        w = _apply_pair(w, i, transfer)
    return ExactDistribution(w, dist.origin, layer)


def exact_evolve(dist, alpha, n_layers, transfer=None) -> ExactDistribution:
    for _ in range(n_layers):
        dist = exact_layer(dist, alpha, transfer)
    return dist


def exact_density(dist: ExactDistribution, x: int) -> float:
    i = x - dist.origin
    if not 0 <= i < dist.L:
        raise InvalidParameterError(f"site {x} outside window")
    return float(_occupation_marginal(dist.weights, i)[1])


def exact_density_profile(dist: ExactDistribution) -> np.ndarray:
    return np.array([exact_density(dist, x) for x in dist.sites()])


def region_marginal(dist: ExactDistribution, sites) -> np.ndarray:
    """Marginal distribution of the occupations on ``sites`` (in the given order)."""
    idx = [x - dist.origin for x in sites]
    if any(not 0 <= i < dist.L for i in idx):
        raise InvalidParameterError("region extends beyond the window")
    rest = tuple(k for k in range(dist.L) if k not in idx)
    marg = dist.weights.sum(axis=rest)
    # sum() keeps the remaining axes in increasing order; reorder to match ``sites``.
    order = np.argsort(np.argsort(idx))
    return np.transpose(marg, order) if marg.ndim else marg


def exact_purity(dist: ExactDistribution, sites, n=2) -> float:
    """sum over b_A of 3^{-(n-1)|b_A|} w_{b_A}^n."""
    sites = list(sites)
    if not sites:
        return 1.0
    marg = region_marginal(dist, sites)
    size = np.indices(marg.shape).sum(axis=0)
    return float(np.sum(3.0 ** (-(n - 1) * size) * marg**n))


def exact_renyi2(dist: ExactDistribution, region) -> float:
    sites = getattr(region, "sites", region)
    return -float(np.log(exact_purity(dist, sites, 2)))
