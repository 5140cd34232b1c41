"""Operator-support configurations and the brick-wall Markov process."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from ._validation import InvalidParameterError, check_alpha

#: Basis order of the two-site transfer matrix: index = 2*b_left + b_right.
PAIR_BASIS = ("00", "01", "10", "11")
PHYSICAL_ALPHA_MAX = 2.0 / 3.0


@dataclass(frozen=True)
class GateParameter:
    """Scrambling parameter of the dual-unitary gate ensemble.

    ``alpha`` may range over [0, 1]; only alpha <= 2/3 is realised by an
    actual dual-unitary gate, through alpha = (2/3) cos^2(2J).
    """

    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))

    @property
    def physical(self) -> bool:
        return self.alpha <= PHYSICAL_ALPHA_MAX

    @classmethod
    def from_coupling(cls, J: float) -> "GateParameter":
        return cls(2.0 / 3.0 * np.cos(2.0 * J) ** 2)

    def coupling(self) -> float:
        """Return J in [0, pi/4] with alpha = (2/3) cos^2(2J)."""
        if not self.physical:
            raise InvalidParameterError(
                f"alpha={self.alpha} > 2/3 has no dual-unitary coupling J"
            )
        return 0.5 * np.arccos(np.sqrt(1.5 * self.alpha))


def _alpha_value(alpha) -> float:
    if isinstance(alpha, GateParameter):
        return alpha.alpha
    return check_alpha(alpha)


def build_transfer_matrix(alpha) -> np.ndarray:
    """4x4 column-stochastic matrix T[b_out, b_in] over the basis 00, 01, 10, 11."""
    a = _alpha_value(alpha)
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0 - a, a / 3.0],
            [0.0, 1.0 - a, 0.0, a / 3.0],
            [0.0, a, a, 1.0 - 2.0 * a / 3.0],
        ]
    )


def cumulative_columns(transfer: np.ndarray) -> np.ndarray:
    """Sampling table ``cum[b_in, b_out]``: cumulative probabilities down each column."""
    transfer = np.asarray(transfer, dtype=np.float64)
    if transfer.shape != (4, 4):
        raise InvalidParameterError(f"transfer matrix must be 4x4, got {transfer.shape}")
    if np.any(transfer < 0):
        raise InvalidParameterError("transfer matrix has negative entries")
    cum = np.cumsum(transfer.T, axis=1)
    cum[:, -1] = 1.0
    return np.ascontiguousarray(cum)


class MoverLabel(Enum):
    LEFT = "left"
    RIGHT = "right"
    EMPTY = "empty"


def mover_label(x: int, t: int) -> MoverLabel:
    """Direction a particle at (x, t) travels in the SWAP limit.

    Layer t+1 pairs x with x+1 exactly when x + t is odd.
    """
    return MoverLabel.RIGHT if (x + t) % 2 else MoverLabel.LEFT


def left_member_parity(layer: int) -> int:
    return layer % 2


@dataclass
class OccupationConfig:
    """Bit string on an unbounded lattice; sites outside the window are empty."""

    window_origin: int
    bits: np.ndarray
    time: int = 0
    _extent: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise InvalidParameterError("bits must be one-dimensional")
        if np.any(self.bits > 1):
            raise InvalidParameterError("bits must be 0 or 1")

    @classmethod
    def from_support(cls, support, time=0) -> "OccupationConfig":
        support = sorted({int(x) for x in support})
        if not support:
            return cls(0, np.zeros(0, np.uint8), time)
        lo, hi = support[0], support[-1]
        bits = np.zeros(hi - lo + 1, np.uint8)
        bits[np.array(support) - lo] = 1
        return cls(lo, bits, time)

    @property
    def support(self) -> list:
        return (np.flatnonzero(self.bits) + self.window_origin).tolist()

    def __len__(self):
        return self.bits.size

    def occupation(self, x: int) -> int:
        i = x - self.window_origin
        if 0 <= i < self.bits.size:
            return int(self.bits[i])
        return 0

    def occupations(self, sites) -> np.ndarray:
        return np.array([self.occupation(x) for x in sites], dtype=np.uint8)

    def extent(self):
        """(min, max) occupied site, or None for the empty configuration."""
        occ = np.flatnonzero(self.bits)
        if occ.size == 0:
            return None
        return int(occ[0]) + self.window_origin, int(occ[-1]) + self.window_origin

    def grown(self, lo: int, hi: int) -> "OccupationConfig":
        """Copy whose window covers at least [lo, hi]."""
        start = min(lo, self.window_origin)
        stop = max(hi + 1, self.window_origin + self.bits.size)
        bits = np.zeros(stop - start, np.uint8)
        off = self.window_origin - start
        bits[off : off + self.bits.size] = self.bits
        return OccupationConfig(start, bits, self.time)

    def copy(self) -> "OccupationConfig":
        return OccupationConfig(self.window_origin, self.bits.copy(), self.time)

    def __eq__(self, other):
        if not isinstance(other, OccupationConfig):
            return NotImplemented
        return self.time == other.time and self.support == other.support


def initial_config(kind) -> OccupationConfig:
    """Initial operator support: ``"Z1"``, ``"Z0Z1"`` or an iterable of sites."""
    return OccupationConfig.from_support(initial_support(kind))


def initial_support(kind) -> tuple:
    if isinstance(kind, str):
        key = kind.strip().lower()
        if key == "z1":
            return (1,)
        if key == "z0z1":
            return (0, 1)
        raise InvalidParameterError(f"unknown initial operator {kind!r}")
    try:
        support = tuple(sorted({int(x) for x in kind}))
    except TypeError as exc:
        raise InvalidParameterError(f"invalid initial support {kind!r}") from exc
    if not support:
        raise InvalidParameterError("initial support is empty (identity operator)")
    return support


def light_cone_edges(support, t: int) -> tuple:
    """Outermost sites reachable at time t from ``support`` at time 0.

    A boundary particle that is a left mover at t=0 reaches ``x_min - t``;
    a right mover first steps inward, so the bound is one site tighter.
    """
    x_min, x_max = min(support), max(support)
    if t == 0:
        return x_min, x_max
    left = x_min - t if mover_label(x_min, 0) is MoverLabel.LEFT else x_min + 1 - t
    right = x_max + t if mover_label(x_max, 0) is MoverLabel.RIGHT else x_max - 1 + t
    return left, right


def apply_gate(cfg: OccupationConfig, x: int, alpha, rng, transfer=None) -> OccupationConfig:
    """Resample the pair (x, x+1) from the transfer-matrix column of its current state."""
    if transfer is None:
        transfer = build_transfer_matrix(alpha)
    cum = cumulative_columns(transfer)
    out = cfg.grown(x, x + 1)
    i = x - out.window_origin
    state = 2 * int(out.bits[i]) + int(out.bits[i + 1])
    new = _kernels.sample_pair(state, rng.random(), cum)
    out.bits[i] = new >> 1
    out.bits[i + 1] = new & 1
    return out


def apply_layer(cfg: OccupationConfig, alpha, rng, transfer=None) -> OccupationConfig:
    """Apply brick-wall layer ``cfg.time + 1`` and return the new configuration."""
    if transfer is None:
        transfer = build_transfer_matrix(alpha)
    cum = cumulative_columns(transfer)
    layer = cfg.time + 1
    ext = cfg.extent()
    if ext is None:
        return OccupationConfig(cfg.window_origin, cfg.bits.copy(), layer)
    lo, hi = ext
    out = cfg.grown(lo - 2, hi + 2)
    u = rng.random(_kernels.n_pairs(lo, hi, layer))
    _kernels.apply_layer_inplace(out.bits, out.window_origin, layer, lo, hi, cum, u, 0)
    out.time = layer
    return out


def evolve(cfg: OccupationConfig, alpha, n_layers: int, rng, transfer=None) -> OccupationConfig:
    for _ in range(n_layers):
        cfg = apply_layer(cfg, alpha, rng, transfer)
    return cfg
