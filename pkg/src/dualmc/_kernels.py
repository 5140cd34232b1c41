"""Compiled inner loops.

Sites are stored one per ``uint8`` in a fixed window; ``origin`` is the lattice
index of element 0. Every visited gate pair consumes exactly one uniform from
the caller-supplied stream, occupied or not, so the stream position depends
only on the geometry and never on the sampled history.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def sample_pair(state, r, cum):
    # Column 00 is never consulted: an empty pair stays empty.
    if state == 0:
        return 0
    for out in range(3):
        if r < cum[state, out]:
            return out
    return 3


@njit(cache=True, nogil=True)
def first_left_member(lo, layer):
    # Odd layers pair (odd, odd+1), even layers pair (even, even+1).
    if ((lo - layer) & 1) == 0:
        return lo
    return lo - 1


@njit(cache=True, nogil=True)
def apply_layer_inplace(bits, origin, layer, lo, hi, cum, u, pos):
    """Update every pair of ``layer`` that intersects sites [lo, hi]."""
    a = first_left_member(lo, layer)
    while a <= hi:
        i = a - origin
        s = 2 * bits[i] + bits[i + 1]
        out = sample_pair(s, u[pos], cum)
        pos += 1
        bits[i] = out >> 1
        bits[i + 1] = out & 1
        a += 2
    return pos


@njit(cache=True, nogil=True)
def n_pairs(lo, hi, layer):
    a = first_left_member(lo, layer)
    return (hi - a) // 2 + 1


@njit(cache=True, nogil=True)
def uniforms_per_trajectory(x_min, x_max, t0, n_layers):
    total = 0
    for k in range(1, n_layers + 1):
        total += n_pairs(x_min - k + 1, x_max + k - 1, t0 + k)
    return total


@njit(cache=True, nogil=True)
def evolve(bits, origin, x_min, x_max, t0, n_layers, cum, u, pos):
    """Apply ``n_layers`` layers to a configuration supported on [x_min, x_max] at time t0."""
    for k in range(1, n_layers + 1):
        pos = apply_layer_inplace(bits, origin, t0 + k, x_min - k + 1, x_max + k - 1, cum, u, pos)
    return pos


@njit(cache=True, nogil=True)
def density_chunk(init, origin, x_min, x_max, n_layers, cum, u, rec_index, counts):
    """Run ``u.shape[0]`` trajectories from ``init`` at time 0, accumulating occupations.

    ``rec_index[t]`` is the row of ``counts`` for time t, or -1 when t is not recorded.
    """
    w = init.size
    bits = np.empty(w, np.uint8)
    for j in range(u.shape[0]):
        bits[:] = init
        row = rec_index[0]
        if row >= 0:
            for i in range(w):
                counts[row, i] += bits[i]
        pos = 0
        uj = u[j]
        for k in range(1, n_layers + 1):
            lo = x_min - k + 1
            hi = x_max + k - 1
            pos = apply_layer_inplace(bits, origin, k, lo, hi, cum, uj, pos)
            row = rec_index[k]
            if row >= 0:
                for i in range(lo - 1 - origin, hi + 2 - origin):
                    counts[row, i] += bits[i]


@njit(cache=True, nogil=True)
def final_configs_chunk(init, origin, x_min, x_max, n_layers, cum, u, out):
    for j in range(u.shape[0]):
        out[j, :] = init
        evolve(out[j], origin, x_min, x_max, 0, n_layers, cum, u[j], 0)


@njit(cache=True, nogil=True)
def resummed_value(b1, b2, origin, layer, lo, hi, mask, factors):
    """Conditional expectation of the coincidence estimator over the final layer.

    ``b1``/``b2`` hold the two replicas one layer before ``layer``; ``mask``
    marks region sites; ``factors[s1, s2, m]`` is the per-pair factor with
    region membership code m = 2*in_left + in_right.
    """
    val = 1.0
    a = first_left_member(lo, layer)
    while a <= hi:
        i = a - origin
        m = 2 * mask[i] + mask[i + 1]
        if m != 0:
            s1 = 2 * b1[i] + b1[i + 1]
            s2 = 2 * b2[i] + b2[i + 1]
            val *= factors[s1, s2, m]
        a += 2
    return val


@njit(cache=True, nogil=True)
def naive_value(b1, b2, mask, weight):
    val = 1.0
    for i in range(mask.size):
        if mask[i]:
            if b1[i] != b2[i]:
                return 0.0
            if b1[i]:
                val *= weight
    return val


@njit(cache=True, nogil=True)
def replica_chunk(init, origin, x_min, x_max, n_layers, cum, u, masks, factors, resummed, naive):
    """Evolve replica pairs and evaluate both estimators for every region mask.

    Pair j uses uniform rows 2j and 2j+1. The resummed estimator is evaluated
    on the configurations after ``n_layers - 1`` layers, the naive one after
    ``n_layers``.
    """
    w = init.size
    b1 = np.empty(w, np.uint8)
    b2 = np.empty(w, np.uint8)
    lo = x_min - n_layers + 1
    hi = x_max + n_layers - 1
    third = 1.0 / 3.0
    for j in range(resummed.shape[0]):
        b1[:] = init
        b2[:] = init
        p1 = evolve(b1, origin, x_min, x_max, 0, n_layers - 1, cum, u[2 * j], 0)
        p2 = evolve(b2, origin, x_min, x_max, 0, n_layers - 1, cum, u[2 * j + 1], 0)
        for r in range(masks.shape[0]):
            resummed[j, r] = resummed_value(b1, b2, origin, n_layers, lo, hi, masks[r], factors)
        apply_layer_inplace(b1, origin, n_layers, lo, hi, cum, u[2 * j], p1)
        apply_layer_inplace(b2, origin, n_layers, lo, hi, cum, u[2 * j + 1], p2)
        for r in range(masks.shape[0]):
            naive[j, r] = naive_value(b1, b2, masks[r], third)
