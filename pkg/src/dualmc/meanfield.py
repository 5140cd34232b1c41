"""Mean-field densities, light-cone bounds and volume-law coefficients.

Everything here is deterministic; the Monte Carlo modules use these values
as comparison targets.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import InvalidParameterError, check_alpha, check_positive_int, check_renyi_index
from .markov import initial_support

LN4 = 2.0 * np.log(2.0)


@dataclass
class DensityField:
    values: np.ndarray
    origin: int
    time: int = 0

    @classmethod
    def from_support(cls, support, time=0):
        support = sorted(support)
        values = np.zeros(support[-1] - support[0] + 1)
        values[np.array(support) - support[0]] = 1.0
        return cls(values, support[0], time)

    def __call__(self, x) -> float:
        i = x - self.origin
        if 0 <= i < self.values.size:
            return float(self.values[i])
        return 0.0

    def sites(self):
        return np.arange(self.origin, self.origin + self.values.size)


def mf_layer(field: DensityField, alpha) -> DensityField:
    """One brick-wall layer of the factorised (independent-site) update."""
    a = check_alpha(alpha)
    layer = field.time + 1
    rho = np.concatenate([[0.0, 0.0], field.values, [0.0, 0.0]])
    origin = field.origin - 2
    start = (origin - layer) % 2
    left = rho[start:-1:2].copy()
    right = rho[start + 1 :: 2][: left.size].copy()
    rho[start : start + 2 * left.size : 2] = right + a * left * (1.0 - 4.0 / 3.0 * right)
    rho[start + 1 : start + 1 + 2 * left.size : 2] = left + a * right * (1.0 - 4.0 / 3.0 * left)
    return DensityField(rho, origin, layer)


def mf_evolve(initial, alpha, t) -> list:
    """Fields at times 0..t starting from the support of ``initial``."""
    field = DensityField.from_support(initial_support(initial))
    out = [field]
    for _ in range(t):
        field = mf_layer(field, alpha)
        out.append(field)
    return out


def relaxation_rate(alpha) -> float:
    a = check_alpha(alpha)
    if a == 1.0:
        return np.inf
    return -np.log1p(-a)


def lc_bounds_two_site(alpha, k):
    """Steady light-cone densities (d = 2k, d = 2k+1) for a two-site initial operator."""
    a = check_alpha(alpha)
    k = check_positive_int(k, "k", minimum=0)
    even = 1.0 if k == 0 else 0.75
    odd = 0.75 - (0.75 - a) * (1.0 - a) ** k
    return even, odd


def lc_recurrence_two_site(alpha, k_max, max_iter=100000):
    """Iterate the steady-state light-cone recurrence numerically; returns rho_d for d = 0..2k_max+1."""
    a = check_alpha(alpha)
    rho = {-1: 0.0, 0: 1.0}
    for k in range(k_max + 1):
        if k > 0:
            # rho_2k solves x = x + a*rho_{2k-1}*(1 - 4/3 x); iterate from the edge value.
            x = rho[2 * k - 2]
            for _ in range(max_iter):
                x_new = x + a * rho[2 * k - 1] * (1.0 - 4.0 / 3.0 * x)
                if abs(x_new - x) < 1e-16:
                    break
                x = x_new
            rho[2 * k] = x_new
        rho[2 * k + 1] = rho[2 * k - 1] + a * rho[2 * k] * (1.0 - 4.0 / 3.0 * rho[2 * k - 1])
    return np.array([rho[d] for d in range(2 * k_max + 2)])


def emission_distribution(alpha, t0) -> float:
    """Probability that the first left mover is emitted at layer ``t0``."""
    a = check_alpha(alpha)
    t0 = check_positive_int(t0, "t0")
    return a * (1.0 - a) ** (t0 - 1)


def lc_bounds_single_site(alpha, k):
    """Steady densities near the left edge for a single-site initial operator.

    Mixture over the first emission time of two-site light-cone values:
    rho_2k = 3/4 * P(t0 <= k) + p(k+1) and
    rho_2k+1 = sum_{t0 <= k+1} p(t0) * rho^{two-site}_{2(k+1-t0)+1}.
    """
    a = check_alpha(alpha)
    k = check_positive_int(k, "k", minimum=0)
    p = [emission_distribution(a, s) for s in range(1, k + 2)]
    even = 0.75 * sum(p[:k]) + p[k]
    odd = sum(p[s - 1] * lc_bounds_two_site(a, k + 1 - s)[1] for s in range(1, k + 2))
    return even, odd


def lc_bounds_single_site_closed(alpha, k):
    """Closed forms of :func:`lc_bounds_single_site` after summing the geometric series."""
    a = check_alpha(alpha)
    q = 1.0 - a
    even = 0.75 * (1.0 - q**k) + a * q**k
    odd = 0.75 - 0.75 * q**k * (1.0 - a * (4.0 / 3.0 * a + k * (-1.0 + 4.0 / 3.0 * a)))
    return even, odd


def superposed_profile(alpha, t, t0_max=None, tol=1e-12) -> DensityField:
    """Density at time t for a single-site operator at x=1, as a mixture over emission times.

    The lone particle moves right until its first emission at layer t0; from
    then on the density is the two-site mean-field profile shifted by t0 in
    space and time.
    """
    a = check_alpha(alpha)
    t = check_positive_int(t, "t", minimum=0)
    if t0_max is None:
        t0_max = t
    t0_max = check_positive_int(t0_max, "t0_max", minimum=0)
    if t0_max < t and (1.0 - a) ** t0_max > tol:
        raise InvalidParameterError(
            f"emission tail (1-alpha)^{t0_max} = {(1.0 - a) ** t0_max:.3g} exceeds tol={tol}; widen t0_max"
        )
    fields = _two_site_fields(a, t)
    origin = 1 - t - 1
    out = np.zeros(2 * t + 3)
    sites = np.arange(origin, origin + out.size)
    for t0 in range(1, min(t0_max, t) + 1):
        f = fields[t - t0]
        idx = sites - t0 - f.origin
        ok = (idx >= 0) & (idx < f.values.size)
        out[ok] += emission_distribution(a, t0) * f.values[idx[ok]]
    if t0_max >= t:
        out[t + 1 - origin] += (1.0 - a) ** t
    return DensityField(out, origin, t)


@lru_cache(maxsize=32)
def _two_site_fields_cached(alpha, t):
    return tuple(mf_evolve("Z0Z1", alpha, t))


def _two_site_fields(alpha, t):
    return _two_site_fields_cached(float(alpha), int(t))


def superposed_density(alpha, x, t, t0_max=None, tol=1e-12) -> float:
    return superposed_profile(alpha, t, t0_max, tol)(x)


def _renyi_site_terms(rho, n):
    rho = np.asarray(rho, dtype=float)
    if np.any((rho < 0) | (rho > 1)):
        raise InvalidParameterError("densities must lie in [0, 1]")
    return -np.log((1.0 - rho) ** n + rho**n / 3.0 ** (n - 1)) / (n - 1)


def mf_entropy_case1(density_profile, region=None, n=2) -> float:
    """Factorised Renyi-n entropy: sum over region sites of the single-site value.

    ``density_profile`` is either a sequence of densities (one per region
    site) or a :class:`DensityField` together with ``region`` (sites or an
    object with a ``sites`` attribute).
    """
    n = check_renyi_index(n)
    if isinstance(density_profile, DensityField):
        sites = getattr(region, "sites", region)
        rho = [density_profile(x) for x in sites]
    else:
        rho = density_profile
    return float(np.sum(_renyi_site_terms(rho, n)))


def _entropy_from_purity(purity, n):
    return -np.log(purity) / (n - 1)


def mf_entropy_case2(alpha, l_A, n=2) -> float:
    """Left-edge region: orthogonal mixture over the emission time of the leftmost particle."""
    a = check_alpha(alpha)
    l_A = check_positive_int(l_A, "l_A")
    n = check_renyi_index(n)
    m = (l_A + 1) // 2
    t0 = np.arange(1, m + 1)
    terms = a**n * (1.0 - a) ** (n * (t0 - 1)) * 4.0 ** (-(n - 1) * (l_A - 2 * t0 + 2))
    tail = (1.0 - a) ** m
    return float(_entropy_from_purity(terms.sum() + tail**n, n))


def mf_entropy_case3(alpha, l_A, n=2) -> float:
    """Left-mover-only region: as case 2 with every emission delay costing one slot."""
    a = check_alpha(alpha)
    l_A = check_positive_int(l_A, "l_A")
    n = check_renyi_index(n)
    t0 = np.arange(1, l_A + 2)
    terms = a**n * (1.0 - a) ** (n * (t0 - 1)) * 4.0 ** (-(n - 1) * (l_A - t0 + 1))
    tail = (1.0 - a) ** (l_A + 1)
    return float(_entropy_from_purity(terms.sum() + tail**n, n))


def _check_case(case):
    if case not in (1, 2, 3):
        raise InvalidParameterError(f"case must be 1, 2 or 3, got {case!r}")
    return case


def critical_alpha(case, n=2) -> float:
    """alpha above which the coefficient saturates at 2 ln 2 (NaN for case 1)."""
    _check_case(case)
    n = check_renyi_index(n)
    if case == 1:
        return float("nan")
    power = 4.0 if case == 2 else 2.0
    return 1.0 - 2.0 ** (-power * (n - 1) / n)


def coefficient(case, n, alpha) -> float:
    """Volume-law coefficient lim S/l_A."""
    _check_case(case)
    n = check_renyi_index(n)
    a = check_alpha(alpha)
    if case == 1 or a >= critical_alpha(case, n):
        return LN4
    scale = 0.5 if case == 2 else 1.0
    return -scale * n / (n - 1) * np.log1p(-a)


def transition_window(case):
    """Range of n for which the transition lies inside the physical range alpha <= 2/3."""
    _check_case(case)
    if case == 1:
        return None
    power = 4.0 if case == 2 else 2.0
    return 1.0, 1.0 / (1.0 - np.log2(3.0) / power)


def coefficient_table(case, n, alphas):
    """Rows of (alpha, coefficient) with the critical point and physical-n window as metadata."""
    return {
        "case": case,
        "n": float(n),
        "alpha_c": critical_alpha(case, n),
        "transition_window": transition_window(case),
        "rows": [(float(a), coefficient(case, n, a)) for a in alphas],
    }
