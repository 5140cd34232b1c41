import numpy as np
import pytest

from dualmc import _kernels, engine, oracle
from dualmc._validation import InvalidParameterError
from dualmc.markov import build_transfer_matrix


def test_geometry_covers_light_cone():
    g = engine.Geometry.build((0, 1), 10)
    assert g.origin == -11 and g.width == 24
    bits = g.initial_bits()
    assert bits.sum() == 2 and bits[11] == 1 and bits[12] == 1
    with pytest.raises(InvalidParameterError):
        g.mask([100])


def test_uniform_budget_is_quadratic_in_time():
    # pairs on layer k span [x_min - k + 1, x_max + k - 1]
    counts = [int(_kernels.uniforms_per_trajectory(1, 1, 0, t)) for t in (10, 20, 40, 80)]
    second_diff = np.diff(counts, 2)
    assert counts[0] > 0
    ratios = np.array(counts[1:]) / np.array(counts[:-1])
    assert np.all((ratios > 3.5) & (ratios < 4.5))
    assert np.all(second_diff > 0)


def test_density_counts_independent_of_threads():
    args = ("Z0Z1", 0.3, [3, 9], 3000, 11)
    _, _, c1 = engine.simulate_density_counts(*args, threads=1, chunk_size=128)
    _, _, c4 = engine.simulate_density_counts(*args, threads=4, chunk_size=128)
    np.testing.assert_array_equal(c1, c4)


def test_seed_changes_output():
    _, _, c1 = engine.simulate_density_counts("Z1", 0.3, [6], 2000, 1)
    _, _, c2 = engine.simulate_density_counts("Z1", 0.3, [6], 2000, 2)
    assert not np.array_equal(c1, c2)


def test_final_configs_match_density_counts():
    geom, configs = engine.sample_final_configs("Z1", 0.5, 6, 1500, 5, chunk_size=100)
    _, _, counts = engine.simulate_density_counts("Z1", 0.5, [6], 1500, 5, chunk_size=100)
    np.testing.assert_array_equal(configs.sum(axis=0), counts[0])


def test_sampler_marginals_match_exact():
    a, t, n = 0.45, 4, 200000
    geom, _, counts = engine.simulate_density_counts("Z1", a, [t], n, 3)
    exact = oracle.exact_evolve(oracle.ExactDistribution.initial("Z1", 12), a, t)
    for x in exact.sites():
        p = min(max(oracle.exact_density(exact, x), 0.0), 1.0)
        i = x - geom.origin
        mc = counts[0, i] / n if 0 <= i < geom.width else 0.0
        assert abs(mc - p) <= 4 * np.sqrt(p * (1 - p) / n) + 1e-12


def test_pair_factors_against_enumeration():
    T = build_transfer_matrix(0.37)
    f = engine.pair_factors(T)
    w = [1.0, 1.0 / 3.0]
    for s1 in range(4):
        for s2 in range(4):
            both = sum(T[o, s1] * T[o, s2] * w[o >> 1] * w[o & 1] for o in range(4))
            left = sum(T[o1, s1] * T[o2, s2] * w[o1 >> 1] for o1 in range(4) for o2 in range(4) if o1 >> 1 == o2 >> 1)
            right = sum(T[o1, s1] * T[o2, s2] * w[o1 & 1] for o1 in range(4) for o2 in range(4) if o1 & 1 == o2 & 1)
            assert f[s1, s2, 3] == pytest.approx(both)
            assert f[s1, s2, 2] == pytest.approx(left)
            assert f[s1, s2, 1] == pytest.approx(right)
            assert f[s1, s2, 0] == 1.0


def test_replica_pairs_deterministic_per_chunk():
    sites = [[-3, -2], [5, 6]]
    a = list(engine.simulate_replica_pairs("Z1", 0.4, 5, sites, 700, 9, threads=1, chunk_size=200))
    b = list(engine.simulate_replica_pairs("Z1", 0.4, 5, sites, 700, 9, threads=3, chunk_size=200))
    assert [x[0].shape[0] for x in a] == [200, 200, 200, 100]
    for (r1, n1), (r2, n2) in zip(a, b):
        np.testing.assert_array_equal(r1, r2)
        np.testing.assert_array_equal(n1, n2)
