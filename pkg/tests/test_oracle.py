import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualmc import oracle
from dualmc._validation import InvalidParameterError
from dualmc.oracle import (
    ExactDistribution,
    LightConeError,
    exact_density,
    exact_density_profile,
    exact_evolve,
    exact_purity,
    exact_renyi2,
    region_marginal,
)


def test_point_mass_layout():
    d = ExactDistribution.point_mass([1, 3], 5, 0)
    assert d.total() == 1.0
    # site 0 is the most significant bit: b = 01010
    assert d.flat()[0b01010] == 1.0
    np.testing.assert_array_equal(exact_density_profile(d), [0, 1, 0, 1, 0])


def test_initial_window_is_centred():
    d = ExactDistribution.initial("Z1", 10)
    assert list(d.sites()) == list(range(-3, 7))


def test_window_guards():
    with pytest.raises(InvalidParameterError):
        ExactDistribution.point_mass([0], oracle.MAX_SITES + 1, 0)
    with pytest.raises(InvalidParameterError):
        ExactDistribution.point_mass([9], 4, 0)
    d = ExactDistribution.initial("Z1", 6)
    with pytest.raises(LightConeError):
        exact_evolve(d, 0.5, 5)


@pytest.mark.parametrize("a", [0.0, 0.25, 0.6, 1.0])
def test_two_layers_from_single_site_by_enumeration(a):
    # t=1: {2} w.p. 1-a, {1,2} w.p. a.  t=2: pairs (0,1), (2,3).
    d = exact_evolve(ExactDistribution.initial("Z1", 10), a, 2)
    rho = {x: exact_density(d, x) for x in range(-1, 5)}
    assert rho[-1] == 0 and rho[4] == 0
    assert rho[0] == pytest.approx(a)
    assert rho[1] == pytest.approx(a * a)
    assert rho[2] == pytest.approx(a)
    assert rho[3] == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1), st.integers(0, 4))
def test_probability_is_conserved(a, t):
    d = exact_evolve(ExactDistribution.initial("Z0Z1", 12), a, t)
    assert d.total() == pytest.approx(1.0, abs=1e-12)
    assert np.all(d.weights >= -1e-15)


def test_empty_region_and_single_occupied_site():
    d = ExactDistribution.point_mass([2], 6, 0)
    assert exact_renyi2(d, []) == 0.0
    assert exact_renyi2(d, [2]) == pytest.approx(np.log(3))
    assert exact_renyi2(d, [1]) == pytest.approx(0.0)


def test_single_site_purity_after_one_layer():
    a = 0.35
    d = exact_evolve(ExactDistribution.initial("Z1", 8), a, 1)
    assert exact_purity(d, [1]) == pytest.approx((1 - a) ** 2 + a**2 / 3)


def test_region_marginal_respects_site_order():
    d = exact_evolve(ExactDistribution.point_mass([0, 1], 6, -2), 0.4, 1)
    m01 = region_marginal(d, [0, 1])
    m10 = region_marginal(d, [1, 0])
    np.testing.assert_allclose(m10, m01.T)
    with pytest.raises(InvalidParameterError):
        region_marginal(d, [7])


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 1), st.integers(1, 4), st.integers(1, 3))
def test_purity_bounds(a, t, n_sites):
    d = exact_evolve(ExactDistribution.initial("Z1", 12), a, t)
    sites = list(range(1, 1 + n_sites))
    p = exact_purity(d, sites)
    # 3^-|A| (maximally spread, all occupied) <= purity <= 1
    assert 3.0 ** (-n_sites) / 2**n_sites - 1e-12 <= p <= 1 + 1e-12
