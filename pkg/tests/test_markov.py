import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualmc import markov
from dualmc._validation import InvalidParameterError
from dualmc.markov import (
    GateParameter,
    MoverLabel,
    OccupationConfig,
    apply_gate,
    apply_layer,
    build_transfer_matrix,
    cumulative_columns,
    evolve,
    initial_config,
    initial_support,
    light_cone_edges,
    mover_label,
)

alphas = st.floats(0.0, 1.0, allow_nan=False)


@given(alphas)
def test_transfer_matrix_is_column_stochastic(a):
    T = build_transfer_matrix(a)
    assert np.all(T >= 0)
    np.testing.assert_allclose(T.sum(axis=0), 1.0, atol=1e-15)


@given(alphas)
def test_empty_pair_absorbing_and_occupied_pairs_never_empty(a):
    T = build_transfer_matrix(a)
    assert T[0, 0] == 1.0
    # no column maps a non-empty pair to the empty pair
    assert np.all(T[0, 1:] == 0.0)


def test_swap_limit():
    T = build_transfer_matrix(0.0)
    expected = np.eye(4)[[0, 2, 1, 3]]
    np.testing.assert_array_equal(T, expected)


def test_full_scrambling_column():
    T = build_transfer_matrix(1.0)
    np.testing.assert_allclose(T[:, 1], [0, 0, 0, 1])
    np.testing.assert_allclose(T[:, 3], [0, 1 / 3, 1 / 3, 1 / 3])


@pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan"), "0.3", True])
def test_alpha_validation(bad):
    with pytest.raises(InvalidParameterError):
        build_transfer_matrix(bad)


def test_gate_parameter_coupling_round_trip():
    for J in np.linspace(0, np.pi / 4, 7):
        g = GateParameter.from_coupling(J)
        assert g.physical
        assert GateParameter.from_coupling(g.coupling()).alpha == pytest.approx(g.alpha, abs=1e-12)
    assert GateParameter.from_coupling(0.0).alpha == pytest.approx(2 / 3)
    with pytest.raises(InvalidParameterError):
        GateParameter(0.9).coupling()
    np.testing.assert_array_equal(build_transfer_matrix(GateParameter(0.4)), build_transfer_matrix(0.4))


def test_cumulative_columns_rejects_bad_matrices():
    with pytest.raises(InvalidParameterError):
        cumulative_columns(np.eye(3))
    bad = build_transfer_matrix(0.5)
    bad[1, 1] = -0.1
    with pytest.raises(InvalidParameterError):
        cumulative_columns(bad)


def test_mover_labels():
    # Z_0 is a left mover and Z_1 a right mover at t = 0
    assert mover_label(0, 0) is MoverLabel.LEFT
    assert mover_label(1, 0) is MoverLabel.RIGHT
    assert mover_label(1, 1) is MoverLabel.LEFT
    assert mover_label(-3, 2) is MoverLabel.RIGHT


def test_light_cone_edges_known_initials():
    assert light_cone_edges(initial_support("Z1"), 5) == (-3, 6)
    assert light_cone_edges(initial_support("Z0Z1"), 5) == (-5, 6)
    assert light_cone_edges((2,), 3) == (-1, 4)


def test_initial_support_parsing():
    assert initial_support("z0z1") == (0, 1)
    assert initial_support([5, 3, 5]) == (3, 5)
    with pytest.raises(InvalidParameterError):
        initial_support([])
    with pytest.raises(InvalidParameterError):
        initial_support("X7")


def test_occupation_config_window():
    cfg = OccupationConfig.from_support([3, 5])
    assert cfg.occupation(4) == 0 and cfg.occupation(5) == 1 and cfg.occupation(100) == 0
    g = cfg.grown(-2, 9)
    assert g.window_origin == -2 and len(g) == 12
    assert g == cfg
    assert cfg.extent() == (3, 5)
    assert OccupationConfig(0, np.zeros(4)).extent() is None
    with pytest.raises(InvalidParameterError):
        OccupationConfig(0, np.array([0, 2]))


def test_apply_gate_frequencies_follow_column():
    rng = np.random.default_rng(1)
    a = 0.45
    T = build_transfer_matrix(a)
    n = 40000
    counts = np.zeros(4)
    start = OccupationConfig.from_support([0, 1])
    for _ in range(n):
        out = apply_gate(start, 0, a, rng)
        counts[2 * out.occupation(0) + out.occupation(1)] += 1
    sigma = np.sqrt(T[:, 3] * (1 - T[:, 3]) / n)
    assert np.all(np.abs(counts / n - T[:, 3]) <= 4 * sigma + 1e-12)


def test_apply_gate_on_empty_pair_is_identity():
    rng = np.random.default_rng(0)
    cfg = OccupationConfig.from_support([5])
    assert apply_gate(cfg, 0, 0.7, rng).support == [5]


def test_swap_limit_moves_ballistically():
    rng = np.random.default_rng(0)
    cfg = evolve(initial_config("Z0Z1"), 0.0, 7, rng)
    assert cfg.support == [-7, 8]
    assert cfg.time == 7


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(-4, 4), min_size=1, max_size=5),
    alphas,
    st.integers(1, 12),
    st.integers(0, 2**32 - 1),
)
def test_support_stays_inside_light_cone(support, a, t, seed):
    rng = np.random.default_rng(seed)
    cfg = evolve(OccupationConfig.from_support(support), a, t, rng)
    left, right = light_cone_edges(sorted(set(support)), t)
    occ = cfg.support
    assert occ, "the support never becomes empty"
    assert left <= min(occ) and max(occ) <= right


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=6), st.integers(0, 2**32 - 1))
def test_swap_limit_preserves_particle_number(support, seed):
    rng = np.random.default_rng(seed)
    cfg = OccupationConfig.from_support(support)
    out = evolve(cfg, 0.0, 5, rng)
    assert len(out.support) == len(cfg.support)


def test_layer_on_empty_config_advances_time():
    cfg = OccupationConfig(0, np.zeros(3, np.uint8), 4)
    out = apply_layer(cfg, 0.5, np.random.default_rng(0))
    assert out.time == 5 and out.support == []


def test_physical_threshold_constant():
    assert markov.PHYSICAL_ALPHA_MAX == pytest.approx(2 / 3)
