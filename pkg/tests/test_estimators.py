import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from dualmc import oracle
from dualmc._validation import InvalidParameterError
from dualmc.estimators import (
    OperatorDensityEstimator,
    PowerLawExtrapolator,
    RelaxationRegressor,
    RenyiEntropyEstimator,
    VolumeLawRegressor,
)


def test_params_round_trip_through_clone():
    est = RenyiEntropyEstimator(alpha=0.3, case=3, t=40, n_pairs=5000, seed=9)
    params = clone(est).get_params()
    assert params["alpha"] == 0.3 and params["case"] == 3 and params["seed"] == 9
    est.set_params(alpha=0.6)
    assert est.alpha == 0.6


def test_density_estimator_against_exact():
    est = OperatorDensityEstimator(alpha=0.5, initial="Z1", n_samples=50000, seed=1).fit([2, 4])
    exact = oracle.exact_evolve(oracle.ExactDistribution.initial("Z1", 10), 0.5, 4)
    X = np.array([[x, 4] for x in range(-2, 6)])
    rho = est.predict(X)
    err = est.predict_stderr(X)
    ref = np.clip([oracle.exact_density(exact, x) for x in range(-2, 6)], 0, 1)
    assert np.all(np.abs(rho - ref) <= 4 * err + 1e-12)
    with pytest.raises(InvalidParameterError):
        est.predict([[0, 3]])


def test_unfitted_estimators_raise():
    with pytest.raises(NotFittedError):
        OperatorDensityEstimator().predict([[0, 1]])
    with pytest.raises(NotFittedError):
        VolumeLawRegressor().predict([1.0])


def test_density_estimator_validates_on_fit():
    with pytest.raises(InvalidParameterError):
        OperatorDensityEstimator(alpha=1.5).fit([3])
    with pytest.raises(InvalidParameterError):
        OperatorDensityEstimator(n_samples=0).fit([3])
    with pytest.raises(InvalidParameterError):
        OperatorDensityEstimator().fit([1.5])


def test_renyi_estimator_zero_size_and_lookup():
    est = RenyiEntropyEstimator(alpha=0.6, case=1, t=6, n_pairs=2000, seed=3).fit([0, 1, 2, 3, 4])
    S = est.predict([0, 2, 4])
    assert S[0] == 0.0 and np.all(np.diff(S) > 0)
    assert est.predict_stderr([0])[0] == 0.0
    with pytest.raises(InvalidParameterError):
        est.predict([7])
    fit = est.volume_law((2, 4))
    assert 0.5 < fit.slope < 2.0


def test_volume_law_regressor_is_a_regressor():
    l = np.arange(1, 10, dtype=float)
    y = 1.386 * l - 0.2
    reg = VolumeLawRegressor(window=(3, 9)).fit(l.reshape(-1, 1), y)
    assert reg.coef_[0] == pytest.approx(1.386)
    assert reg.score(l.reshape(-1, 1), y) == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        VolumeLawRegressor().fit(np.ones((3, 2)), [1, 2, 3])


def test_relaxation_regressor():
    t = np.arange(4, 30, 2, dtype=float)
    lam = -math.log(0.6)
    rho = 0.75 - 0.3 * np.exp(-lam * t / 2)
    reg = RelaxationRegressor().fit(t, rho)
    assert reg.rate_ == pytest.approx(lam)
    np.testing.assert_allclose(reg.predict(t), rho)


def test_power_law_extrapolator():
    t = np.array([20.0, 40, 60, 80, 120])
    a = 1.3 - 2.0 * t**-0.7
    ex = PowerLawExtrapolator().fit(t, a)
    assert ex.a_inf_ == pytest.approx(1.3, abs=1e-4)
    np.testing.assert_allclose(ex.predict(t), a, atol=1e-6)


def test_volume_law_regressor_parity_offset():
    l = np.arange(2, 14, dtype=float)
    y = 0.9 * l + 0.3 * (l % 2)
    reg = VolumeLawRegressor().fit(l.reshape(-1, 1), y)
    assert reg.coef_[0] == pytest.approx(0.9)
    np.testing.assert_allclose(reg.predict(l.reshape(-1, 1)), y, atol=1e-12)
