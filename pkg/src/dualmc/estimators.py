"""scikit-learn style wrappers around the functional API.

The Monte Carlo estimators take the simulation parameters in ``__init__``
and the measurement points as ``X``; the fitting helpers are ordinary
regressors on one feature.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import density, engine, entanglement
from ._validation import InvalidParameterError, check_alpha, check_positive_int, check_seed


def _column(X, name="X"):
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise InvalidParameterError(f"{name} must have a single feature, got {X.shape[1]}")
        X = X[:, 0]
    return X


def _integers(values, name):
    values = np.asarray(values, dtype=np.float64)
    if not np.all(values == np.round(values)):
        raise InvalidParameterError(f"{name} must be integer valued")
    return values.astype(np.int64)


class OperatorDensityEstimator(BaseEstimator):
    """Monte Carlo operator density.

    ``fit(times)`` simulates trajectories recording the given layers;
    ``predict(X)`` with rows ``(x, t)`` returns rho(x, t).
    """

    def __init__(self, alpha=0.5, initial="Z0Z1", n_samples=100000, seed=0, threads=1,
                 chunk_size=engine.DEFAULT_CHUNK_SIZE):
        self.alpha = alpha
        self.initial = initial
        self.n_samples = n_samples
        self.seed = seed
        self.threads = threads
        self.chunk_size = chunk_size

    def fit(self, X, y=None):
        check_alpha(self.alpha)
        check_seed(self.seed)
        check_positive_int(self.n_samples, "n_samples")
        times = _integers(_column(X), "times")
        if times.min() < 0:
            raise InvalidParameterError("times must be non-negative")
        self.accumulator_ = density.simulate_density(
            self.initial, self.alpha, times.tolist(), self.n_samples, self.seed,
            threads=self.threads, chunk_size=self.chunk_size,
        )
        self.times_ = np.array(self.accumulator_.recorded_times)
        return self

    def _points(self, X):
        check_is_fitted(self, "accumulator_")
        X = _integers(check_array(X, dtype=np.float64), "X")
        if X.shape[1] != 2:
            raise InvalidParameterError("X rows must be (x, t)")
        return X

    def predict(self, X):
        return np.array([self.accumulator_.density(int(x), int(t)) for x, t in self._points(X)])

    def predict_stderr(self, X):
        return np.array([self.accumulator_.stderr(int(x), int(t)) for x, t in self._points(X)])

    def relaxation(self, x0=0, window=None, layers_per_step=2):
        check_is_fitted(self, "accumulator_")
        return density.fit_relaxation(self.accumulator_, x0, window, layers_per_step)


class RenyiEntropyEstimator(BaseEstimator):
    """Second Renyi operator entanglement S(l_A) for one region family at time ``t``.

    ``fit(l_A)`` runs the replica pairs once for all requested sizes;
    ``predict(l_A)`` returns the entropies, ``stderr_`` their jackknife errors.
    """

    def __init__(self, alpha=0.5, case=1, t=20, initial="Z1", n_pairs=100000, seed=0,
                 n_blocks=entanglement.DEFAULT_BLOCKS, threads=1, chunk_size=engine.DEFAULT_CHUNK_SIZE):
        self.alpha = alpha
        self.case = case
        self.t = t
        self.initial = initial
        self.n_pairs = n_pairs
        self.seed = seed
        self.n_blocks = n_blocks
        self.threads = threads
        self.chunk_size = chunk_size

    def fit(self, X, y=None):
        check_alpha(self.alpha)
        check_seed(self.seed)
        sizes = _integers(_column(X), "l_A")
        self.l_A_ = np.unique(sizes)
        positive = [l for l in self.l_A_ if l > 0]
        S = np.zeros(self.l_A_.size)
        err = np.zeros(self.l_A_.size)
        self.estimate_ = None
        if positive:
            regions = [entanglement.Region(self.case, int(l), self.t, self.initial) for l in positive]
            self.estimate_ = entanglement.estimate_entropies(
                self.initial, self.alpha, regions, self.n_pairs, self.seed,
                n_blocks=self.n_blocks, threads=self.threads, chunk_size=self.chunk_size,
            )
            S_pos, err_pos = self.estimate_.resummed.entropy()
            S[self.l_A_ > 0], err[self.l_A_ > 0] = S_pos, err_pos
        self.entropy_, self.stderr_ = S, err
        return self

    def _lookup(self, X, values):
        check_is_fitted(self, "entropy_")
        sizes = _integers(_column(X), "l_A")
        idx = np.searchsorted(self.l_A_, sizes)
        if np.any(idx >= self.l_A_.size) or np.any(self.l_A_[np.minimum(idx, self.l_A_.size - 1)] != sizes):
            raise InvalidParameterError("l_A values were not part of the fit")
        return values[idx]

    def predict(self, X):
        return self._lookup(X, self.entropy_)

    def predict_stderr(self, X):
        return self._lookup(X, self.stderr_)

    def volume_law(self, window=None, parity=None):
        """Slope fit with a block-jackknife error over the replica pairs."""
        check_is_fitted(self, "entropy_")
        if self.estimate_ is None:
            raise InvalidParameterError("no positive l_A in the fit")
        return entanglement.fit_volume_law_jackknife(self.estimate_, window, parity)


class VolumeLawRegressor(RegressorMixin, BaseEstimator):
    """S = slope * l_A + intercept [+ offset for odd l_A] by weighted least squares."""

    def __init__(self, window=None, parity=None):
        self.window = window
        self.parity = parity

    def fit(self, X, y, sigma=None):
        X, y = check_X_y(X, y, ensure_2d=False, dtype=np.float64)
        x = _column(X)
        cols = [x, y] if sigma is None else [x, y, np.asarray(sigma, dtype=np.float64)]
        fit = entanglement.fit_volume_law(np.column_stack(cols), self.window, self.parity)
        self.coef_ = np.array([fit.slope])
        self.intercept_ = fit.intercept
        self.parity_offset_ = fit.parity_offset
        self.slope_err_ = fit.slope_err
        self.window_ = fit.l_window
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        x = _column(X)
        return self.coef_[0] * x + self.intercept_ + self.parity_offset_ * (np.rint(x) % 2)


class RelaxationRegressor(RegressorMixin, BaseEstimator):
    """rho(t) = 3/4 - amplitude * exp(-rate * t / layers_per_step)."""

    def __init__(self, layers_per_step=2):
        self.layers_per_step = layers_per_step

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_2d=False, dtype=np.float64)
        rate, amp, resid = density.fit_log_residual(_column(X), y, self.layers_per_step)
        self.rate_, self.amplitude_, self.residual_ = rate, amp, resid
        return self

    def predict(self, X):
        check_is_fitted(self, "rate_")
        return 0.75 - self.amplitude_ * np.exp(-self.rate_ * _column(X) / self.layers_per_step)


class PowerLawExtrapolator(RegressorMixin, BaseEstimator):
    """a(t) = a_inf - c * t^-p; ``a_inf_`` is the t -> infinity limit."""

    def __init__(self, p_bounds=(1e-3, 5.0)):
        self.p_bounds = p_bounds

    def fit(self, X, y, sigma=None):
        X, y = check_X_y(X, y, ensure_2d=False, dtype=np.float64)
        cols = [_column(X), y] if sigma is None else [_column(X), y, np.asarray(sigma, dtype=np.float64)]
        self.result_ = entanglement.extrapolate_infinite_time(np.column_stack(cols), self.p_bounds)
        self.a_inf_ = self.result_.a_inf
        self.a_inf_err_ = self.result_.error
        self.converged_ = self.result_.converged
        self.c_ = self.result_.amplitude
        return self

    def predict(self, X):
        check_is_fitted(self, "a_inf_")
        p = self.result_.exponent
        if not np.isfinite(p):
            return np.full(_column(X).shape, self.a_inf_)
        return self.a_inf_ - self.c_ * _column(X) ** (-p)
