"""Input checks shared by the library functions, estimators and CLI."""

import numbers

import numpy as np


class InvalidParameterError(ValueError):
    """A parameter lies outside its admissible range."""


def check_alpha(alpha) -> float:
    if isinstance(alpha, bool) or not isinstance(alpha, numbers.Real):
        raise InvalidParameterError(f"alpha must be a real number, got {alpha!r}")
    alpha = float(alpha)
    if not (0.0 <= alpha <= 1.0) or np.isnan(alpha):
        raise InvalidParameterError(f"alpha={alpha} outside [0, 1]")
    return alpha


def check_positive_int(value, name, minimum=1) -> int:
    if isinstance(value, bool):
        raise InvalidParameterError(f"{name} must be an integer")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, numbers.Integral):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidParameterError(f"{name}={value} must be >= {minimum}")
    return int(value)


def check_renyi_index(n) -> float:
    n = float(n)
    if not n > 1.0:
        raise InvalidParameterError(f"Renyi index n={n} must exceed 1")
    return n


def check_seed(seed) -> int:
    seed = check_positive_int(seed, "seed", minimum=0)
    if seed >= 2**64:
        raise InvalidParameterError("seed must fit in 64 bits")
    return seed
