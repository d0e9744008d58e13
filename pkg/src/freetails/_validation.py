"""Small input-checking helpers shared across modules."""

import numbers

import numpy as np

from .exceptions import DomainError, ValidationError


def check_positive(value, name, allow_zero=False, allow_inf=False):
    if not isinstance(value, numbers.Real):
        raise ValidationError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if np.isnan(value) or (np.isinf(value) and not allow_inf):
        raise ValidationError(f"{name} must be finite, got {value}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValidationError(f"{name} must be {bound}, got {value}")
    return value


def check_int(value, name, minimum=0):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def as_1d_float(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def as_upper(z, name="z", strict=True):
    """Return ``z`` as a complex array, checking Im z > 0."""
    arr = np.asarray(z, dtype=complex)
    bad = arr.imag <= 0 if strict else arr.imag < 0
    if np.any(bad):
        raise DomainError(f"{name} must lie in the open upper half-plane")
    return arr


def check_seed(seed):
    if seed is None:
        return None
    if isinstance(seed, np.random.Generator):
        return seed
    return check_int(seed, "seed")
