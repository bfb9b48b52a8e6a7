"""Input validation helpers.

scikit-learn's ``check_array`` rejects complex input, so channel and
precoder arrays are validated here instead.
"""

import numbers

import numpy as np

from .exceptions import ConfigurationError, DimensionError


def check_channels(H, n_users=None, n_antennas=None):
    """Validate a channel matrix and return it as complex128 of shape (N, M).

    Row ``i`` is the channel vector ``h_i``. A 1-D input is read as a
    single-user channel.
    """
    H = np.asarray(H)
    if H.ndim == 1:
        H = H[np.newaxis, :]
    if H.ndim != 2:
        raise DimensionError(f"channels must be 2-D (users, antennas), got shape {H.shape}")
    if H.size == 0:
        raise DimensionError("channels must be non-empty")
    H = H.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(H)):
        raise ValueError("channels contain non-finite entries")
    _check_shape(H.shape, n_users, n_antennas, "channels")
    return H


def check_channel_batch(H, n_users=None, n_antennas=None):
    """Validate a stack of channel matrices, shape (R, N, M)."""
    H = np.asarray(H)
    if H.ndim == 2:
        H = H[np.newaxis]
    if H.ndim != 3:
        raise DimensionError(f"channel batch must be 3-D, got shape {H.shape}")
    return np.stack([check_channels(h, n_users, n_antennas) for h in H])


def check_precoder(V, n_users=None, n_antennas=None):
    V = np.asarray(V)
    if V.ndim == 1:
        V = V[np.newaxis, :]
    if V.ndim != 2:
        raise DimensionError(f"precoder must be 2-D (users, antennas), got shape {V.shape}")
    V = V.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(V)):
        raise ValueError("precoder contains non-finite entries")
    _check_shape(V.shape, n_users, n_antennas, "precoder")
    return V


def check_positive(value, name, integer=False, allow_zero=False):
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(value, bool) or not isinstance(value, kind):
        raise ConfigurationError(f"{name} must be {'an integer' if integer else 'a real number'}, got {value!r}")
    if not np.isfinite(value):
        raise ConfigurationError(f"{name} must be finite, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ConfigurationError(f"{name} must be {bound}, got {value!r}")
    return value


def _check_shape(shape, n_users, n_antennas, what):
    if n_users is not None and shape[0] != n_users:
        raise DimensionError(f"{what} has {shape[0]} users, expected {n_users}")
    if n_antennas is not None and shape[1] != n_antennas:
        raise DimensionError(f"{what} has {shape[1]} antennas, expected {n_antennas}")
