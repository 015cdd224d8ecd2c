"""Input validation helpers shared by the solvers and estimators."""

import numpy as np

from .exceptions import ConfigError, InvalidInput


def check_signal_matrix(X, *, min_samples=2, name="X"):
    """Return ``X`` as a finite float64 array of shape (n_samples, n_channels).

    One-dimensional input is treated as a single channel.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidInput(f"{name} must be 2-D (samples x channels), got ndim={X.ndim}")
    if X.shape[0] < min_samples:
        raise InvalidInput(f"{name} needs at least {min_samples} samples, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise InvalidInput(f"{name} has no channels")
    if not np.all(np.isfinite(X)):
        raise InvalidInput(f"{name} contains non-finite values")
    return X


def check_vector(x, *, min_samples=2, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInput(f"{name} must be 1-D, got shape {x.shape}")
    if x.size < min_samples:
        raise InvalidInput(f"{name} needs at least {min_samples} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InvalidInput(f"{name} contains non-finite values")
    return x


def check_positive(value, name, *, allow_zero=False):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a real number, got {value!r}") from None
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ConfigError(f"{name} must be finite and {bound}, got {value}")
    return value


def check_count(value, name):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def resolve_init_freqs(init_freqs, n_modes):
    """Starting central frequencies in normalized units (cycles/sample).

    ``"zeros"`` puts every mode at DC, ``"uniform"`` spaces them as
    ``k * 0.5 / (K + 1)`` for ``k = 1..K``, and an explicit sequence is used
    verbatim after range checking.
    """
    if isinstance(init_freqs, str):
        if init_freqs == "zeros":
            return np.zeros(n_modes)
        if init_freqs == "uniform":
            return 0.5 * np.arange(1, n_modes + 1) / (n_modes + 1)
        raise ConfigError(f"init_freqs must be 'zeros', 'uniform' or a list, got {init_freqs!r}")
    omega = np.asarray(init_freqs, dtype=float).ravel()
    if omega.size != n_modes:
        raise ConfigError(f"explicit init_freqs has {omega.size} entries, expected {n_modes}")
    if not np.all(np.isfinite(omega)) or np.any(omega < 0) or np.any(omega > 0.5):
        raise ConfigError("explicit init_freqs must lie in [0, 0.5] cycles/sample")
    return omega.copy()
