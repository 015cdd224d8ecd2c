"""One-sided analytic spectra and the frequency grid used by every solver.

Convention: a real signal of length ``n`` is represented by its ``n // 2 + 1``
non-negative frequency DFT bins, with every interior bin doubled so that the
bins are those of the analytic signal. DC (and Nyquist, for even ``n``) are
kept as-is. Frequencies are in normalized cycles/sample; conversion to Hz
happens only at I/O boundaries.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DimensionError, InvalidInput
from .validation import check_vector


@dataclass(frozen=True)
class FrequencyGrid:
    """Non-negative frequency bins of a length-``n_fft`` real transform.

    For even ``n_fft`` the bins are ``b / (2 (n_bins - 1))``, running from 0
    to exactly 0.5. Odd lengths stop just short of 0.5.
    """

    n_fft: int

    def __post_init__(self):
        if self.n_fft < 2:
            raise InvalidInput(f"transform length must be >= 2, got {self.n_fft}")

    @property
    def n_bins(self):
        return self.n_fft // 2 + 1

    @cached_property
    def normalized_freqs(self):
        freqs = np.fft.rfftfreq(self.n_fft)
        freqs.setflags(write=False)
        return freqs

    @cached_property
    def weights(self):
        """Per-bin factor turning ``|coeff|**2`` into time-domain energy."""
        w = np.full(self.n_bins, 1.0 / (2.0 * self.n_fft))
        w[0] = 1.0 / self.n_fft
        if self.n_fft % 2 == 0:
            w[-1] = 1.0 / self.n_fft
        return w


@dataclass(frozen=True)
class HalfSpectrum:
    coeffs: np.ndarray
    grid: FrequencyGrid

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape[0] != self.grid.n_bins:
            raise DimensionError(
                f"spectrum has {coeffs.shape[0]} bins, grid expects {self.grid.n_bins}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise InvalidInput("spectrum contains non-finite coefficients")
        object.__setattr__(self, "coeffs", coeffs)

    def energy(self):
        return float(np.sum(self.grid.weights * np.abs(self.coeffs) ** 2))

    def __add__(self, other):
        _check_same_grid(self, other)
        return HalfSpectrum(self.coeffs + other.coeffs, self.grid)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return HalfSpectrum(self.coeffs - other.coeffs, self.grid)

    def __mul__(self, scalar):
        return HalfSpectrum(self.coeffs * scalar, self.grid)

    __rmul__ = __mul__


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise DimensionError("spectra live on different frequency grids")


def _interior(n_fft):
    # Doubled bins: everything except DC and (even length) Nyquist.
    stop = n_fft // 2 if n_fft % 2 == 0 else n_fft // 2 + 1
    return slice(1, stop)


def forward(x, axis=0):
    """Array-level analytic transform along ``axis`` (no validation)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[axis]
    spec = np.fft.rfft(x, axis=axis)
    index = [slice(None)] * spec.ndim
    index[axis] = _interior(n)
    spec[tuple(index)] *= 2.0
    return spec


def inverse(spec, n, axis=0):
    """Array-level inverse of :func:`forward` for real length-``n`` output."""
    spec = np.array(spec, dtype=complex, copy=True)
    if spec.shape[axis] != n // 2 + 1:
        raise DimensionError(f"{spec.shape[axis]} bins cannot come from a length-{n} signal")
    index = [slice(None)] * spec.ndim
    index[axis] = _interior(n)
    spec[tuple(index)] *= 0.5
    return np.fft.irfft(spec, n=n, axis=axis)


def analytic_spectrum(x):
    """Half spectrum of a real signal with analytic-signal bin weighting.

    Examples
    --------
    >>> t = np.arange(256)
    >>> s = analytic_spectrum(np.cos(2 * np.pi * 32 * t / 256))
    >>> int(np.argmax(np.abs(s.coeffs)))
    32
    """
    x = check_vector(x)
    return HalfSpectrum(forward(x), FrequencyGrid(x.size))


def real_signal(s, T):
    """Time-domain signal of length ``T`` from a half spectrum."""
    if s.grid.n_fft != T or s.coeffs.shape[0] != T // 2 + 1:
        raise DimensionError(
            f"spectrum with {s.coeffs.shape[0]} bins (n_fft={s.grid.n_fft}) "
            f"does not match signal length {T}"
        )
    return inverse(s.coeffs, T)


def hermitian_full(spec, n):
    """Full length-``n`` DFT corresponding to a half spectrum (first axis)."""
    half = np.array(spec, dtype=complex, copy=True)
    half[_interior(n)] *= 0.5
    full = np.zeros((n,) + half.shape[1:], dtype=complex)
    full[: half.shape[0]] = half
    neg = np.arange(1, (n + 1) // 2)
    full[n - neg] = np.conj(half[neg])
    return full


def mirror_extend(x, axis=0):
    """Reflect-pad to twice the length, ``T // 2`` samples before and the rest after.

    >>> mirror_extend(np.array([1, 2, 3, 4])).tolist()
    [2, 1, 1, 2, 3, 4, 4, 3]
    """
    x = np.asarray(x)
    T = x.shape[axis]
    if T < 2:
        raise InvalidInput(f"need at least 2 samples to mirror, got {T}")
    head = np.flip(np.take(x, np.arange(T // 2), axis=axis), axis=axis)
    tail = np.flip(np.take(x, np.arange(T // 2, T), axis=axis), axis=axis)
    return np.concatenate([head, x, tail], axis=axis)


def crop(x_ext, axis=0):
    """Undo :func:`mirror_extend`."""
    x_ext = np.asarray(x_ext)
    n = x_ext.shape[axis]
    if n % 2:
        raise DimensionError(f"mirrored signals have even length, got {n}")
    T = n // 2
    return np.take(x_ext, np.arange(T // 2, T // 2 + T), axis=axis)
