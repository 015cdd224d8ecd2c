"""scikit-learn style wrappers around the two solvers."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import VlmdConfig, vlmd_decompose
from .exceptions import DimensionError
from .mvmd import MvmdConfig, mvmd_decompose


def _check_X(X):
    return check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_all_finite=True)


class _ModeDecomposer(TransformerMixin, BaseEstimator):
    """Shared fit/transform plumbing. ``X`` is (T, C): rows are time samples."""

    def _check_new(self, X):
        check_is_fitted(self, "central_freqs_")
        X = _check_X(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(
                f"X has {X.shape[1]} channels, estimator was fitted on {self.n_features_in_}"
            )
        return X

    def _store(self, result, n_features):
        self.n_features_in_ = n_features
        self.central_freqs_ = result.central_freqs.copy()
        self.central_freqs_hz_ = result.central_freqs_hz.copy()
        self.freq_trace_ = result.freq_trace.copy()
        self.n_iter_ = result.n_iterations
        self.converged_ = result.converged
        self.result_ = result

    def fit_transform(self, X, y=None):
        return self.fit(X).result_.intrinsic_modes

    def inverse_transform(self, U):
        """Sum of modes, (K, C, T) -> (T, C)."""
        U = np.asarray(U, dtype=float)
        if U.ndim != 3:
            raise DimensionError(f"expected modes of shape (K, C, T), got {U.shape}")
        return U.sum(axis=0).T


class VLMD(_ModeDecomposer):
    """Variational latent mode decomposition.

    Factorizes a multichannel signal into ``n_latents`` latent components
    mixed by a sparse coefficient matrix, each latent component split into
    ``n_modes`` narrow-band modes whose central frequencies are shared.

    Parameters
    ----------
    n_latents : int
        Number of latent components L, at most the number of channels.
    n_modes : int
        Number of modes K.
    alpha : float
        Bandwidth penalty. The mode filters have sharpness ``4 alpha / rho``.
    rho : float
        Weight of the latent-mode fit relative to the data fit.
    lam : float
        L1 penalty on the coefficient matrix.
    tau : float
        Dual step in [0, 1].
    tol : float
        Stop when the squared central-frequency change is at most ``tol``.
    max_iter : int
    init_freqs : {"zeros", "uniform"} or sequence of float
        Initial central frequencies in cycles/sample.
    mirror : bool
        Mirror-extend the signal before transforming to limit edge effects.
    sample_rate : float
        Used only to report frequencies in Hz.

    Attributes
    ----------
    coef_ : ndarray of shape (n_latents, n_channels)
    central_freqs_ : ndarray of shape (n_modes,)
        Cycles per sample, sorted as the solver left them.
    central_freqs_hz_ : ndarray of shape (n_modes,)
    latent_components_ : ndarray of shape (n_samples, n_latents)
    latent_modes_ : ndarray of shape (n_modes, n_latents, n_samples)
    n_iter_ : int
    converged_ : bool

    Examples
    --------
    >>> import numpy as np
    >>> t = np.arange(512)
    >>> X = np.outer(np.cos(2 * np.pi * 0.1 * t), [1.0, 0.5, -0.3])
    >>> est = VLMD(n_latents=1, n_modes=1).fit(X)
    >>> round(float(est.central_freqs_[0]), 3)
    0.1
    """

    def __init__(self, n_latents=1, n_modes=3, alpha=1000.0, rho=0.6, lam=0.04, tau=0.9,
                 tol=1e-7, max_iter=500, init_freqs="zeros", mirror=True, sample_rate=1.0):
        self.n_latents = n_latents
        self.n_modes = n_modes
        self.alpha = alpha
        self.rho = rho
        self.lam = lam
        self.tau = tau
        self.tol = tol
        self.max_iter = max_iter
        self.init_freqs = init_freqs
        self.mirror = mirror
        self.sample_rate = sample_rate

    def _config(self, **overrides):
        params = dict(n_latents=self.n_latents, n_modes=self.n_modes, alpha=self.alpha,
                      rho=self.rho, lam=self.lam, tau=self.tau, tol=self.tol,
                      max_iter=self.max_iter, init_freqs=self.init_freqs, mirror=self.mirror)
        params.update(overrides)
        return VlmdConfig(**params)

    def fit(self, X, y=None):
        X = _check_X(X)
        result = vlmd_decompose(X, self._config(), sample_rate_hz=self.sample_rate)
        self._store(result, X.shape[1])
        self.coef_ = result.coefficients.copy()
        self.latent_components_ = result.latent_components
        self.latent_modes_ = result.latent_modes
        return self

    def transform(self, X):
        """Modes of new data on the fitted coefficients, shape (K, C, T).

        The coefficient matrix is held fixed and the fitted central
        frequencies seed the mode search.
        """
        X = self._check_new(X)
        config = self._config(freeze_A=True, init_freqs=list(self.central_freqs_))
        return vlmd_decompose(X, config, sample_rate_hz=self.sample_rate,
                              init_coef=self.coef_).intrinsic_modes


class MVMD(_ModeDecomposer):
    """Multivariate variational mode decomposition on the raw channels.

    Parameters
    ----------
    n_modes : int
    alpha : float
        Bandwidth penalty; filter sharpness is ``2 alpha``.
    tau : float
        Dual step. Zero gives the usual noise-tolerant variant.
    tol, max_iter, init_freqs, mirror, sample_rate
        As in :class:`VLMD`.
    """

    def __init__(self, n_modes=3, alpha=1000.0, tau=0.0, tol=1e-7, max_iter=500,
                 init_freqs="zeros", mirror=True, sample_rate=1.0):
        self.n_modes = n_modes
        self.alpha = alpha
        self.tau = tau
        self.tol = tol
        self.max_iter = max_iter
        self.init_freqs = init_freqs
        self.mirror = mirror
        self.sample_rate = sample_rate

    def _config(self, **overrides):
        params = dict(n_modes=self.n_modes, alpha=self.alpha, tau=self.tau, tol=self.tol,
                      max_iter=self.max_iter, init_freqs=self.init_freqs, mirror=self.mirror)
        params.update(overrides)
        return MvmdConfig(**params)

    def fit(self, X, y=None):
        X = _check_X(X)
        self._store(mvmd_decompose(X, self._config(), sample_rate_hz=self.sample_rate), X.shape[1])
        return self

    def transform(self, X):
        """Modes of new data, searched from the fitted central frequencies."""
        X = self._check_new(X)
        config = self._config(init_freqs=list(self.central_freqs_))
        return mvmd_decompose(X, config, sample_rate_hz=self.sample_rate).modes
