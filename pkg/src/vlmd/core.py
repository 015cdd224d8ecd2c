"""Variational latent mode decomposition solver.

The data ``X`` (T x C) is modelled as ``Z A`` where the L latent components
in ``Z`` are each a sum of K narrow-band latent modes sharing the central
frequencies ``omega``. Every outer iteration runs, in order:

1. sparse coding of ``X`` against the time-domain ``Z`` followed by column
   rescaling of ``A``;
2. a Gauss-Seidel sweep over the latent components;
3. for each mode k, a sweep of the latent-mode Wiener filters followed by
   the spectral-centroid update of ``omega[k]``;
4. dual ascent on the constraint ``z_l = sum_k theta_l^(k)``.

Iteration stops once the squared central-frequency drift drops to ``tol``.
All spectral quantities are one-sided analytic spectra of the (optionally
mirror-extended) signals; see :mod:`vlmd.spectral`.
"""

import logging
import time
import warnings
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence, Union

import numpy as np

from . import spectral
from .exceptions import ConfigError, DegenerateModeWarning
from .sparse import lasso_solve, rescale_columns
from .validation import (
    check_count,
    check_positive,
    check_signal_matrix,
    resolve_init_freqs,
)

logger = logging.getLogger(__name__)

ENERGY_FLOOR = 1e-30


@dataclass
class VlmdConfig:
    n_latents: int
    n_modes: int
    alpha: float = 1000.0
    rho: float = 0.6
    lam: float = 0.04
    tau: float = 0.9
    tol: float = 1e-7
    max_iter: int = 500
    init_freqs: Union[str, Sequence[float]] = "zeros"
    freeze_A: bool = False
    mirror: bool = True
    lasso_tol: float = 1e-6
    lasso_max_iter: int = 1000

    def __post_init__(self):
        self.n_latents = check_count(self.n_latents, "n_latents")
        self.n_modes = check_count(self.n_modes, "n_modes")
        self.alpha = check_positive(self.alpha, "alpha", allow_zero=True)
        self.rho = check_positive(self.rho, "rho")
        self.lam = check_positive(self.lam, "lam", allow_zero=True)
        self.tau = check_positive(self.tau, "tau", allow_zero=True)
        if self.tau > 1:
            raise ConfigError(f"tau must lie in [0, 1], got {self.tau}")
        self.tol = check_positive(self.tol, "tol")
        self.max_iter = check_count(self.max_iter, "max_iter")
        self.lasso_tol = check_positive(self.lasso_tol, "lasso_tol")
        self.lasso_max_iter = check_count(self.lasso_max_iter, "lasso_max_iter")
        # validates explicit lists early; the length check needs n_modes only
        resolve_init_freqs(self.init_freqs, self.n_modes)

    def as_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        if not isinstance(out["init_freqs"], str):
            out["init_freqs"] = [float(w) for w in out["init_freqs"]]
        return out


@dataclass
class VlmdState:
    """Full iterate set. Spectra are stored bins-first.

    ``Z_hat`` is (B, L), ``Theta_hat`` is (K, B, L), ``Gamma_hat`` is (B, L)
    and ``A`` is (L, C), where B is the number of frequency bins.
    """

    Z_hat: np.ndarray
    A: np.ndarray
    Theta_hat: np.ndarray
    omega: np.ndarray
    Gamma_hat: np.ndarray
    grid: spectral.FrequencyGrid
    iteration: int = 0


@dataclass
class DecompositionResult:
    latent_components: np.ndarray  # (T, L)
    coefficients: np.ndarray  # (L, C)
    latent_modes: np.ndarray  # (K, L, T)
    central_freqs: np.ndarray  # (K,) cycles/sample
    sample_rate_hz: float
    intrinsic_modes: np.ndarray  # (K, C, T)
    freq_trace: np.ndarray  # (n_iterations, K) cycles/sample
    n_iterations: int
    converged: bool
    wall_time_s: float = 0.0
    degenerate_modes: list = field(default_factory=list)
    primal_residual: float = 0.0

    @property
    def central_freqs_hz(self):
        return self.central_freqs * self.sample_rate_hz

    @property
    def freq_trace_hz(self):
        return self.freq_trace * self.sample_rate_hz

    def reconstruction(self):
        """Sum of the intrinsic modes, shape (T, C)."""
        return self.intrinsic_modes.sum(axis=0).T


def update_latent_component(residual_hat, a_l, theta_hat_l, gamma_hat_l, rho):
    """Closed-form minimizer for one latent component spectrum.

    Parameters
    ----------
    residual_hat : ndarray (B, C)
        Channel spectra minus the contribution of every *other* latent.
    a_l : ndarray (C,)
        Row ``l`` of the coefficient matrix.
    theta_hat_l : ndarray (K, B)
        Current latent-mode spectra of component ``l``.
    gamma_hat_l : ndarray (B,)
    rho : float
    """
    a_l = np.asarray(a_l, dtype=float)
    num = (2.0 / rho) * (np.asarray(residual_hat) @ a_l) + np.sum(theta_hat_l, axis=0) - gamma_hat_l
    return num / (1.0 + (2.0 / rho) * float(a_l @ a_l))


def mode_filter(freqs, omega_k, alpha, rho):
    return 1.0 + (4.0 * alpha / rho) * (freqs - omega_k) ** 2


def update_latent_mode(z_hat_l, theta_hat_l, k, gamma_hat_l, omega_k, alpha, rho, freqs):
    """Wiener-filter update of latent mode ``k`` of one component.

    ``theta_hat_l`` holds all K mode spectra of the component, (K, B); the
    entry at ``k`` is excluded from the residual.
    """
    theta_hat_l = np.asarray(theta_hat_l)
    others = np.sum(theta_hat_l, axis=0) - theta_hat_l[k]
    return (z_hat_l - others + gamma_hat_l) / mode_filter(freqs, omega_k, alpha, rho)


def _centroid(theta_hat_k, freqs):
    power = np.abs(theta_hat_k) ** 2
    if power.ndim == 1:
        power = power[:, None]
    total = power.sum()
    if not np.isfinite(total) or total < ENERGY_FLOOR:
        return None
    return float(np.sum(freqs[:, None] * power) / total)


def update_central_frequency(theta_hat_k, freqs, previous=0.0):
    """Energy-weighted mean frequency of mode ``k`` over all latents.

    ``theta_hat_k`` is (B,) or (B, L). When the mode has no energy the
    previous value is returned and a :class:`DegenerateModeWarning` issued.
    """
    omega = _centroid(theta_hat_k, np.asarray(freqs))
    if omega is None:
        warnings.warn("mode has no energy; keeping previous central frequency",
                      DegenerateModeWarning, stacklevel=2)
        return float(previous)
    return omega


def update_duals(gamma_hat, z_hat, theta_hat, tau):
    """``gamma_l += tau * (z_l - sum_k theta_l^(k))`` for all l.

    Shapes: ``gamma_hat`` and ``z_hat`` (B, L), ``theta_hat`` (K, B, L).
    """
    return gamma_hat + tau * (z_hat - np.sum(theta_hat, axis=0))


def _prepare(X, config, mirror):
    T = X.shape[0]
    X_ext = spectral.mirror_extend(X, axis=0) if mirror else X
    grid = spectral.FrequencyGrid(X_ext.shape[0])
    return T, X_ext, grid


def initialize_state(X, config, init_coef=None):
    """Starting iterate: ``A = delta_ij``, ``z_l = x_l``, zero modes and duals."""
    X = check_signal_matrix(X)
    T, C = X.shape
    L, K = config.n_latents, config.n_modes
    if L > C:
        raise ConfigError(f"n_latents={L} exceeds the number of channels C={C}")
    _, X_ext, grid = _prepare(X, config, config.mirror)
    X_hat = spectral.forward(X_ext, axis=0)
    if init_coef is None:
        A = np.eye(L, C)
    else:
        A = np.array(init_coef, dtype=float, copy=True)
        if A.shape != (L, C):
            raise ConfigError(f"init_coef has shape {A.shape}, expected {(L, C)}")
    B = grid.n_bins
    return VlmdState(
        Z_hat=X_hat[:, :L].copy(),
        A=A,
        Theta_hat=np.zeros((K, B, L), dtype=complex),
        omega=resolve_init_freqs(config.init_freqs, K),
        Gamma_hat=np.zeros((B, L), dtype=complex),
        grid=grid,
    )


def _time_domain(spec, n_fft, mirror, axis=0):
    out = spectral.inverse(spec, n_fft, axis=axis)
    return spectral.crop(out, axis=axis) if mirror else out


def vlmd_decompose(X, config, sample_rate_hz=1.0, init_coef=None, callback=None):
    """Run the solver on ``X`` (T x C).

    Parameters
    ----------
    X : array_like of shape (T, C)
    config : VlmdConfig
    sample_rate_hz : float
        Only used to express the reported frequencies in Hz.
    init_coef : ndarray of shape (L, C), optional
        Starting coefficient matrix instead of ``delta_ij``. Combined with
        ``config.freeze_A`` this decomposes new data on a fixed connectivity.
    callback : callable, optional
        Called as ``callback(state)`` after every iteration.

    Returns
    -------
    DecompositionResult
    """
    start = time.perf_counter()
    X = check_signal_matrix(X)
    sample_rate_hz = check_positive(sample_rate_hz, "sample_rate_hz")
    T, C = X.shape
    L, K = config.n_latents, config.n_modes
    if T < 2 * K:
        raise ConfigError(f"need T >= 2K samples, got T={T}, K={K}")

    state = initialize_state(X, config, init_coef=init_coef)
    _, X_ext, grid = _prepare(X, config, config.mirror)
    n_fft = grid.n_fft
    freqs = grid.normalized_freqs
    X_hat = spectral.forward(X_ext, axis=0)

    Z_hat, A, Theta_hat, Gamma_hat = state.Z_hat, state.A, state.Theta_hat, state.Gamma_hat
    omega = state.omega
    alpha, rho, tau = config.alpha, config.rho, config.tau
    fit_A = not config.freeze_A and np.any(X != 0)
    x_norm = float(np.linalg.norm(X, axis=0).max())

    theta_sum = Theta_hat.sum(axis=0)
    trace = []
    degenerate = set()
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        # sparse coding on the time-domain latent components
        if fit_A:
            Z_time = _time_domain(Z_hat, n_fft, config.mirror)
            # KKT residual is bounded by 2 |z_l| |x_c|; make tolerance relative to it
            scale = max(1.0, 2.0 * x_norm * float(np.linalg.norm(Z_time, axis=0).max()))
            A = lasso_solve(X, Z_time, config.lam, warm_start=A,
                            tol=config.lasso_tol * scale, max_iter=config.lasso_max_iter)
            A = rescale_columns(A)

        # latent components, Gauss-Seidel over l
        P = X_hat @ A.T
        G = A @ A.T
        for l in range(L):
            cross = Z_hat @ G[:, l] - Z_hat[:, l] * G[l, l]
            num = (2.0 / rho) * (P[:, l] - cross) + theta_sum[:, l] - Gamma_hat[:, l]
            Z_hat[:, l] = num / (1.0 + (2.0 / rho) * G[l, l])

        # latent modes and central frequencies, Gauss-Seidel over k
        previous = omega.copy()
        for k in range(K):
            others = theta_sum - Theta_hat[k]
            new = (Z_hat - others + Gamma_hat) / mode_filter(freqs, omega[k], alpha, rho)[:, None]
            Theta_hat[k] = new
            theta_sum = others + new
            w = _centroid(new, freqs)
            if w is None:
                degenerate.add(k)
            else:
                omega[k] = w

        Gamma_hat += tau * (Z_hat - theta_sum)

        trace.append(omega.copy())
        state.A, state.omega, state.iteration = A, omega, it
        if callback is not None:
            callback(state)
        dif = float(np.sum((omega - previous) ** 2))
        if dif <= config.tol:
            converged = True
            break

    Z = _time_domain(Z_hat, n_fft, config.mirror)
    Theta = _time_domain(Theta_hat, n_fft, config.mirror, axis=1)  # (K, T, L)
    latent_modes = np.transpose(Theta, (0, 2, 1))
    intrinsic = np.einsum("lc,klt->kct", A, latent_modes)
    primal = float(np.sum(np.abs(Z_hat - theta_sum) ** 2 * grid.weights[:, None]))
    if degenerate:
        logger.info("degenerate modes (kept previous frequency): %s", sorted(degenerate))

    return DecompositionResult(
        latent_components=Z,
        coefficients=A.copy(),
        latent_modes=latent_modes,
        central_freqs=omega.copy(),
        sample_rate_hz=sample_rate_hz,
        intrinsic_modes=intrinsic,
        freq_trace=np.array(trace).reshape(-1, K),
        n_iterations=it,
        converged=converged,
        wall_time_s=time.perf_counter() - start,
        degenerate_modes=sorted(degenerate),
        primal_residual=primal,
    )
