"""Synthetic multichannel AM-FM data with known latent structure.

Each latent mode is ``alpha_l^k(t) * cos(phi^k(t))`` with

    alpha_l^k(t) = 1 + d sin(2 pi r t + p),   d ~ U(0, depth_max / 2), r ~ U(0, rate_max)
    phi^k(t)     = 2 pi f_k t + (dev / r_fm) sin(2 pi r_fm t) + p_k

where the FM term is present only when ``fm_params`` is given
(``dev ~ U(0, deviation_max)``, ``r_fm ~ U(0, rate_max)``). The phase is
shared by all latents of a mode. Channels mix the latents through a sparse
``A`` with entries ``U(-1, 1)``, and white Gaussian noise is added last.

The three preset scenarios default to 256 Hz sampling for 8 s (T = 2048).
"""

from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .exceptions import SpecError

SCENARIOS = {
    "A": dict(n_channels=5, n_latents=3, sparsity=0.6, n_modes=5,
              freqs_hz=(5.0, 17.0, 50.0, 73.0, 110.0), am_params=(2.0, 2.0), fm_params=None),
    "B": dict(n_channels=5, n_latents=3, sparsity=0.6, n_modes=5,
              freqs_hz=(7.0, 12.0, 61.0, 73.0, 79.0), am_params=(2.0, 2.0), fm_params=(1.0, 3.0)),
    "C": dict(n_channels=100, n_latents=35, sparsity=0.6, n_modes=5,
              freqs_hz=(7.0, 12.0, 61.0, 73.0, 79.0), am_params=(2.0, 2.0), fm_params=(1.0, 3.0)),
}

NOISE_GRID = (0.01, 0.1, 1.0, 10.0)


@dataclass(frozen=True)
class SynthSpec:
    n_channels: int
    n_latents: int
    sparsity: float
    n_modes: int
    freqs_hz: Tuple[float, ...]
    sample_rate_hz: float = 256.0
    duration_s: float = 8.0
    am_params: Tuple[float, float] = (2.0, 2.0)
    fm_params: Optional[Tuple[float, float]] = None
    noise_sigma: float = 0.0
    seed: int = 0
    noise_seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "freqs_hz", tuple(float(f) for f in self.freqs_hz))
        object.__setattr__(self, "am_params", tuple(float(v) for v in self.am_params))
        if self.fm_params is not None:
            object.__setattr__(self, "fm_params", tuple(float(v) for v in self.fm_params))
        self.validate()

    @property
    def n_samples(self):
        return int(round(self.duration_s * self.sample_rate_hz))

    def validate(self):
        if self.n_channels < 1 or self.n_latents < 1 or self.n_modes < 1:
            raise SpecError("channel, latent and mode counts must be positive")
        if self.n_latents > self.n_channels:
            raise SpecError(f"n_latents={self.n_latents} exceeds n_channels={self.n_channels}")
        if not 0.0 <= self.sparsity <= 1.0:
            raise SpecError(f"sparsity must lie in [0, 1], got {self.sparsity}")
        if self.noise_sigma < 0 or not np.isfinite(self.noise_sigma):
            raise SpecError(f"noise_sigma must be finite and >= 0, got {self.noise_sigma}")
        if self.sample_rate_hz <= 0 or self.duration_s <= 0 or self.n_samples < 2:
            raise SpecError("sample rate and duration must give at least 2 samples")
        if len(self.freqs_hz) != self.n_modes:
            raise SpecError(f"{len(self.freqs_hz)} frequencies given for {self.n_modes} modes")
        if len(set(self.freqs_hz)) != len(self.freqs_hz):
            raise SpecError("mode frequencies must be distinct")
        nyquist = self.sample_rate_hz / 2
        if any(f <= 0 or f >= nyquist for f in self.freqs_hz):
            raise SpecError(f"mode frequencies must lie in (0, {nyquist}) Hz")
        depth, rate = self.am_params
        if depth < 0 or rate < 0:
            raise SpecError("AM depth and rate must be >= 0")
        if self.fm_params is not None:
            dev, fm_rate = self.fm_params
            if dev < 0 or fm_rate < 0:
                raise SpecError("FM deviation and rate must be >= 0")
            lo, hi = min(self.freqs_hz) - dev, max(self.freqs_hz) + dev
            if lo <= 0 or hi >= nyquist:
                raise SpecError(
                    f"FM deviation {dev} Hz moves instantaneous frequency to "
                    f"[{lo}, {hi}] Hz, outside (0, {nyquist})"
                )

    def to_dict(self):
        return asdict(self)


@dataclass
class GroundTruth:
    A_true: np.ndarray  # (L, C)
    latent_modes_true: np.ndarray  # (K, L, T)
    intrinsic_modes_true: np.ndarray  # (K, C, T)
    freqs_hz: np.ndarray
    clean_X: np.ndarray  # (T, C)
    params: dict = field(default_factory=dict)


def scenario(name, **overrides):
    """Preset :class:`SynthSpec` for scenario ``"A"``, ``"B"`` or ``"C"``."""
    try:
        base = dict(SCENARIOS[name.upper()])
    except KeyError:
        raise SpecError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    base.update(overrides)
    return SynthSpec(**base)


def _draw_coefficients(rng, L, C, sparsity):
    A = np.where(rng.random((L, C)) < sparsity, 0.0, rng.uniform(-1.0, 1.0, (L, C)))
    for c in range(C):
        while not np.any(A[:, c]):
            A[:, c] = np.where(rng.random(L) < sparsity, 0.0, rng.uniform(-1.0, 1.0, L))
    return A


def generate(spec):
    """Return ``(X, truth)`` with ``X`` of shape (T, C). Deterministic per seed."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    L, C, K, T = spec.n_latents, spec.n_channels, spec.n_modes, spec.n_samples
    t = np.arange(T) / spec.sample_rate_hz
    freqs = np.asarray(spec.freqs_hz)

    depth_max, am_rate_max = spec.am_params
    am_depth = rng.uniform(0.0, depth_max / 2.0, (K, L))
    am_rate = rng.uniform(0.0, am_rate_max, (K, L))
    am_phase = rng.uniform(0.0, 2 * np.pi, (K, L))
    phase0 = rng.uniform(0.0, 2 * np.pi, K)
    if spec.fm_params is not None:
        dev_max, fm_rate_max = spec.fm_params
        fm_dev = rng.uniform(0.0, dev_max, K)
        fm_rate = rng.uniform(0.0, fm_rate_max, K)
    else:
        fm_dev = np.zeros(K)
        fm_rate = np.zeros(K)
    A = _draw_coefficients(rng, L, C, spec.sparsity)

    latent = np.empty((K, L, T))
    for k in range(K):
        # (dev / r) sin(2 pi r t) written through sinc so r -> 0 stays finite
        fm = 2 * np.pi * fm_dev[k] * t * np.sinc(2 * fm_rate[k] * t)
        phase = 2 * np.pi * freqs[k] * t + fm + phase0[k]
        envelope = 1.0 + am_depth[k][:, None] * np.sin(
            2 * np.pi * am_rate[k][:, None] * t + am_phase[k][:, None]
        )
        latent[k] = envelope * np.cos(phase)

    intrinsic = np.einsum("lc,klt->kct", A, latent)
    clean = intrinsic.sum(axis=0).T
    noise_rng = np.random.default_rng(
        [spec.seed, 1] if spec.noise_seed is None else [spec.seed, 2, spec.noise_seed]
    )
    X = clean + spec.noise_sigma * noise_rng.standard_normal(clean.shape)

    truth = GroundTruth(
        A_true=A,
        latent_modes_true=latent,
        intrinsic_modes_true=intrinsic,
        freqs_hz=freqs.copy(),
        clean_X=clean,
        params=dict(am_depth=am_depth, am_rate=am_rate, am_phase=am_phase,
                    phase0=phase0, fm_dev=fm_dev, fm_rate=fm_rate),
    )
    return X, truth


def instantaneous_frequency_range(spec, truth):
    """Analytic (min, max) instantaneous frequency in Hz over all modes."""
    dev = truth.params["fm_dev"]
    return float(np.min(truth.freqs_hz - dev)), float(np.max(truth.freqs_hz + dev))


def with_noise(spec, noise_sigma, noise_seed=None):
    return replace(spec, noise_sigma=noise_sigma, noise_seed=noise_seed)
