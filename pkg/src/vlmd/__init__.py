"""Latent mode decomposition of multichannel signals."""
__version__ = "0.1.0"

from .analysis import Dendrogram, cluster_coefficients, cluster_modes  # noqa: E402
from .core import DecompositionResult, VlmdConfig, vlmd_decompose  # noqa: E402
from .estimators import MVMD, VLMD  # noqa: E402
from .exceptions import (  # noqa: E402
    ConfigError,
    DegenerateModeWarning,
    DimensionError,
    ExplicitEmptyOutput,
    InvalidInput,
    SpecError,
    UnderdeterminedWarning,
    VlmdError,
)
from .metrics import freq_mape, hungarian_match, im_correlation_error  # noqa: E402
from .mvmd import MvmdConfig, MvmdResult, mvmd_decompose  # noqa: E402
from .synth import SynthSpec, generate, scenario  # noqa: E402

__all__ = [
    "VLMD", "MVMD", "VlmdConfig", "MvmdConfig", "DecompositionResult", "MvmdResult",
    "vlmd_decompose", "mvmd_decompose", "SynthSpec", "generate", "scenario",
    "hungarian_match", "im_correlation_error", "freq_mape",
    "Dendrogram", "cluster_coefficients", "cluster_modes",
    "VlmdError", "InvalidInput", "DimensionError", "ConfigError", "SpecError",
    "ExplicitEmptyOutput", "DegenerateModeWarning", "UnderdeterminedWarning",
]
