"""Joint design of spectrally constrained OFDM sequences and a mismatch filter."""

from .admm_x import AdmmConfig, AdmmState, solve_x_subproblem
from .altopt import AltOptConfig, RunResult, initialize, run
from .filter_opt import update_filter
from .waveform import (
    CorrelationProfile,
    FrequencySymbols,
    MismatchFilter,
    SpectralMask,
    TimeSequence,
    cross_correlation,
    filter_gram,
    isl,
    papr,
    pslr,
    sidelobe_apply,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "AltOptConfig",
    "CorrelationProfile",
    "FrequencySymbols",
    "MismatchFilter",
    "RunResult",
    "SpectralMask",
    "TimeSequence",
    "cross_correlation",
    "filter_gram",
    "initialize",
    "isl",
    "papr",
    "pslr",
    "run",
    "sidelobe_apply",
    "solve_x_subproblem",
    "synthesize",
    "update_filter",
]
