"""Outer alternation between the sequence (ADMM) and filter updates."""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .admm_x import AdmmConfig, AdmmState, FilterQuadratic, solve_x_subproblem
from .exceptions import DesignError, SolverError
from .filter_opt import update_filter
from .waveform import FrequencySymbols, MismatchFilter, SpectralMask, TimeSequence, isl, papr, pslr

__all__ = ["AltOptConfig", "OuterTraceRow", "RunResult", "initialize", "run"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AltOptConfig:
    """Configuration of a joint design run.

    ``avg_power`` defaults to the power every admissible sequence has under
    ``mask`` (``|available| / N^2``). ``early_exit_tol`` enables stopping
    once the relative PSLR change over the last 10 outer iterations falls
    below it; by default all ``outer_iters`` iterations run.
    """

    mask: SpectralMask
    papr_level: float
    outer_iters: int = 2000
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    seed: int = 0
    avg_power: float = None
    early_exit_tol: float = None
    keep_inner_traces: bool = False

    def __post_init__(self):
        if self.outer_iters < 1:
            raise ValueError("outer_iters must be >= 1")
        if self.papr_level < 1.0:
            raise ValueError("papr_level must be >= 1")
        if self.avg_power is None:
            object.__setattr__(self, "avg_power", self.mask.avg_power)

    @property
    def admm_config(self):
        return replace(self.admm, papr_level=self.papr_level, avg_power=self.avg_power)


@dataclass(frozen=True)
class OuterTraceRow:
    iteration: int
    pslr: float
    isl: float
    papr: float
    primal_residual: float
    pslr_before_filter: float = float("nan")
    inner_iterations: int = 0


@dataclass
class RunResult:
    symbols: FrequencySymbols
    x: TimeSequence
    h: MismatchFilter
    y: np.ndarray
    initial: OuterTraceRow
    outer_trace: list
    inner_traces: list = None
    termination: str = "max_iters"


def _safe_pslr(x, h):
    try:
        return pslr(x, h)
    except ZeroDivisionError:
        return float("inf")


def initialize(cfg):
    """Random-phase symbols from ``cfg.seed``, ``y = x``, ``u = 0``, matched filter."""
    rng = np.random.default_rng(cfg.seed)
    symbols = FrequencySymbols.random(cfg.mask, rng)
    state = AdmmState.from_symbols(symbols, rho0=cfg.admm.rho0)
    h = MismatchFilter(state.x / np.linalg.norm(state.x))
    return state, h


def _plateaued(trace, tol, window=10):
    if tol is None or len(trace) <= window:
        return False
    old = trace[-window - 1].pslr
    new = trace[-1].pslr
    return abs(new - old) <= tol * abs(new)


def run(cfg):
    """Alternate the sequence and filter updates for ``cfg.outer_iters`` rounds.

    Each round warm-starts ADMM from the previous ``(x, y, u)``, then replaces
    the filter by the exact PSLR maximizer for the new sequence. The trace
    row of round ``m`` holds the metrics of ``(x_m, h_{m+1})`` together with
    the PSLR the old filter achieved on ``x_m``.
    """
    admm_cfg = cfg.admm_config
    admm_cfg.validate()
    state, h = initialize(cfg)
    x0 = state.x
    initial = OuterTraceRow(0, _safe_pslr(x0, h), isl(x0, h), papr(x0), 0.0, _safe_pslr(x0, h))

    trace = []
    inner = [] if cfg.keep_inner_traces else None
    termination = "max_iters"
    for m in range(1, cfg.outer_iters + 1):
        try:
            sub = solve_x_subproblem(state, h, admm_cfg, FilterQuadratic(h))
            state = sub.state
            before = _safe_pslr(state.x, h)
            h = update_filter(state.x)
        except DesignError as exc:
            raise SolverError(f"outer iteration {m}: {exc}") from exc
        after = _safe_pslr(state.x, h)
        if after < before - 1e-9:
            log.warning("filter update lowered PSLR at iteration %d: %g -> %g", m, before, after)
        resid = float(np.max(np.abs(state.x - state.y)))
        trace.append(
            OuterTraceRow(m, after, isl(state.x, h), papr(state.x), resid, before, len(sub.trace))
        )
        if inner is not None:
            inner.append(sub.trace)
        if _plateaued(trace, cfg.early_exit_tol):
            termination = "plateau"
            break

    return RunResult(
        symbols=state.symbols,
        x=TimeSequence(state.x),
        h=h,
        y=state.y,
        initial=initial,
        outer_trace=trace,
        inner_traces=inner,
        termination=termination,
    )
