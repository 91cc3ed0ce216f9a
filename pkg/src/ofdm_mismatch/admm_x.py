"""Sequence update for a fixed mismatch filter, via scaled-form ADMM.

The splitting ``y = x`` moves the PAPR constraint onto ``y`` while ``x`` keeps
the spectral structure ``x = F_I s``. One ADMM iteration runs

1. cyclic closed-form phase updates of the free symbols (``x`` step),
2. an unconstrained ``y`` minimization that only involves the coordinate of
   ``y`` along ``h``, followed by per-sample magnitude clipping,
3. the scaled dual ascent ``u += x - y``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .exceptions import DegenerateDenominatorError, SolverError
from .numerics import apply_completion, apply_completion_adjoint, idft, real_quartic_roots
from .waveform import FrequencySymbols, filter_gram, isl, synthesize

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "AdmmTraceRow",
    "XSubproblemResult",
    "FilterQuadratic",
    "augmented_lagrangian",
    "bcd_coefficient",
    "bcd_update_symbol",
    "x_update",
    "scalar_objective",
    "stationarity_residual",
    "solve_first_coordinate",
    "y_unconstrained",
    "y_update",
    "u_update",
    "solve_x_subproblem",
]


@dataclass(frozen=True)
class AdmmConfig:
    """Knobs of the inner solver.

    ``papr_level`` (rho) and ``avg_power`` (P) define the clipping level
    ``rho * P``; both must be set before :func:`solve_x_subproblem` runs.
    """

    papr_level: float = None
    avg_power: float = None
    rho0: float = 10.0
    max_iters: int = 100
    bcd_sweeps: int = 1
    primal_tol: float = 1e-4

    def validate(self):
        if self.papr_level is None or self.avg_power is None:
            raise ValueError("papr_level and avg_power must be set")
        if self.papr_level < 1.0:
            raise ValueError(f"papr_level must be >= 1, got {self.papr_level}")
        if not self.avg_power > 0:
            raise ValueError("avg_power must be positive")
        if not self.rho0 > 0:
            raise ValueError("rho0 must be positive")
        if self.max_iters < 1 or self.bcd_sweeps < 1:
            raise ValueError("max_iters and bcd_sweeps must be >= 1")
        if not self.primal_tol > 0:
            raise ValueError("primal_tol must be positive")


@dataclass(frozen=True)
class AdmmState:
    """ADMM iterate. ``x`` always equals ``idft(symbols.s)``."""

    symbols: FrequencySymbols
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    rho0: float = 10.0
    iteration: int = 0

    @classmethod
    def from_symbols(cls, symbols, rho0=10.0, y=None, u=None):
        """Start at ``x = synthesize(symbols)`` with ``y = x`` and ``u = 0`` by default."""
        x = np.asarray(synthesize(symbols))
        y = x.copy() if y is None else np.asarray(y, dtype=np.complex128)
        u = np.zeros_like(x) if u is None else np.asarray(u, dtype=np.complex128)
        return cls(symbols, x, y, u, float(rho0))


@dataclass(frozen=True)
class AdmmTraceRow:
    iteration: int
    lagrangian: float
    primal_residual: float


@dataclass
class XSubproblemResult:
    symbols: FrequencySymbols
    x: np.ndarray
    trace: list
    state: AdmmState
    converged: bool


class FilterQuadratic:
    """Filter-dependent matrices reused across ADMM iterations.

    ``a`` is the matrix with ``x^H a x = ISL(x, h)``, and ``m = F_I^H a F_I``
    is the same quadratic form in symbol coordinates.
    """

    def __init__(self, h):
        h = np.asarray(h, dtype=np.complex128)
        n = h.size
        self.h = h
        self.a = filter_gram(h)
        self.m = np.fft.fft(np.fft.ifft(self.a, axis=1), axis=0) / n


def _main_lobe(y, h):
    c = abs(np.vdot(y, h)) ** 2
    if c == 0.0:
        raise DegenerateDenominatorError("y^H h vanished")
    return c


def augmented_lagrangian(state, h):
    """``ISL(x, h) / |y^H h|^2 + (rho0 / 2) ||x - y + u||^2``."""
    h = np.asarray(h, dtype=np.complex128)
    c = _main_lobe(state.y, h)
    resid = state.x - state.y + state.u
    return isl(state.x, h) / c + 0.5 * state.rho0 * float(np.vdot(resid, resid).real)


def bcd_coefficient(n, state, h, quad=None):
    """Linear coefficient ``d`` of the coordinate problem for symbol ``n`` (0-based).

    Restricted to unit-modulus ``s_n`` the x-step objective equals
    ``const + Re{s_n d}``. This evaluates the defining expression directly
    (O(N^2)); the sweep kernel uses an incremental equivalent.
    """
    h = np.asarray(h, dtype=np.complex128)
    quad = quad if quad is not None else FilterQuadratic(h)
    c = _main_lobe(state.y, h)
    nsub = state.x.size
    s_bar = np.array(state.symbols.s)
    s_bar[n] = 0.0
    x_bar = idft(s_bar)
    e_n = np.zeros(nsub, dtype=np.complex128)
    e_n[n] = 1.0
    f_n = idft(e_n)
    first = 2.0 * np.vdot(x_bar, quad.a @ f_n) / c
    second = state.rho0 * np.vdot(x_bar - state.y + state.u, f_n)
    return complex(first + second)


def bcd_update_symbol(d):
    """Unit-modulus minimizer ``-exp(-j arg d)`` of ``Re{s d}``; ``-1`` when ``d == 0``."""
    if d == 0:
        return -1.0 + 0.0j
    return complex(-np.conj(d) / abs(d))


def x_update(state, h, sweeps=1, quad=None):
    """Run ``sweeps`` cyclic BCD passes over the free symbols and resynthesize ``x``."""
    if sweeps == 0:
        return state
    h = np.asarray(h, dtype=np.complex128)
    quad = quad if quad is not None else FilterQuadratic(h)
    c = _main_lobe(state.y, h)
    mask = state.symbols.mask
    nsub = mask.n_subcarriers
    s = np.array(state.symbols.s)
    free = mask.available_index
    pen = -state.rho0 * np.conj(np.fft.fft(state.y - state.u) / nsub)
    for _ in range(sweeps):
        ms = quad.m @ s
        kernels.bcd_sweep(s, free, quad.m, ms, 2.0 / c, pen)
    s[mask.nulled_index] = 0.0
    symbols = FrequencySymbols(mask, s)
    return replace(state, symbols=symbols, x=idft(symbols.s))


def scalar_objective(y1, q1, p):
    """``p / |y1|^2 + |y1 - q1|^2``, the scaled objective along ``h``."""
    a = abs(y1) ** 2
    return p / a + abs(y1 - q1) ** 2 if a > 0 else np.inf


def stationarity_residual(y1, q1, p):
    """Relative residuals of both partial derivatives of :func:`scalar_objective`.

    Each component is ``|-2p t / a^2 + 2(t - q)|`` with ``a = |y1|^2``,
    divided by the largest individual term over both components. A common
    scale keeps a component sitting at rounding level from reading as a
    large relative error.
    """
    a = abs(y1) ** 2
    parts = []
    for t, q in ((y1.real, q1.real), (y1.imag, q1.imag)):
        parts.append((-2.0 * p * t / a**2, 2.0 * t, -2.0 * q))
    scale = max(max(abs(v) for v in terms) for terms in parts)
    scale = max(scale, np.finfo(float).tiny)
    return tuple(abs(sum(terms)) / scale for terms in parts)


def _best(cands, q1, p):
    # Smallest objective wins; near-ties go to the larger magnitude.
    vals = [scalar_objective(c, q1, p) for c in cands]
    best = min(vals)
    tol = 1e-12 * max(1.0, abs(best))
    tied = [c for c, v in zip(cands, vals) if v - best <= tol]
    return max(tied, key=abs)


def solve_first_coordinate(q1, p):
    """Minimize ``p / |y1|^2 + |y1 - q1|^2`` over complex ``y1``.

    Stationarity forces ``y1`` parallel to ``q1``, which leaves four cases:
    ``q1 = 0`` (any point with ``|y1|^2 = sqrt(p)``; the positive real one is
    returned), purely real or purely imaginary ``q1`` (quartic in the nonzero
    component), and general ``q1`` (quartic in one component, the other
    following by proportionality). The general quartic is written in the
    larger-magnitude component of ``q1`` to keep the constant term well scaled.
    """
    q1 = complex(q1)
    p = float(p)
    if p < 0:
        raise ValueError("p must be nonnegative")
    if p == 0.0:
        return q1
    qr, qi = q1.real, q1.imag
    if qr == 0.0 and qi == 0.0:
        return complex(p**0.25, 0.0)
    if qi == 0.0:
        cands = [complex(t, 0.0) for t in real_quartic_roots(-qr, 0.0, 0.0, -p)]
    elif qr == 0.0:
        cands = [complex(0.0, t) for t in real_quartic_roots(-qi, 0.0, 0.0, -p)]
    else:
        mod = abs(q1)
        if abs(qr) >= abs(qi):
            roots = real_quartic_roots(-qr, 0.0, 0.0, -p * (qr / mod) ** 4)
            cands = [complex(t, qi * t / qr) for t in roots]
        else:
            roots = real_quartic_roots(-qi, 0.0, 0.0, -p * (qi / mod) ** 4)
            cands = [complex(qr * t / qi, t) for t in roots]
    cands = [c for c in cands if c != 0]
    if not cands:
        raise SolverError(f"no admissible root for q1={q1!r}, p={p!r}")
    return _best(cands, q1, p)


def y_unconstrained(x, u, h, rho0, isl_value=None):
    """Minimize ``ISL / |y^H h|^2 + (rho0/2) ||x - y + u||^2`` over all ``y``.

    With ``U`` the unitary completion of ``h / ||h||`` and ``q = U^H (x + u)``,
    only the first rotated coordinate differs from ``q``; it is found by
    :func:`solve_first_coordinate` with ``p = 2 ISL / (rho0 ||h||^2)``.

    ``isl_value`` may carry a precomputed ``ISL(x, h)``.
    """
    x = np.asarray(x, dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    hn = np.linalg.norm(h)
    if hn == 0:
        raise ValueError("filter must be nonzero")
    v = h / hn
    v = v / np.linalg.norm(v)
    if isl_value is None:
        isl_value = isl(x, h)
    p = 2.0 * isl_value / (rho0 * hn**2)
    q = apply_completion_adjoint(v, x + u)
    q[0] = solve_first_coordinate(q[0], p)
    return apply_completion(v, q)


def y_update(y_unc, rho, avg_power):
    """Clip every sample to ``|y_n|^2 <= rho * P``, keeping its phase."""
    y = np.array(y_unc, dtype=np.complex128)
    limit = rho * avg_power
    if not limit > 0:
        raise ValueError("rho * P must be positive")
    mag = np.abs(y)
    over = mag**2 > limit
    if np.any(over):
        y[over] *= np.sqrt(limit) / mag[over]
        # rounding can leave |y|^2 one ulp above the limit
        shrink = np.nextafter(1.0, 0.0)
        for _ in range(8):
            bad = np.abs(y) ** 2 > limit
            if not np.any(bad):
                break
            y[bad] *= shrink
    return y


def u_update(state):
    """Scaled dual ascent ``u + x - y``."""
    return state.u + state.x - state.y


def _check_finite(arr, stage, k):
    if not np.all(np.isfinite(arr)):
        raise SolverError(f"non-finite values produced by the {stage} update at ADMM iteration {k}")


def solve_x_subproblem(init, h, cfg, quad=None):
    """Run ADMM iterations until ``||x - y||_inf <= primal_tol`` or ``max_iters``.

    Returns
    -------
    XSubproblemResult
        Final symbols and sequence, per-iteration trace rows
        (augmented Lagrangian, primal residual), the final state for warm
        starts, and whether the tolerance was met.
    """
    cfg.validate()
    h = np.asarray(h, dtype=np.complex128)
    quad = quad if quad is not None else FilterQuadratic(h)
    state = replace(init, rho0=cfg.rho0)
    trace = []
    converged = False
    for k in range(1, cfg.max_iters + 1):
        state = x_update(state, h, cfg.bcd_sweeps, quad)
        _check_finite(state.x, "x", k)
        isl_x = isl(state.x, h)
        y = y_update(
            y_unconstrained(state.x, state.u, h, cfg.rho0, isl_x), cfg.papr_level, cfg.avg_power
        )
        _check_finite(y, "y", k)
        state = replace(state, y=y)
        state = replace(state, u=u_update(state), iteration=state.iteration + 1)
        _check_finite(state.u, "u", k)

        resid = float(np.max(np.abs(state.x - state.y)))
        c = _main_lobe(state.y, h)
        dual = state.x - state.y + state.u
        lag = isl_x / c + 0.5 * cfg.rho0 * float(np.vdot(dual, dual).real)
        trace.append(AdmmTraceRow(k, lag, resid))
        if resid <= cfg.primal_tol:
            converged = True
            break
    return XSubproblemResult(state.symbols, state.x, trace, state, converged)
