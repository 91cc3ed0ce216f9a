"""Domain types for the OFDM design problem and correlation quality metrics."""

from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from . import kernels
from .exceptions import ZeroSidelobeError
from .numerics import DIRECT_DFT_MAX, dft, idft

__all__ = [
    "SpectralMask",
    "FrequencySymbols",
    "TimeSequence",
    "MismatchFilter",
    "CorrelationProfile",
    "cross_correlation",
    "sidelobe_apply",
    "filter_gram",
    "isl",
    "pslr",
    "papr",
    "synthesize",
    "analyze",
]


@dataclass(frozen=True)
class SpectralMask:
    """Partition of subcarriers ``1..N`` into available and nulled sets.

    Indices in ``nulled`` and ``available`` are 1-based, matching how masks are
    written in configuration files; ``nulled_index``/``available_index`` give
    the 0-based numpy equivalents.
    """

    n_subcarriers: int
    nulled: tuple = ()

    def __post_init__(self):
        n = int(self.n_subcarriers)
        if n < 1:
            raise ValueError(f"n_subcarriers must be positive, got {self.n_subcarriers}")
        nulled = tuple(sorted({int(i) for i in self.nulled}))
        if nulled and (nulled[0] < 1 or nulled[-1] > n):
            raise ValueError(f"nulled indices must lie in 1..{n}")
        if len(nulled) == n:
            raise ValueError("at least one subcarrier must be available")
        object.__setattr__(self, "n_subcarriers", n)
        object.__setattr__(self, "nulled", nulled)

    @classmethod
    def from_ranges(cls, n_subcarriers, ranges=()):
        """Build a mask from 1-based inclusive ``(start, end)`` ranges."""
        nulled = []
        for start, end in ranges:
            nulled.extend(range(int(start), int(end) + 1))
        return cls(n_subcarriers, tuple(nulled))

    @property
    def available(self):
        null = set(self.nulled)
        return tuple(i for i in range(1, self.n_subcarriers + 1) if i not in null)

    @property
    def nulled_index(self):
        return np.array(self.nulled, dtype=np.int64) - 1

    @property
    def available_index(self):
        return np.array(self.available, dtype=np.int64) - 1

    @property
    def avg_power(self):
        """Average time-domain power ``||x||^2 / N`` of every admissible sequence."""
        return len(self.available) / self.n_subcarriers**2


@dataclass(frozen=True)
class FrequencySymbols:
    """Subcarrier symbols: unit modulus on available bins, zero on nulled ones."""

    mask: SpectralMask
    s: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.array(self.s, dtype=np.complex128)
        if s.shape != (self.mask.n_subcarriers,):
            raise ValueError(f"expected {self.mask.n_subcarriers} symbols, got shape {s.shape}")
        if np.any(np.abs(s[self.mask.nulled_index]) > 1e-12):
            raise ValueError("nulled subcarriers must carry zero symbols")
        if np.any(np.abs(np.abs(s[self.mask.available_index]) - 1.0) > 1e-12):
            raise ValueError("available subcarriers must carry unit-modulus symbols")
        s.flags.writeable = False
        object.__setattr__(self, "s", s)

    @classmethod
    def from_phases(cls, mask, phases):
        """Place ``exp(j*phases)`` on the available subcarriers, in index order."""
        s = np.zeros(mask.n_subcarriers, dtype=np.complex128)
        s[mask.available_index] = np.exp(1j * np.asarray(phases, dtype=float))
        return cls(mask, s)

    @classmethod
    def random(cls, mask, rng):
        """Random-phase symbols with phases uniform on ``[0, 2pi)``."""
        phases = rng.uniform(0.0, 2.0 * np.pi, size=len(mask.available))
        return cls.from_phases(mask, phases)

    @property
    def phases(self):
        return np.angle(self.s[self.mask.available_index])


@dataclass(frozen=True)
class TimeSequence:
    """Time-domain samples ``x``; converts to an ndarray via ``np.asarray``."""

    x: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=np.complex128)
        if x.ndim != 1 or x.size == 0:
            raise ValueError("time sequence must be a non-empty 1-D array")
        x.flags.writeable = False
        object.__setattr__(self, "x", x)

    def __array__(self, dtype=None, copy=None):
        return self.x if dtype is None else self.x.astype(dtype)

    def __len__(self):
        return self.x.size

    @property
    def avg_power(self):
        return float(np.vdot(self.x, self.x).real) / self.x.size


@dataclass(frozen=True)
class MismatchFilter:
    """Receive filter taps ``h`` (nonzero)."""

    h: np.ndarray = field(repr=False)

    def __post_init__(self):
        h = np.array(self.h, dtype=np.complex128)
        if h.ndim != 1 or h.size == 0:
            raise ValueError("filter must be a non-empty 1-D array")
        if not np.linalg.norm(h) > 0:
            raise ValueError("filter must be nonzero")
        h.flags.writeable = False
        object.__setattr__(self, "h", h)

    def __array__(self, dtype=None, copy=None):
        return self.h if dtype is None else self.h.astype(dtype)

    def __len__(self):
        return self.h.size


@dataclass(frozen=True)
class CorrelationProfile:
    """Correlation values ``r_k`` for lags ``-N+1 .. N-1``."""

    lags: np.ndarray
    values: np.ndarray

    @property
    def n(self):
        return (self.values.size + 1) // 2

    @property
    def peak(self):
        return complex(self.values[self.n - 1])

    @property
    def sidelobes(self):
        """The values with the lag-0 entry set to zero."""
        r = self.values.copy()
        r[self.n - 1] = 0.0
        return r


def _pair(x, h):
    x = np.asarray(x, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if x.ndim != 1 or h.ndim != 1:
        raise ValueError("sequence and filter must be one-dimensional")
    if x.size != h.size:
        raise ValueError(f"length mismatch: sequence {x.size}, filter {h.size}")
    if x.size == 0:
        raise ValueError("empty input")
    return x, h


def _correlate(x, h, fast=None):
    if fast is None:
        fast = x.size > DIRECT_DFT_MAX
    if fast:
        return scipy.signal.fftconvolve(x, np.conj(h[::-1]))
    return kernels.xcorr(x, h)


def cross_correlation(x, h, fast=None):
    """Aperiodic cross-correlation ``r_k = sum_n x_n conj(h_{n-k})``.

    For negative lags the sum runs over ``n = 1 .. N+k`` so that
    ``r^{xh}_{-k} = conj(r^{hx}_k)``.

    Parameters
    ----------
    x, h : array_like, shape (N,)
        Sequence and filter.
    fast : bool, optional
        Use the FFT path. Defaults to direct summation for ``N <= 64``.
    """
    x, h = _pair(x, h)
    n = x.size
    return CorrelationProfile(np.arange(-n + 1, n), _correlate(x, h, fast))


def sidelobe_apply(h, x):
    """Sidelobe vector ``r`` (cross-correlation with lag 0 zeroed)."""
    x, h = _pair(x, h)
    r = _correlate(x, h)
    r[x.size - 1] = 0.0
    return r


def filter_gram(x):
    """Hermitian PSD matrix ``B`` with ``h^H B h = ISL(x, h)`` for every ``h``.

    ``B[m, m'] = sum_{k != 0} x_{m+k} conj(x_{m'+k})``; equivalently the
    autocorrelation Toeplitz matrix of ``x`` minus ``x x^H``. The same
    construction applied to ``h`` gives the matrix of the sidelobe energy as a
    quadratic form in ``x``.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a non-empty 1-D array")
    return kernels.gram(x)


def isl(x, h):
    """Integrated sidelobe level ``||r||^2`` of the pair."""
    r = sidelobe_apply(h, x)
    return float(np.vdot(r, r).real)


def pslr(x, h):
    """Peak-to-sidelobe ratio ``|x^H h|^2 / ISL`` (linear).

    Raises
    ------
    ZeroSidelobeError
        When the ISL is exactly zero; the ratio is then infinite.
    """
    x, h = _pair(x, h)
    sl = isl(x, h)
    if sl == 0.0:
        raise ZeroSidelobeError("ISL is zero, PSLR is infinite")
    return float(abs(np.vdot(x, h)) ** 2 / sl)


def papr(x, avg_power=None):
    """Peak-to-average power ratio ``max |x_n|^2 / P`` (linear).

    ``P`` defaults to the sequence's own average power ``||x||^2 / N``. Pass
    the design power explicitly to measure a sequence against the constraint
    ``|x_n|^2 <= rho P`` of another one (e.g. an auxiliary ADMM variable).
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a non-empty 1-D array")
    if avg_power is None:
        avg_power = float(np.vdot(x, x).real) / x.size
    if not avg_power > 0:
        raise ValueError("sequence has zero average power")
    return float(np.max(np.abs(x) ** 2)) / avg_power


def synthesize(symbols):
    """Time-domain sequence ``x = F_I s`` for the given symbols."""
    return TimeSequence(idft(symbols.s))


def analyze(x):
    """Forward transform recovering symbols from a synthesized sequence."""
    return dft(x)
