"""Hot inner loops, each with a numba kernel and a vectorized numpy twin.

The public dispatchers at the bottom pick the numba version when
``_jit.USE_NUMBA`` is true. Both versions are importable so tests and the
benchmark can compare them directly.
"""

import numpy as np
import scipy.linalg

from . import _jit

__all__ = [
    "xcorr_numba",
    "xcorr_numpy",
    "gram_numba",
    "gram_numpy",
    "bcd_sweep_numba",
    "bcd_sweep_numpy",
    "xcorr",
    "gram",
    "bcd_sweep",
]


@_jit.njit
def xcorr_numba(x, h):
    n = x.shape[0]
    out = np.zeros(2 * n - 1, dtype=np.complex128)
    for k in range(-n + 1, n):
        lo = max(0, k)
        hi = min(n, n + k)
        acc = 0.0 + 0.0j
        for i in range(lo, hi):
            acc += x[i] * np.conj(h[i - k])
        out[k + n - 1] = acc
    return out


def xcorr_numpy(x, h):
    return np.convolve(x, np.conj(h[::-1]))


@_jit.njit
def gram_numba(v):
    n = v.shape[0]
    r = np.zeros(n, dtype=np.complex128)
    for lag in range(n):
        acc = 0.0 + 0.0j
        for j in range(n - lag):
            acc += v[j + lag] * np.conj(v[j])
        r[lag] = acc
    out = np.empty((n, n), dtype=np.complex128)
    for m in range(n):
        for mp in range(n):
            if m >= mp:
                t = r[m - mp]
            else:
                t = np.conj(r[mp - m])
            out[m, mp] = t - v[m] * np.conj(v[mp])
    return out


def gram_numpy(v):
    n = v.shape[0]
    r = np.convolve(v, np.conj(v[::-1]))[n - 1 :]
    return scipy.linalg.toeplitz(r, np.conj(r)) - np.outer(v, np.conj(v))


@_jit.njit
def bcd_sweep_numba(s, free_idx, m, ms, scale, pen):
    for t in range(free_idx.shape[0]):
        n = free_idx[t]
        d = scale * np.conj(ms[n] - m[n, n] * s[n]) + pen[n]
        if d == 0:
            new = -1.0 + 0.0j
        else:
            new = -np.conj(d) / abs(d)
        delta = new - s[n]
        if delta != 0:
            for i in range(ms.shape[0]):
                ms[i] += delta * m[i, n]
            s[n] = new


def bcd_sweep_numpy(s, free_idx, m, ms, scale, pen):
    for n in free_idx:
        d = scale * np.conj(ms[n] - m[n, n] * s[n]) + pen[n]
        new = -np.conj(d) / abs(d) if d != 0 else -1.0 + 0.0j
        delta = new - s[n]
        if delta != 0:
            ms += delta * m[:, n]
            s[n] = new


def xcorr(x, h):
    """Aperiodic cross-correlation ``r[k + N - 1] = sum_n x[n] conj(h[n - k])``."""
    if _jit.USE_NUMBA:
        return xcorr_numba(x, h)
    return xcorr_numpy(x, h)


def gram(v):
    """Sidelobe Gram matrix ``G[m, m'] = sum_{k != 0} v[m+k] conj(v[m'+k])``."""
    if _jit.USE_NUMBA:
        return gram_numba(v)
    return gram_numpy(v)


def bcd_sweep(s, free_idx, m, ms, scale, pen):
    """One cyclic pass of closed-form phase updates, in place on ``s`` and ``ms``.

    For each free index ``n`` the coefficient is
    ``d = scale * conj(ms[n] - m[n, n] s[n]) + pen[n]`` and the symbol becomes
    ``-exp(-j arg d)`` (``-1`` when ``d == 0``). ``ms`` tracks ``m @ s``.
    """
    if _jit.USE_NUMBA:
        bcd_sweep_numba(s, free_idx, m, ms, scale, pen)
    else:
        bcd_sweep_numpy(s, free_idx, m, ms, scale, pen)
