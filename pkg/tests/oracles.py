"""Independent reference computations used as test oracles.

Everything here is written from the defining sums with plain loops or brute
force, sharing no code with the package under test.
"""

import numpy as np


def corr_bruteforce(x, h):
    """``r_k = sum_n x_n conj(h_{n-k})`` for ``k = -N+1 .. N-1`` by explicit loops."""
    n = len(x)
    out = np.zeros(2 * n - 1, dtype=complex)
    for k in range(-n + 1, n):
        acc = 0j
        for i in range(n):
            j = i - k
            if 0 <= j < n:
                acc += x[i] * np.conj(h[j])
        out[k + n - 1] = acc
    return out


def h_sl_matrix(h):
    """``(2N-1) x N`` matrix with ``H x`` = sidelobe vector (lag-0 row zero)."""
    n = len(h)
    H = np.zeros((2 * n - 1, n), dtype=complex)
    for k in range(-n + 1, n):
        if k == 0:
            continue
        for i in range(n):
            j = i - k
            if 0 <= j < n:
                H[k + n - 1, i] = np.conj(h[j])
    return H


def x_sl_matrix(x):
    """``(2N-1) x N`` matrix with ``|X h|`` equal to the sidelobe magnitudes.

    Row ``k`` holds ``conj(r_k)`` as a linear function of ``h``:
    ``conj(r_k) = sum_m conj(x_{m+k}) h_m``.
    """
    n = len(x)
    X = np.zeros((2 * n - 1, n), dtype=complex)
    for k in range(-n + 1, n):
        if k == 0:
            continue
        for m in range(n):
            i = m + k
            if 0 <= i < n:
                X[k + n - 1, m] = np.conj(x[i])
    return X


def idft_bruteforce(s):
    n = len(s)
    return np.array(
        [sum(s[k] * np.exp(2j * np.pi * m * k / n) for k in range(n)) / n for m in range(n)]
    )


def bisection_real_roots(coeffs, grid=200001, iters=200):
    """Real roots of the monic quartic with ``coeffs = (a3, a2, a1, a0)``.

    Sign changes on a uniform grid over the Cauchy bound, refined by bisection.
    Misses roots of even multiplicity, which random coefficients do not produce.
    """
    a3, a2, a1, a0 = coeffs

    def p(t):
        return (((t + a3) * t + a2) * t + a1) * t + a0

    bound = 1.0 + max(abs(a3), abs(a2), abs(a1), abs(a0))
    ts = np.linspace(-bound, bound, grid)
    vals = p(ts)
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]:
        a, b = ts[i], ts[i + 1]
        fa = p(a)
        if fa == 0:
            roots.append(a)
            continue
        if p(b) == 0:
            continue
        for _ in range(iters):
            mid = 0.5 * (a + b)
            fm = p(mid)
            if np.sign(fm) == np.sign(fa):
                a, fa = mid, fm
            else:
                b = mid
        roots.append(0.5 * (a + b))
    return np.array(sorted(roots))


def grid_minimum(fun, center, radius, n=400):
    """Minimum of ``fun(re, im)`` over an ``n x n`` grid centred on ``center``."""
    re = np.linspace(center.real - radius, center.real + radius, n)
    im = np.linspace(center.imag - radius, center.imag + radius, n)
    R, I = np.meshgrid(re, im)
    vals = fun(R, I)
    idx = np.unravel_index(np.nanargmin(vals), vals.shape)
    return float(vals[idx]), complex(R[idx], I[idx])


def random_unit_complex(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_complex(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)
