"""Complex vector and matrix primitives used by the solvers.

All functions are pure and operate on ``numpy`` arrays of dtype complex128
(real inputs are promoted).
"""

import numpy as np
import scipy.linalg

from .exceptions import NotPositiveDefiniteError

__all__ = [
    "DIRECT_DFT_MAX",
    "idft",
    "dft",
    "idft_matrix",
    "unitary_completion",
    "apply_completion",
    "apply_completion_adjoint",
    "real_quartic_roots",
    "hpd_solve",
]

# Above this length the transforms go through the FFT.
DIRECT_DFT_MAX = 64

_REAL_IMAG_TOL = 1e-8
_QUARTIC_RESID_TOL = 1e-8


def _as_complex_vector(v, name="vector"):
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def idft_matrix(n):
    """Return the ``n x n`` inverse DFT matrix with entries ``exp(j2pi mk/n) / n``."""
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / n


def idft(freq, fast=None):
    """Synthesize time samples from subcarrier symbols.

    ``out[m] = (1/N) * sum_n freq[n] * exp(j 2 pi m n / N)``; note the ``1/N``
    scaling, which is not the unitary convention.

    Parameters
    ----------
    freq : array_like, shape (N,)
        Subcarrier symbols.
    fast : bool, optional
        Force the FFT path (``True``) or the explicit matrix product
        (``False``). By default the matrix is used for ``N <= 64``.
    """
    s = _as_complex_vector(freq, "freq")
    n = s.size
    if fast is None:
        fast = n > DIRECT_DFT_MAX
    if fast:
        return np.fft.ifft(s)
    return idft_matrix(n) @ s


def dft(x):
    """Exact inverse of :func:`idft` (forward DFT without scaling)."""
    return np.fft.fft(_as_complex_vector(x, "x"))


def _reflector(v):
    # Householder vector w and unit factor so that factor * (I - 2ww^H/|w|^2) e1 = v.
    # w[0] = 1 - |v1| is formed as |v[1:]|^2 / (1 + |v1|) to avoid cancellation
    # when v is close to e1.
    v1 = v[0]
    phase = np.angle(v1) if v1 != 0 else 0.0
    vr = v * np.exp(-1j * phase)
    a = abs(v1)
    tail = float(np.real(np.vdot(vr[1:], vr[1:])))
    w = -vr
    w[0] = tail / (1.0 + a)
    wn2 = float(np.real(np.vdot(w, w)))
    return np.exp(1j * phase), w, wn2


def _check_unit(v):
    v = _as_complex_vector(v, "v")
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError(f"v must have unit norm, got {nrm!r}")
    return v


def unitary_completion(v):
    """Complete a unit vector to a unitary matrix whose first column is ``v``.

    Built from a single Householder reflector, so it costs O(N^2) and stays
    orthonormal to machine precision.

    Parameters
    ----------
    v : array_like, shape (N,)
        Vector with ``||v|| = 1`` (to within 1e-12).

    Returns
    -------
    U : ndarray, shape (N, N)
        Unitary matrix with ``U[:, 0] == v``.
    """
    v = _check_unit(v)
    factor, w, wn2 = _reflector(v)
    n = v.size
    u = np.eye(n, dtype=np.complex128)
    if wn2 > 0.0:
        u -= (2.0 / wn2) * np.outer(w, w.conj())
    u *= factor
    u[:, 0] = v
    return u


def apply_completion(v, z):
    """Compute ``unitary_completion(v) @ z`` in O(N) without forming the matrix."""
    v = _check_unit(v)
    z = np.asarray(z, dtype=np.complex128)
    factor, w, wn2 = _reflector(v)
    out = z.copy()
    if wn2 > 0.0:
        out -= (2.0 / wn2) * np.vdot(w, z) * w
    return out * factor


def apply_completion_adjoint(v, z):
    """Compute ``unitary_completion(v).conj().T @ z`` in O(N)."""
    v = _check_unit(v)
    z = np.asarray(z, dtype=np.complex128)
    factor, w, wn2 = _reflector(v)
    out = z * np.conj(factor)
    if wn2 > 0.0:
        out = out - (2.0 / wn2) * np.vdot(w, out) * w
    return out


def _polyval4(coeffs, t):
    a3, a2, a1, a0 = coeffs
    return (((t + a3) * t + a2) * t + a1) * t + a0


def _polyder4(coeffs, t):
    a3, a2, a1, _ = coeffs
    return ((4.0 * t + 3.0 * a3) * t + 2.0 * a2) * t + a1


def _residual_ok(coeffs, t):
    return abs(_polyval4(coeffs, t)) <= _QUARTIC_RESID_TOL * max(1.0, t**4)


def _polish(coeffs, t, steps=4):
    # Newton steps, kept only while they reduce |p(t)|.
    best, best_val = t, abs(_polyval4(coeffs, t))
    for _ in range(steps):
        der = _polyder4(coeffs, best)
        if der == 0.0:
            break
        cand = best - _polyval4(coeffs, best) / der
        val = abs(_polyval4(coeffs, cand))
        if not np.isfinite(cand) or val >= best_val:
            break
        best, best_val = cand, val
    return best


def real_quartic_roots(a3, a2, a1, a0):
    """Real roots of the monic quartic ``t^4 + a3 t^3 + a2 t^2 + a1 t + a0``.

    Roots come from the eigenvalues of the companion matrix. An eigenvalue
    counts as real when its imaginary part is below 1e-8, or when the
    polynomial nearly vanishes at its real part (clustered multiple roots
    scatter into the complex plane). Each accepted root is Newton-polished
    and repeated roots are collapsed.

    Returns
    -------
    ndarray
        Sorted distinct real roots, possibly empty.
    """
    coeffs = tuple(float(c) for c in (a3, a2, a1, a0))
    if not all(np.isfinite(coeffs)):
        raise ValueError("quartic coefficients must be finite")
    a3, a2, a1, a0 = coeffs
    companion = np.array(
        [
            [-a3, -a2, -a1, -a0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )
    eig = np.linalg.eigvals(companion)

    cands = []
    for lam in eig:
        t = float(lam.real)
        if abs(lam.imag) < _REAL_IMAG_TOL or _residual_ok(coeffs, t):
            t = _polish(coeffs, t)
            if _residual_ok(coeffs, t):
                cands.append(t)
    if not cands:
        return np.empty(0)

    cands.sort()
    roots = [cands[0]]
    for t in cands[1:]:
        prev = roots[-1]
        close = abs(t - prev) <= 1e-6 * max(1.0, abs(t))
        if close or _residual_ok(coeffs, 0.5 * (t + prev)):
            if abs(_polyval4(coeffs, t)) < abs(_polyval4(coeffs, prev)):
                roots[-1] = t
        else:
            roots.append(t)
    return np.array(roots)


def hpd_solve(B, b):
    """Solve ``B z = b`` for Hermitian positive definite ``B`` via Cholesky.

    Raises
    ------
    NotPositiveDefiniteError
        If ``B`` is not Hermitian (to 1e-10 relative), or the factorization
        fails, or the solution misses the ``1e-8 * ||b||`` residual bound.
        Callers are expected to retry with diagonal loading.
    """
    B = np.asarray(B, dtype=np.complex128)
    b = _as_complex_vector(b, "b")
    if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] != b.size:
        raise ValueError(f"shape mismatch: B {B.shape}, b {b.shape}")
    scale = max(np.max(np.abs(B)), np.finfo(float).tiny)
    if np.max(np.abs(B - B.conj().T)) > 1e-10 * scale:
        raise NotPositiveDefiniteError("matrix is not Hermitian")
    try:
        factor = scipy.linalg.cho_factor(B, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"Cholesky factorization failed: {exc}") from exc
    z = scipy.linalg.cho_solve(factor, b)
    bn = np.linalg.norm(b)
    if not np.all(np.isfinite(z)) or np.linalg.norm(B @ z - b) > 1e-8 * bn:
        raise NotPositiveDefiniteError("matrix is numerically singular")
    return z
