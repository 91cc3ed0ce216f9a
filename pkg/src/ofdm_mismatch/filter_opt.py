"""Mismatch filter update for a fixed transmit sequence."""

import logging

import numpy as np

from .exceptions import NotPositiveDefiniteError, SolverError
from .numerics import hpd_solve
from .waveform import MismatchFilter, filter_gram

__all__ = ["DEFAULT_LOADING_EPS", "update_filter"]

log = logging.getLogger(__name__)

DEFAULT_LOADING_EPS = 1e-12


def update_filter(x, loading=0.0):
    """Filter maximizing ``|x^H h|^2 / (h^H B h)`` with ``B = filter_gram(x)``.

    The numerator is rank one, so the maximizer of the generalized Rayleigh
    quotient is ``h ~ B^{-1} x``; one Cholesky solve replaces the generalized
    eigendecomposition. The result has unit norm and its phase is chosen so
    that ``x^H h`` is real and nonnegative.

    Parameters
    ----------
    x : array_like, shape (N,)
        Transmit sequence, nonzero.
    loading : float
        Diagonal loading added to ``B``. When zero and ``B`` turns out to be
        singular, the solve is retried once with
        ``DEFAULT_LOADING_EPS * trace(B) / N``.

    Raises
    ------
    SolverError
        If the (loaded) system still cannot be solved.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or not np.any(x):
        raise ValueError("sequence must be a nonzero 1-D array")
    n = x.size
    b = filter_gram(x)
    if loading < 0:
        raise ValueError("loading must be nonnegative")
    try:
        z = hpd_solve(b + loading * np.eye(n), x)
    except NotPositiveDefiniteError as exc:
        if loading > 0:
            raise SolverError(f"filter update failed with loading {loading}: {exc}") from exc
        eps = DEFAULT_LOADING_EPS * max(float(np.trace(b).real) / n, np.finfo(float).tiny)
        log.debug("filter Gram matrix singular, retrying with loading %g", eps)
        try:
            z = hpd_solve(b + eps * np.eye(n), x)
        except NotPositiveDefiniteError as exc2:
            raise SolverError(f"filter update failed even with loading {eps}: {exc2}") from exc2
    z = z / np.linalg.norm(z)
    ip = np.vdot(x, z)
    if ip != 0:
        z = z * np.exp(-1j * np.angle(ip))
    return MismatchFilter(z)
