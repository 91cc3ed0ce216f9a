"""Serialization of run outputs: traces, correlation profiles, sequence files."""

import csv
import json
import math

import numpy as np

from .waveform import MismatchFilter, SpectralMask, TimeSequence, cross_correlation, isl, papr, pslr

__all__ = [
    "DB_FLOOR",
    "profile_db",
    "emit_profile",
    "read_profile",
    "emit_trace",
    "write_sequence",
    "read_sequence",
    "peak_sidelobe_db",
]

# Written in place of -inf for lags whose correlation is exactly zero.
DB_FLOOR = -999.0


def _fmt(v):
    return repr(float(v))


def profile_db(x, h):
    """Lags and ``20 log10(|r_k| / |r_0|)`` values of the cross-correlation."""
    prof = cross_correlation(x, h)
    mag = np.abs(prof.values)
    peak = abs(prof.peak)
    if peak == 0:
        raise ValueError("correlation peak is zero; dB profile undefined")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / peak)
    db[mag == 0] = DB_FLOOR
    return prof.lags, db


def peak_sidelobe_db(x, h):
    """Largest sidelobe relative to the peak, in dB."""
    lags, db = profile_db(x, h)
    return float(np.max(db[lags != 0])) if lags.size > 1 else DB_FLOOR


def emit_profile(x, h, path):
    """Write ``lag,value_db`` rows for every lag of the correlation of ``x`` and ``h``."""
    lags, db = profile_db(x, h)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lag", "value_db"])
        for k, v in zip(lags, db):
            w.writerow([int(k), _fmt(v)])


def read_profile(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    lags = np.array([int(r["lag"]) for r in rows])
    db = np.array([float(r["value_db"]) for r in rows])
    return lags, db


def emit_trace(result, path):
    """Write the outer trace, starting with the iteration-0 (initialization) row."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "pslr_db", "isl", "papr", "primal_residual"])
        for row in [result.initial, *result.outer_trace]:
            pslr_db = 10.0 * math.log10(row.pslr) if row.pslr > 0 else DB_FLOOR
            w.writerow(
                [row.iteration, _fmt(pslr_db), _fmt(row.isl), _fmt(row.papr), _fmt(row.primal_residual)]
            )


def _pairs(v):
    v = np.asarray(v, dtype=np.complex128)
    return [[float(z.real), float(z.imag)] for z in v]


def _unpairs(rows):
    arr = np.asarray(rows, dtype=float).reshape(-1, 2)
    return arr[:, 0] + 1j * arr[:, 1]


def write_sequence(path, mask, s, x, h, y=None, config=None):
    """Store symbols, sequence and filter as ``[re, im]`` arrays plus a config echo."""
    doc = {
        "n_subcarriers": mask.n_subcarriers,
        "nulled": list(mask.nulled),
        "s": _pairs(s),
        "x": _pairs(x),
        "h": _pairs(h),
    }
    if y is not None:
        doc["y"] = _pairs(y)
    try:
        ratio = pslr(x, h)
    except ZeroDivisionError:
        ratio = None
    doc["metrics"] = {"isl": isl(x, h), "pslr": ratio, "papr": papr(x)}
    doc["config"] = config or {}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_sequence(path):
    """Load a file written by :func:`write_sequence`.

    Returns a dict with ``mask``, ``s``, ``x`` (TimeSequence), ``h``
    (MismatchFilter), optional ``y``, ``metrics`` and ``config``.
    """
    with open(path) as fh:
        doc = json.load(fh)
    out = {
        "mask": SpectralMask(doc["n_subcarriers"], tuple(doc["nulled"])),
        "s": _unpairs(doc["s"]),
        "x": TimeSequence(_unpairs(doc["x"])),
        "h": MismatchFilter(_unpairs(doc["h"])),
        "metrics": doc.get("metrics", {}),
        "config": doc.get("config", {}),
    }
    if "y" in doc:
        out["y"] = _unpairs(doc["y"])
    return out
