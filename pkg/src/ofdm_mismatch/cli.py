"""Command-line front end.

Verbs::

    ofdm-mismatch run     -c exp.cfg [overrides]   # one (rho, mask) cell
    ofdm-mismatch sweep   -c exp.cfg [overrides]   # every rho x mask cell
    ofdm-mismatch profile RUN_DIR_OR_SEQUENCE_JSON # recompute metrics

Config files hold ``key = value`` lines; ``#`` starts a comment. Lists are
comma separated, null ranges are ``start:end`` (1-based, inclusive), and
alternative masks for a sweep are separated by ``|``::

    n_subcarriers = 512
    null = 209:304
    papr_levels = 1.25
"""

import argparse
import json
import logging
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__, _jit
from .admm_x import AdmmConfig
from .altopt import AltOptConfig, initialize, run
from .artifacts import emit_profile, emit_trace, peak_sidelobe_db, read_sequence, write_sequence
from .exceptions import ConfigError, DesignError
from .waveform import SpectralMask, isl, papr, pslr

__all__ = ["ExperimentSpec", "parse_config", "run_experiment", "run_cell", "main"]

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3

_KEYS = (
    "n_subcarriers",
    "null",
    "papr_levels",
    "penalty",
    "outer_iters",
    "admm_max_iters",
    "admm_tol",
    "bcd_sweeps",
    "seed",
    "output_dir",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated experiment description.

    ``null_masks`` holds one tuple of ``(start, end)`` ranges per mask; a
    plain run has exactly one (possibly empty) mask.
    """

    n_subcarriers: int
    null_masks: tuple = ((),)
    papr_levels: tuple = (1.25,)
    penalty: float = 10.0
    outer_iters: int = 2000
    admm_max_iters: int = 100
    admm_tol: float = 1e-4
    bcd_sweeps: int = 1
    seed: int = 0
    output_dir: str = "out"

    @property
    def null_ranges(self):
        return self.null_masks[0]

    def masks(self):
        return [SpectralMask.from_ranges(self.n_subcarriers, r) for r in self.null_masks]

    def cells(self):
        """``(rho, mask_index)`` pairs, rho-major."""
        return [(rho, i) for rho in self.papr_levels for i in range(len(self.null_masks))]


def _parse_ranges(text, lineno):
    text = text.strip()
    if not text:
        return ()
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                a, b = part.split(":")
                rng = (int(a), int(b))
            else:
                rng = (int(part), int(part))
        except ValueError:
            raise ConfigError(f"line {lineno}: bad null range {part!r}") from None
        out.append(rng)
    return tuple(out)


def _check_ranges(ranges, n, lineno):
    for a, b in ranges:
        if a > b or a < 1 or b > n:
            raise ConfigError(f"line {lineno}: null range {a}:{b} outside 1..{n}")
    ordered = sorted(ranges)
    for (a0, b0), (a1, b1) in zip(ordered, ordered[1:]):
        if a1 <= b0:
            raise ConfigError(f"line {lineno}: null ranges {a0}:{b0} and {a1}:{b1} overlap")
    if sum(b - a + 1 for a, b in ranges) >= n:
        raise ConfigError(f"line {lineno}: every subcarrier is nulled")


_CASTS = {
    "n_subcarriers": int,
    "penalty": float,
    "outer_iters": int,
    "admm_max_iters": int,
    "admm_tol": float,
    "bcd_sweeps": int,
    "seed": int,
    "output_dir": str,
}


def _validate(values, lines):
    n = values.get("n_subcarriers")
    if n is None:
        raise ConfigError("n_subcarriers is required")
    if n < 2:
        raise ConfigError(f"line {lines.get('n_subcarriers', 0)}: n_subcarriers must be >= 2")
    for mask in values.get("null_masks", ((),)):
        _check_ranges(mask, n, lines.get("null", 0))
    rhos = values.get("papr_levels", (1.25,))
    if not rhos:
        raise ConfigError(f"line {lines.get('papr_levels', 0)}: at least one PAPR level is required")
    if any(not rho >= 1.0 for rho in rhos):
        raise ConfigError(f"line {lines.get('papr_levels', 0)}: PAPR levels must be >= 1")
    for key in ("penalty", "admm_tol"):
        if key in values and not values[key] > 0:
            raise ConfigError(f"line {lines[key]}: {key} must be positive")
    for key in ("outer_iters", "admm_max_iters", "bcd_sweeps"):
        if key in values and values[key] < 1:
            raise ConfigError(f"line {lines[key]}: {key} must be >= 1")
    return ExperimentSpec(**values)


def _set(values, lines, key, raw, lineno):
    if key not in _KEYS:
        raise ConfigError(f"line {lineno}: unknown key {key!r}")
    try:
        if key == "null":
            values["null_masks"] = tuple(_parse_ranges(m, lineno) for m in raw.split("|"))
        elif key == "papr_levels":
            values["papr_levels"] = tuple(float(v) for v in raw.split(",") if v.strip())
        else:
            values[key] = _CASTS[key](raw)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"line {lineno}: bad value for {key}: {raw!r}") from None
    lines["null" if key == "null" else key] = lineno


def parse_config(text, overrides=None):
    """Parse a config document into an :class:`ExperimentSpec`.

    ``overrides`` maps config keys to raw string values that replace (or
    supply) entries of the document; their diagnostics report line 0.
    """
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key in lines or (key == "null" and "null" in lines):
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        _set(values, lines, key, raw, lineno)
    for key, raw in (overrides or {}).items():
        if raw is not None:
            _set(values, lines, key, str(raw), 0)
    return _validate(values, lines)


def _altopt_config(spec, rho, mask):
    admm = AdmmConfig(
        rho0=spec.penalty,
        max_iters=spec.admm_max_iters,
        bcd_sweeps=spec.bcd_sweeps,
        primal_tol=spec.admm_tol,
    )
    return AltOptConfig(mask=mask, papr_level=rho, outer_iters=spec.outer_iters, admm=admm, seed=spec.seed)


def _spec_echo(spec, rho, mask_index):
    d = asdict(spec)
    d["null_masks"] = [[list(r) for r in m] for m in spec.null_masks]
    d["papr_levels"] = list(spec.papr_levels)
    d["cell"] = {"papr_level": rho, "mask_index": mask_index}
    return d


def _safe(fn, *args):
    try:
        return fn(*args)
    except ZeroDivisionError:
        return math.inf


def run_cell(spec, rho, mask_index, out_dir):
    """Run one ``(rho, mask)`` cell and write its files into ``out_dir``.

    Files: ``trace.csv``, ``correlation.csv``, ``baseline_correlation.csv``
    (random-phase start with its matched filter), ``sequence.json`` and
    ``meta.json``. Returns a summary dict; solver failures are reported in
    it (and in ``meta.json``) rather than raised.
    """
    os.makedirs(out_dir, exist_ok=True)
    mask = spec.masks()[mask_index]
    cfg = _altopt_config(spec, rho, mask)
    meta = {
        "version": __version__,
        "seed": spec.seed,
        "papr_level": rho,
        "mask_index": mask_index,
        "numba": _jit.USE_NUMBA,
        "python": platform.python_version(),
        "started": datetime.now(timezone.utc).isoformat(),
    }
    state0, h0 = initialize(cfg)
    emit_profile(state0.x, h0, os.path.join(out_dir, "baseline_correlation.csv"))
    summary = {
        "papr_level": rho,
        "mask_index": mask_index,
        "n_nulled": len(mask.nulled),
        "dir": out_dir,
        "baseline_isl": isl(state0.x, h0),
        "baseline_psl_db": peak_sidelobe_db(state0.x, h0),
    }
    t0 = time.perf_counter()
    try:
        result = run(cfg)
    except DesignError as exc:
        meta.update(status="solver_failure", error=str(exc), elapsed_s=time.perf_counter() - t0)
        _write_json(os.path.join(out_dir, "meta.json"), meta)
        summary.update(status="solver_failure", error=str(exc))
        return summary
    elapsed = time.perf_counter() - t0
    x, h = np.asarray(result.x), np.asarray(result.h)
    emit_trace(result, os.path.join(out_dir, "trace.csv"))
    emit_profile(x, h, os.path.join(out_dir, "correlation.csv"))
    write_sequence(
        os.path.join(out_dir, "sequence.json"),
        mask,
        result.symbols.s,
        x,
        h,
        y=result.y,
        config=_spec_echo(spec, rho, mask_index),
    )
    meta.update(
        status="ok",
        termination=result.termination,
        outer_iterations=len(result.outer_trace),
        elapsed_s=elapsed,
    )
    _write_json(os.path.join(out_dir, "meta.json"), meta)
    summary.update(
        status="ok",
        isl=isl(x, h),
        pslr=_safe(pslr, x, h),
        papr=papr(x),
        papr_y=papr(result.y, mask.avg_power),
        psl_db=peak_sidelobe_db(x, h),
    )
    return summary


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True, default=float)
        fh.write("\n")


def _cell_dir(spec, rho, mask_index):
    return os.path.join(spec.output_dir, f"rho{rho:g}_mask{mask_index}")


def trend_warnings(summaries):
    """Messages for every place where ISL grows as rho grows (same mask)."""
    msgs = []
    by_mask = {}
    for s in summaries:
        if s.get("status") == "ok":
            by_mask.setdefault(s["mask_index"], []).append(s)
    for idx, rows in sorted(by_mask.items()):
        rows.sort(key=lambda r: r["papr_level"])
        for a, b in zip(rows, rows[1:]):
            if b["isl"] > a["isl"]:
                msgs.append(
                    f"mask {idx}: ISL rose from {a['isl']:.6g} (rho={a['papr_level']:g}) "
                    f"to {b['isl']:.6g} (rho={b['papr_level']:g})"
                )
    return msgs


def run_experiment(spec, workers=1):
    """Run every cell of ``spec`` into ``<output_dir>/rho<rho>_mask<i>/``.

    Writes ``summary.csv`` next to the cell directories and returns the list
    of per-cell summaries.
    """
    os.makedirs(spec.output_dir, exist_ok=True)
    cells = spec.cells()
    jobs = [(spec, rho, i, _cell_dir(spec, rho, i)) for rho, i in cells]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(run_cell, *zip(*jobs)))
    else:
        summaries = [run_cell(*job) for job in jobs]
    cols = ["papr_level", "mask_index", "n_nulled", "status", "isl", "pslr", "papr_y", "psl_db", "baseline_isl", "baseline_psl_db"]
    with open(os.path.join(spec.output_dir, "summary.csv"), "w") as fh:
        fh.write(",".join(cols) + "\n")
        for s in summaries:
            fh.write(",".join(str(s.get(c, "")) for c in cols) + "\n")
    return summaries


def _overrides(args):
    null = None
    if args.null:
        null = "|".join(args.null)
    papr_levels = None
    if args.papr_levels:
        papr_levels = ",".join(args.papr_levels)
    return {
        "n_subcarriers": args.n_subcarriers,
        "null": null,
        "papr_levels": papr_levels,
        "penalty": args.penalty,
        "outer_iters": args.outer_iters,
        "admm_max_iters": args.admm_max_iters,
        "admm_tol": args.admm_tol,
        "bcd_sweeps": args.bcd_sweeps,
        "seed": args.seed,
        "output_dir": args.output_dir,
    }


def _add_spec_flags(p):
    p.add_argument("-c", "--config", help="config file (key = value lines)")
    p.add_argument("--n-subcarriers", type=int)
    p.add_argument("--null", action="append", help="null ranges, e.g. 209:304 (repeat for more masks)")
    p.add_argument("--papr-levels", action="append", help="comma-separated rho values")
    p.add_argument("--penalty", type=float, help="ADMM penalty rho0")
    p.add_argument("--outer-iters", type=int)
    p.add_argument("--admm-max-iters", type=int)
    p.add_argument("--admm-tol", type=float)
    p.add_argument("--bcd-sweeps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output-dir")


def build_parser():
    parser = argparse.ArgumentParser(prog="ofdm-mismatch", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    p_run = sub.add_parser("run", help="run a single (rho, mask) configuration")
    _add_spec_flags(p_run)
    p_sweep = sub.add_parser("sweep", help="run every rho x mask combination")
    _add_spec_flags(p_sweep)
    p_sweep.add_argument("-j", "--workers", type=int, default=1)
    p_prof = sub.add_parser("profile", help="recompute metrics from a saved run")
    p_prof.add_argument("path", help="run directory or sequence.json")
    p_prof.add_argument("-o", "--output", help="write the correlation profile here")
    return parser


def _load_spec(args):
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    return parse_config(text, _overrides(args))


def _cmd_run(args):
    spec = _load_spec(args)
    if len(spec.cells()) != 1:
        raise ConfigError("run takes exactly one PAPR level and one mask; use sweep for more")
    rho, idx = spec.cells()[0]
    summary = run_cell(spec, rho, idx, spec.output_dir)
    print(json.dumps(summary, indent=1, default=float))
    return EXIT_OK if summary["status"] == "ok" else EXIT_SOLVER


def _cmd_sweep(args):
    spec = _load_spec(args)
    summaries = run_experiment(spec, workers=args.workers)
    for s in summaries:
        if s["status"] == "ok":
            print(
                f"rho={s['papr_level']:g} mask={s['mask_index']} isl={s['isl']:.6g} "
                f"psl={s['psl_db']:.2f} dB (baseline {s['baseline_psl_db']:.2f} dB)"
            )
        else:
            print(f"rho={s['papr_level']:g} mask={s['mask_index']} FAILED: {s['error']}")
    for msg in trend_warnings(summaries):
        log.warning("ISL not non-increasing in rho: %s", msg)
    return EXIT_OK if all(s["status"] == "ok" for s in summaries) else EXIT_SOLVER


def _cmd_profile(args):
    path = args.path
    if os.path.isdir(path):
        path = os.path.join(path, "sequence.json")
    seq = read_sequence(path)
    x, h = np.asarray(seq["x"]), np.asarray(seq["h"])
    out = {"isl": isl(x, h), "pslr": _safe(pslr, x, h), "papr": papr(x), "psl_db": peak_sidelobe_db(x, h)}
    if "y" in seq:
        out["papr_y"] = papr(seq["y"], seq["mask"].avg_power)
    print(json.dumps(out, indent=1, default=float))
    if args.output:
        emit_profile(x, h, args.output)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "profile": _cmd_profile}
    try:
        return handlers[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DesignError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
