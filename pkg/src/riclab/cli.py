"""Command-line entry point: ``riclab <algorithm> [flags]``.

Data goes to CSV files under ``--out``; progress and errors go to stderr.
A failure prints ``error: <ExceptionClass>: <message>`` and exits with 1
(2 for argument errors, as argparse does).
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .harness import ALGORITHMS, BoundRow, ExperimentConfig, bound_rows_dicts, run_experiment, write_csv
from .concentration import MswParams, TailBoundParams, azuma_bound, freedman_bound, msw_bound

log = logging.getLogger("riclab")

S = argparse.SUPPRESS


def _bool(v: str) -> bool:
    if v.lower() in ("1", "true", "yes", "on"):
        return True
    if v.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {v!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags given here override it")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--first-trial", dest="first_trial", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out", default=S)
    p.add_argument("--jobs", type=int, default=S, help="worker processes (0 = all cores)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="riclab", description="Randomized incremental construction experiments.")
    sub = ap.add_subparsers(dest="algorithm", required=True)
    for name in ALGORITHMS:
        p = sub.add_parser(name)
        _common(p)
        if name == "quicksort":
            p.add_argument("--c", type=float, default=S, help="deviation lambda = 2 c ln n")
            p.add_argument("--circular", type=_bool, default=S)
        if name == "trapmap":
            p.add_argument("--mode", choices=("conflict-graph", "list-free"), default=S)
            p.add_argument("--grid", type=int, default=S, help="use the k x k grid input")
            p.add_argument("--generator", choices=("random-noncrossing", "grid", "adversary", "file"), default=S)
            p.add_argument("--input", default=S, help="SEG file for --generator file")
            p.add_argument("--beta", type=float, default=S)
        if name == "delaunay":
            p.add_argument("--generator", choices=("uniform-square", "uniform-circle", "file"), default=S)
            p.add_argument("--input", default=S, help="PT file for --generator file")
        if name == "adversary":
            p.add_argument("--sizes", default=S, help="comma-separated list of n")
            p.add_argument("--c-over-log", dest="c_over_log", type=float, default=S)
            p.add_argument("--trials-scale", dest="trials_scale", type=float, default=S)
        if name == "bound":
            p.add_argument("--c", type=float, default=S)
            p.add_argument("--lam", type=float, action="append", help="custom deviation; repeatable")
            p.add_argument("--delta-sq", dest="delta_sq", type=float)
            p.add_argument("--m-max", dest="m_max", type=float)
            p.add_argument("--sq-sum", dest="sq_sum", type=float)
            p.add_argument("--g", dest="g_of_n", type=float)
            p.add_argument("--f", dest="f_of_n", type=float)
            p.add_argument("--msw-a", dest="msw_a", type=float)
            p.add_argument("--msw-b", dest="msw_b", type=float)
            p.add_argument("--msw-d", dest="msw_d", type=float)
    return ap


_NON_CONFIG = {"config", "verbose", "lam", "delta_sq", "m_max", "sq_sum", "g_of_n", "f_of_n", "msw_a", "msw_b",
               "msw_d"}


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    vals = {}
    if getattr(ns, "config", None):
        from .harness import parse_kv
        vals.update(parse_kv(Path(ns.config).read_text()))
        if vals.get("algorithm", ns.algorithm) != ns.algorithm:
            raise ValueError(f"config file is for {vals['algorithm']}, not {ns.algorithm}")
    vals.update({k: v for k, v in vars(ns).items() if k not in _NON_CONFIG and v is not None})
    if "grid" in vals and "generator" not in vals and int(vals["grid"]) > 0:
        vals["generator"] = "grid"
    return ExperimentConfig.from_mapping(vals)


def custom_bound_rows(ns: argparse.Namespace) -> list[BoundRow]:
    """Evaluate the three bounds at user-supplied parameters."""
    if ns.delta_sq is None or ns.m_max is None:
        raise ValueError("custom bound needs --delta-sq and --m-max")
    rows = []
    for lam in ns.lam:
        fr = freedman_bound(TailBoundParams(lam, ns.delta_sq, ns.m_max, ns.g_of_n, ns.f_of_n))
        az = azuma_bound(lam, ns.sq_sum) if ns.sq_sum else math.nan
        b = lam if ns.msw_b is None else ns.msw_b
        ms = msw_bound(MswParams(ns.msw_a, b, ns.msw_d if ns.msw_d else ns.m_max)) if ns.msw_a else math.nan
        rows.append(BoundRow(lam, math.nan, math.nan, fr, az, ms))
    return rows


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(ns)
        if cfg.algorithm == "bound" and getattr(ns, "lam", None):
            rows = bound_rows_dicts(custom_bound_rows(ns), cfg.n)
            path = write_csv(Path(cfg.out) / "bound.csv", rows)
            log.info("wrote %s", path)
            return 0
        res = run_experiment(cfg)
        for p in res.paths:
            log.info("wrote %s", p)
    except Exception as exc:   # one machine-parsable line, nonzero exit
        msg = str(exc).splitlines()[0] if str(exc) else ""
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
