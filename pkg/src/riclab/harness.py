"""Experiment orchestration: config, seeded trials, CSV output, bound reports.

A run is fully described by an :class:`ExperimentConfig`.  Trial t always
uses ``trial_seed(seed, t)``, trials may be spread over worker processes in
contiguous chunks, and records are put back in trial order before anything
is summarized or written, so the output bytes never depend on ``jobs``.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .concentration import MswParams, TailBoundParams, azuma_bound, freedman_bound, harmonic, msw_bound
from .martingale import TrialStats
from .rng import make_rng, trial_seed

log = logging.getLogger("riclab")

SCHEMA_VERSION = 1
ALGORITHMS = ("quicksort", "darts", "trapmap", "delaunay", "adversary", "bound")
MAX_N = {"quicksort": 1 << 24, "darts": 1 << 24, "trapmap": 1 << 16, "delaunay": 1 << 16,
         "adversary": 1 << 18, "bound": 1 << 62}
DEFAULT_TRIALS = {"quicksort": 1000, "darts": 1000, "trapmap": 100, "delaunay": 100, "bound": 1}


class ConfigError(ValueError):
    pass


# configuration ------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    algorithm: str
    n: int = 256
    sizes: tuple = ()                    # adversary: list of n
    trials: int = 0                      # 0 = algorithm default (adversary: trials_scale sqrt(n))
    first_trial: int = 0
    seed: int = 0
    out: str = "results"
    mode: str = "conflict-graph"
    generator: str = ""                  # trapmap / delaunay input generator
    grid: int = 0                        # trapmap: k for the grid generator
    input: str = ""                      # path for the file generator
    circular: bool = True
    c: float = 1.0                       # quicksort deviation constant (lambda = 2 c ln n)
    c_over_log: float = 1 / 40
    trials_scale: float = 20.0
    alpha_frac: float = 0.5
    beta: float = 1.0
    jobs: int = 0                        # 0 = all available cores

    def __post_init__(self):
        if isinstance(self.sizes, str):
            self.sizes = tuple(int(v) for v in self.sizes.split(",") if v.strip())
        self.sizes = tuple(int(v) for v in self.sizes)
        self.validate()

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.trials < 0 or self.first_trial < 0:
            raise ConfigError("trials and first_trial must be nonnegative")
        if self.algorithm != "adversary" and self.resolved_trials() < 1:
            raise ConfigError("trials must be >= 1")
        cap = MAX_N[self.algorithm]
        for n in self.sizes or (self.n,):
            if not 1 <= n <= cap:
                raise ConfigError(f"n={n} outside 1..{cap} for {self.algorithm}")
        if self.mode not in ("conflict-graph", "list-free"):
            raise ConfigError("mode must be conflict-graph or list-free")
        if self.jobs < 0:
            raise ConfigError("jobs must be nonnegative")

    def resolved_trials(self, n: Optional[int] = None) -> int:
        if self.trials:
            return self.trials
        if self.algorithm == "adversary":
            return int(math.ceil(self.trials_scale * math.sqrt(n or self.n)))
        return DEFAULT_TRIALS[self.algorithm]

    def resolved_jobs(self) -> int:
        return self.jobs or os.cpu_count() or 1

    # flat key=value form
    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **overrides) -> "ExperimentConfig":
        vals = dict(parse_kv(text))
        vals.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_mapping(vals)

    @classmethod
    def from_mapping(cls, vals: dict) -> "ExperimentConfig":
        kinds = {f.name: f for f in dataclasses.fields(cls)}
        out = {}
        for k, v in vals.items():
            if k not in kinds:
                raise ConfigError(f"unknown config key {k!r}")
            out[k] = _coerce(kinds[k], v)
        if "algorithm" not in out:
            raise ConfigError("config needs an algorithm")
        return cls(**out)


def parse_kv(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value")
        k, v = line.split("=", 1)
        yield k.strip(), v.strip()


def _coerce(f, v):
    if not isinstance(v, str):
        return v
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
    try:
        if kind == "bool":
            if v.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(v)
            return v.lower() in ("true", "1", "yes")
        if kind == "int":
            return int(v)
        if kind == "float":
            return float(v)
        if kind == "tuple":
            return tuple(int(x) for x in v.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"bad value {v!r} for {f.name}") from None
    return v


# one trial per algorithm ----------------------------------------------------------

@dataclass
class TrialRecord:
    trial: int
    seed: int
    n: int
    per_step: np.ndarray = field(repr=False)
    extra: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(self.per_step.sum())

    @property
    def max_step(self) -> float:
        return float(self.per_step.max()) if len(self.per_step) else 0.0

    @property
    def sq_sum(self) -> float:
        return float((self.per_step.astype(np.float64) ** 2).sum())


_CTX: dict = {}


def _context(cfg: ExperimentConfig, n: int):
    """Per-input data shared by all trials (built once per process)."""
    key = (cfg.algorithm, n, cfg.seed, cfg.generator, cfg.grid, cfg.input, cfg.mode, cfg.c_over_log, cfg.alpha_frac)
    if key in _CTX:
        return _CTX[key]
    if cfg.algorithm == "trapmap":
        from .segint import _prepare, segment_generator
        gen = cfg.generator or ("grid" if cfg.grid else "random-noncrossing")
        if gen == "file":
            from .geometry import read_objects
            segs = read_objects(cfg.input)[0]
        else:
            segs = segment_generator(gen, n, cfg.seed, cfg.grid)
        arr, arrays, m = _prepare(segs)
        if arr is None and cfg.mode == "list-free":
            from .trapmap import Arrangement
            arr = Arrangement(segs, check=False)
        ctx = (segs, arr, arrays, m)
    elif cfg.algorithm == "delaunay":
        from ._fastdt import kernel_ok, point_arrays
        from .delaunay import point_generator
        pts = point_generator(cfg.generator or "uniform-square", n, cfg.seed, cfg.input or None)
        ctx = (pts, point_arrays(pts) if kernel_ok(pts) else None)
    elif cfg.algorithm == "adversary":
        from ._fastmap import seg_arrays
        from .adversary import AdversaryConfig, gen_adversary
        acfg = AdversaryConfig(n, cfg.c_over_log * math.log(n), cfg.alpha_frac)
        ctx = (acfg, seg_arrays(gen_adversary(acfg)))
    else:
        ctx = None
    _CTX.clear()
    _CTX[key] = ctx
    return ctx


def run_trial(cfg: ExperimentConfig, n: int, t: int) -> TrialRecord:
    s = trial_seed(cfg.seed, t)
    ctx = _context(cfg, n)
    alg = cfg.algorithm
    if alg == "quicksort":
        from .quicksort import _indicator_row, charge_counts
        pos = make_rng(s).permutation(n)
        steps = _indicator_row(pos, n // 2, cfg.circular)
        comps = int(charge_counts(pos, cfg.circular)[0].sum())
        return TrialRecord(t, s, n, steps, {"comparisons": comps})
    if alg == "darts":
        from .darts import play_darts
        from .rng import InsertionOrder
        dt = play_darts(n, InsertionOrder.of(make_rng(s).permutation(n)))
        return TrialRecord(t, s, n, dt.changes, {"z": dt.z})
    if alg == "trapmap":
        from .segint import _trial_trace
        segs, arr, arrays, m = ctx
        tr = _trial_trace(segs, arr, arrays, make_rng(s).permutation(len(segs)), cfg.mode)
        return TrialRecord(t, s, len(segs), tr.per_step, {"m": m, "mode": cfg.mode})
    if alg == "delaunay":
        from ._fastdt import fast_delaunay
        from .delaunay import build_delaunay
        from .rng import InsertionOrder
        pts, arrays = ctx
        order = make_rng(s).permutation(len(pts))
        if arrays is not None:
            run = fast_delaunay(pts, order, arrays=arrays)
        else:
            run = build_delaunay(pts, InsertionOrder.of(order))[3]
        return TrialRecord(t, s, len(pts), run.work,
                           {"flips": int(run.flips.sum()), "real_flips": int(run.real_flips.sum()),
                            "created": int(run.created.sum())})
    if alg == "adversary":
        from .adversary import adversary_trial
        acfg, arrays = ctx
        work, created, fl = adversary_trial(acfg, arrays, s)
        return TrialRecord(t, s, n, work, {
            "created": created, "t_untouched": int(fl.t_untouched), "enough_samples": int(fl.enough_samples),
            "tpp_first": int(fl.tpp_first), "tpp_changes": fl.tpp_changes_all})
    raise ConfigError(f"{alg} has no trials")


def _run_chunk(cfg_text: str, n: int, start: int, stop: int) -> list:
    cfg = ExperimentConfig.from_text(cfg_text)
    return [run_trial(cfg, n, t) for t in range(start, stop)]


def run_trials(cfg: ExperimentConfig, n: Optional[int] = None) -> list[TrialRecord]:
    """Records for trials first_trial .. first_trial + trials - 1, in trial order."""
    n = cfg.n if n is None else n
    count = cfg.resolved_trials(n)
    lo, hi = cfg.first_trial, cfg.first_trial + count
    jobs = min(cfg.resolved_jobs(), count)
    if jobs <= 1:
        return [run_trial(cfg, n, t) for t in range(lo, hi)]
    _context(cfg, n)          # build once in the parent; forked workers inherit it
    step = max(1, -(-count // (4 * jobs)))
    bounds = [(a, min(a + step, hi)) for a in range(lo, hi, step)]
    text = cfg.to_text()
    with ProcessPoolExecutor(max_workers=jobs, mp_context=get_context("fork")) as ex:
        parts = list(ex.map(_run_chunk, [text] * len(bounds), [n] * len(bounds),
                            [a for a, _ in bounds], [b for _, b in bounds]))
    return [r for part in parts for r in part]


def records_to_stats(records: Sequence[TrialRecord], store_steps: bool = True) -> TrialStats:
    if not records:
        raise ValueError("no trial records")
    steps = np.stack([np.asarray(r.per_step, dtype=np.float64) for r in records])
    stats = TrialStats(steps.shape[1], store_steps, steps.sum(axis=1), steps.max(axis=1, initial=0.0))
    if store_steps:
        stats.step_sum = steps.sum(axis=0)
        stats.step_sq_sum = (steps ** 2).sum(axis=0)
    return stats


# bound comparison ------------------------------------------------------------------

@dataclass
class BoundParams:
    lams: Sequence[float] = ()
    center: Optional[float] = None          # default: empirical mean total
    two_sided: bool = False
    delta_sq: Optional[float] = None        # default: sum_k mean(T_k^2)
    m_max: Optional[float] = None           # default: empirical max of max_k T_k
    sq_sum: Optional[float] = None          # Azuma sum c_i^2; default n * m_max^2
    g_of_n: Optional[float] = None
    f_of_n: Optional[float] = None
    msw_a: Optional[float] = None           # default: center
    msw_d: Optional[float] = None           # default: m_max


@dataclass
class BoundRow:
    lam: float
    threshold: float
    empirical_tail: float
    freedman: float
    azuma: float
    msw: float


def compare_bounds(stats: TrialStats, params: BoundParams) -> list[BoundRow]:
    """Empirical tail at center + lam next to the three closed-form bounds."""
    if not params.lams:
        return []
    center = stats.mean_total if params.center is None else params.center
    m_max = float(stats.max_steps.max()) if params.m_max is None else params.m_max
    delta_sq = stats.delta_sq_proxy if params.delta_sq is None else params.delta_sq
    sq_sum = stats.n * m_max ** 2 if params.sq_sum is None else params.sq_sum
    a = center if params.msw_a is None else params.msw_a
    d = m_max if params.msw_d is None else params.msw_d
    t = np.sort(stats.totals)
    rows = []
    for lam in params.lams:
        if params.two_sided:
            emp = float(np.mean(np.abs(t - center) >= lam))
        else:
            emp = stats.tail([center + lam])[0]
        fr = freedman_bound(TailBoundParams(lam, delta_sq, m_max, params.g_of_n, params.f_of_n))
        az = azuma_bound(lam, sq_sum) if sq_sum > 0 else 1.0
        ms = msw_bound(MswParams(a, lam, d)) if a > 0 and d > 0 else 1.0
        rows.append(BoundRow(float(lam), float(center + lam), emp, fr, az, ms))
    return rows


def closed_form_rows(n: int, cs: Sequence[float]) -> list[BoundRow]:
    """Quicksort per-element instantiation: lam = 2 c ln n, Delta^2 = 2 H_n, M = 1, sum c_i^2 = n."""
    h = harmonic(n)
    rows = []
    for c in cs:
        lam = 2 * c * math.log(n)
        rows.append(BoundRow(lam, 2 * h + lam, float("nan"),
                             freedman_bound(TailBoundParams(lam, 2 * h, 1.0)), azuma_bound(lam, float(n)),
                             msw_bound(MswParams(2 * h, lam, 1.0))))
    return rows


# summaries ----------------------------------------------------------------------------

def _expected_total(cfg: ExperimentConfig, n: int) -> float:
    if cfg.algorithm == "quicksort":
        return 2 * harmonic(n) - 2 if cfg.circular else float("nan")
    if cfg.algorithm == "darts":
        return harmonic(n)
    return float("nan")


def summary_row(cfg: ExperimentConfig, records: Sequence[TrialRecord]) -> dict:
    stats = records_to_stats(records)
    n = records[0].n
    row = {"algorithm": cfg.algorithm, "n": n, "trials": stats.count, "seed": cfg.seed,
           "first_trial": records[0].trial, "mean_total": stats.mean_total, "var_total": stats.var_total,
           "se_mean": stats.se_mean, "expected_total": _expected_total(cfg, n)}
    q = stats.quantiles([0.5, 0.9, 0.99])
    row.update({"q50": q[0], "q90": q[1], "q99": q[2],
                "mean_max_step": float(np.sort(stats.max_steps).sum() / stats.count),
                "max_max_step": float(stats.max_steps.max()),
                "delta_sq_proxy": stats.delta_sq_proxy, "ln_n": math.log(n)})
    if cfg.algorithm == "trapmap":
        m = records[0].extra["m"]
        row.update({"m": m, "mode": cfg.mode, "mean_over_nlogn_plus_m": stats.mean_total / (n * math.log(max(n, 2)) + m)})
    if cfg.algorithm == "delaunay":
        row.update({"mean_created_over_n": float(np.mean([r.extra["created"] for r in records]) / n),
                    "mean_flips": float(np.mean([r.extra["flips"] for r in records])),
                    "var_budget": stats.delta_sq_proxy / (n * n * math.log(n))})
    if cfg.algorithm == "adversary":
        from .adversary import PhaseFlags, summarize_heavy_tail
        acfg = _context(cfg, n)[0]
        flags = [PhaseFlags(bool(r.extra["enough_samples"]), bool(r.extra["t_untouched"]), bool(r.extra["tpp_first"]),
                            0, r.extra["tpp_changes"]) for r in records]
        dom = all(r.total >= r.extra["created"] for r in records)
        h = summarize_heavy_tail(acfg, stats.totals, flags, dom)
        row.update({"c": h.c, "quantile_level": h.quantile_level, "q_work": h.q_work, "q_over_nlogn": h.ratio,
                    "mean_over_nlogn": h.mean_ratio, "miss_rate": h.miss_rate, "miss_formula": h.miss_formula,
                    "miss_exact": h.miss_exact, "miss_se": h.miss_se, "enough_rate": h.enough_rate,
                    "dominance_ok": int(h.dominance_ok)})
    return row


def default_bound_params(cfg: ExperimentConfig, n: int) -> BoundParams:
    ln = math.log(n)
    if cfg.algorithm == "quicksort":
        h = harmonic(n)
        return BoundParams(lams=[2 * cfg.c * ln], center=2 * h - 2, delta_sq=2 * h, m_max=1.0, sq_sum=float(n),
                           msw_a=2 * h, msw_d=1.0)
    if cfg.algorithm == "darts":
        return BoundParams(lams=[0.9 * ln], center=harmonic(n), two_sided=True, m_max=1.0, sq_sum=float(n))
    return BoundParams(lams=[])


def _scaled_params(cfg: ExperimentConfig, stats: TrialStats, n: int) -> BoundParams:
    p = default_bound_params(cfg, n)
    if not p.lams:
        # geometric work totals: deviations of 10%, 25% and 50% of the mean
        p.lams = [f * stats.mean_total for f in (0.1, 0.25, 0.5)]
    return p


# CSV ------------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def csv_text(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["schema_version", *columns])
    for r in rows:
        w.writerow([str(SCHEMA_VERSION), *(_fmt(r.get(c, "")) for c in columns)])
    return buf.getvalue()


def write_csv(path: Path, rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(csv_text(rows, columns))
    return path


TRIAL_COLUMNS = {
    "quicksort": ["trial", "seed", "n", "circular", "total_work", "max_step", "sq_sum", "comparisons"],
    "darts": ["trial", "seed", "n", "total_work", "max_step", "sq_sum", "z"],
    "trapmap": ["trial", "seed", "n", "m", "mode", "total_work", "max_step", "sq_sum"],
    "delaunay": ["trial", "seed", "n", "total_work", "max_step", "sq_sum", "flips", "real_flips", "created"],
    "adversary": ["trial", "seed", "n", "total_work", "max_step", "sq_sum", "created", "t_untouched",
                  "enough_samples", "tpp_first", "tpp_changes"],
}


def trial_rows(cfg: ExperimentConfig, records: Sequence[TrialRecord]) -> list[dict]:
    out = []
    for r in records:
        row = {"trial": r.trial, "seed": r.seed, "n": r.n, "circular": int(cfg.circular),
               "total_work": r.total, "max_step": r.max_step, "sq_sum": r.sq_sum}
        row.update(r.extra)
        out.append(row)
    return out


def bound_rows_dicts(rows: Sequence[BoundRow], n: int) -> list[dict]:
    return [{"n": n, **dataclasses.asdict(r)} for r in rows]


@dataclass
class ExperimentResult:
    cfg: ExperimentConfig
    records: dict                    # n -> list of TrialRecord
    summaries: list
    bounds: list
    paths: list


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run every trial, then write ``<out>/<algorithm>_{trials,summary,bounds}.csv``."""
    cfg.validate()
    out = Path(cfg.out)
    alg = cfg.algorithm
    paths = []
    if alg == "bound":
        rows = bound_rows_dicts(closed_form_rows(cfg.n, [cfg.c]), cfg.n)
        if write:
            paths.append(write_csv(out / "bound.csv", rows))
        return ExperimentResult(cfg, {}, [], rows, paths)
    sizes = cfg.sizes if (alg == "adversary" and cfg.sizes) else (cfg.n,)
    records, summaries, bounds, trows = {}, [], [], []
    for n in sizes:
        size = f"grid k={cfg.grid}" if cfg.generator == "grid" else f"n={n}"
        log.info("%s %s trials=%d jobs=%d", alg, size, cfg.resolved_trials(n), cfg.resolved_jobs())
        recs = run_trials(cfg, n)
        records[n] = recs
        summaries.append(summary_row(cfg, recs))
        stats = records_to_stats(recs)
        bounds += bound_rows_dicts(compare_bounds(stats, _scaled_params(cfg, stats, n)), n)
        trows += trial_rows(cfg, recs)
    if write:
        paths.append(write_csv(out / f"{alg}_trials.csv", trows, TRIAL_COLUMNS[alg]))
        paths.append(write_csv(out / f"{alg}_summary.csv", summaries))
        paths.append(write_csv(out / f"{alg}_bounds.csv", bounds))
        (out / f"{alg}_config.txt").write_text(_portable_config(cfg), encoding="ascii", newline="\n")
        paths.append(out / f"{alg}_config.txt")
    return ExperimentResult(cfg, records, summaries, bounds, paths)


def _portable_config(cfg: ExperimentConfig) -> str:
    """Config text without the keys that must not influence output bytes."""
    return "".join(line + "\n" for line in cfg.to_text().splitlines()
                   if not line.startswith(("jobs=", "out=")))
