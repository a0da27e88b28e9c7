import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from riclab.concentration import harmonic
from riclab.harness import (SCHEMA_VERSION, BoundParams, ConfigError, ExperimentConfig, compare_bounds,
                            closed_form_rows, csv_text, records_to_stats, run_experiment, run_trials,
                            summary_row)


def _files(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


def test_config_round_trip():
    cfg = ExperimentConfig("adversary", sizes=(1024, 4096), c_over_log=1 / 40, circular=False, seed=9,
                           generator="x", trials_scale=21.5)
    back = ExperimentConfig.from_text(cfg.to_text())
    assert back == cfg


@given(st.sampled_from(["quicksort", "darts", "trapmap", "delaunay"]), st.integers(1, 5000),
       st.integers(1, 10 ** 6), st.integers(0, 2 ** 63), st.floats(0, 10, allow_nan=False), st.booleans())
def test_config_round_trip_property(alg, n, trials, seed, c, circ):
    cfg = ExperimentConfig(alg, n=n, trials=trials, seed=seed, c=c, circular=circ)
    assert ExperimentConfig.from_text(cfg.to_text()) == cfg


def test_config_errors():
    with pytest.raises(ConfigError):
        ExperimentConfig("sorting")
    with pytest.raises(ConfigError):
        ExperimentConfig("trapmap", n=10 ** 7)
    with pytest.raises(ConfigError):
        ExperimentConfig("darts", trials=-1)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("algorithm=darts\nbogus=1\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("algorithm=darts\nn=abc\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("n=4\n")


def test_single_trial_summary_equals_trial():
    cfg = ExperimentConfig("quicksort", n=64, trials=1, jobs=1)
    recs = run_trials(cfg)
    row = summary_row(cfg, recs)
    assert row["mean_total"] == recs[0].total and row["var_total"] == 0
    assert row["q50"] == row["q99"] == recs[0].total


@pytest.mark.parametrize("alg,kw", [
    ("quicksort", dict(n=128, trials=60)),
    ("darts", dict(n=256, trials=60)),
    ("trapmap", dict(n=64, trials=6)),
    ("trapmap", dict(n=8, grid=4, generator="grid", trials=4, mode="list-free")),
    ("delaunay", dict(n=128, trials=6)),
    ("adversary", dict(sizes=(64, 256), trials=0)),
])
def test_byte_identical_and_jobs_independent(tmp_path, alg, kw):
    outs = []
    for tag, jobs in (("a", 1), ("b", 1), ("c", 3)):
        cfg = ExperimentConfig(alg, out=str(tmp_path / tag), jobs=jobs, **kw)
        run_experiment(cfg)
        outs.append(_files(tmp_path / tag))
    assert outs[0] == outs[1] == outs[2]
    text = outs[0][f"{alg}_summary.csv"].decode("ascii")
    assert "\r" not in text and text.startswith("schema_version,")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert all(r["schema_version"] == str(SCHEMA_VERSION) for r in rows)


def test_partial_runs_merge_to_full():
    full = run_trials(ExperimentConfig("darts", n=300, trials=50, jobs=1))
    a = run_trials(ExperimentConfig("darts", n=300, trials=20, jobs=1))
    b = run_trials(ExperimentConfig("darts", n=300, trials=30, first_trial=20, jobs=1))
    sf = records_to_stats(full)
    sm = records_to_stats(b).merge(records_to_stats(a))
    assert sm.mean_total == pytest.approx(sf.mean_total, rel=1e-9)
    assert sm.var_total == pytest.approx(sf.var_total, rel=1e-9)
    assert np.allclose(sm.step_sq_sum, sf.step_sq_sum, rtol=1e-9)
    assert sm.quantiles([0.5, 0.9]) == sf.quantiles([0.5, 0.9])
    assert [r.seed for r in a + b] == [r.seed for r in full]


def test_compare_bounds_empty_and_ordering():
    recs = run_trials(ExperimentConfig("quicksort", n=1024, trials=300, jobs=1))
    stats = records_to_stats(recs)
    assert compare_bounds(stats, BoundParams()) == []
    n = 1024
    h = harmonic(n)
    lam = 2 * math.log(n)
    row = compare_bounds(stats, BoundParams(lams=[lam], center=2 * h - 2, delta_sq=2 * h, m_max=1.0,
                                            sq_sum=float(n), msw_a=2 * h, msw_d=1.0))[0]
    assert row.empirical_tail <= row.freedman <= row.azuma
    assert row.threshold == pytest.approx(2 * h - 2 + lam)


def test_compare_bounds_stats_derived_defaults():
    recs = run_trials(ExperimentConfig("quicksort", n=128, trials=50, jobs=1))
    stats = records_to_stats(recs)
    row = compare_bounds(stats, BoundParams(lams=[3.0]))[0]
    from riclab.concentration import TailBoundParams, freedman_bound
    assert row.freedman == freedman_bound(TailBoundParams(3.0, stats.delta_sq_proxy, 1.0))
    gf = compare_bounds(stats, BoundParams(lams=[3.0], g_of_n=1.0, f_of_n=100.0))[0]
    assert gf.freedman == pytest.approx(row.freedman + 0.01)
    two = compare_bounds(stats, BoundParams(lams=[2.0], two_sided=True))[0]
    assert two.empirical_tail >= compare_bounds(stats, BoundParams(lams=[2.0]))[0].empirical_tail


def test_closed_form_rows():
    row = closed_form_rows(1024, [1.0])[0]
    assert row.freedman < row.azuma and math.isnan(row.empirical_tail)


def test_csv_text_formatting():
    text = csv_text([{"a": 0.1, "b": 3, "c": float("nan"), "d": True}])
    assert text == "schema_version,a,b,c,d\n1,0.1,3,nan,1\n"


def test_quicksort_summary_mean_near_theory():
    cfg = ExperimentConfig("quicksort", n=256, trials=4000, jobs=1)
    row = summary_row(cfg, run_trials(cfg))
    assert abs(row["mean_total"] - row["expected_total"]) <= 3 * row["se_mean"]
