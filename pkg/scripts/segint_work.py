"""Trapezoidal-map work on random non-crossing inputs and on k x k grids."""
from _common import parser, save

from riclab.segint import segint_tail_experiment

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    quick = args.quick
    runs = [("random-noncrossing", dict(n=n), 200 if quick else 2000) for n in ((128, 256) if quick else (256, 512, 1024))]
    runs += [("grid", dict(k=k), 20 if quick else 200) for k in ((8, 16) if quick else (8, 16, 24, 32))]
    rows = []
    for mode in ("conflict-graph", "list-free"):
        for gen, kw, trials in runs:
            t = max(trials // 10, 5) if mode == "list-free" else trials
            r = segint_tail_experiment(gen, t, args.seed, mode=mode, **kw)
            row = {"generator": gen, "mode": mode, "n": r.n, "m": r.m, "trials": t,
                   "mean_total": r.stats.mean_total, "scale": r.scale, "mean_ratio": r.mean_ratio}
            for b in r.bounds:
                row.update({f"{b.name}_threshold": b.threshold, f"{b.name}_empirical": b.empirical,
                            f"{b.name}_bound": b.bound, f"{b.name}_applicable": int(b.applicable)})
            rows.append(row)
            print(f"{mode} {gen} n={r.n} m={r.m}: mean/(n ln n + m) {r.mean_ratio:.3f}")
    # rows differ in their bound columns; write one file per mode
    for mode in ("conflict-graph", "list-free"):
        save(args.out, f"script_segint_{mode}.csv", [r for r in rows if r["mode"] == mode])
