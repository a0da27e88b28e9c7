"""Delaunay insertion work: created triangles, variance budget and tails for growing n."""
from _common import parser, save

from riclab.delaunay import delaunay_tail_experiment

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    sizes, trials = ((256, 512), 100) if args.quick else ((512, 1024, 2048, 4096), 1000)
    rows = []
    for gen in ("uniform-square", "uniform-circle"):
        for n in sizes:
            r = delaunay_tail_experiment(n, trials, args.seed, generator=gen)
            row = {"generator": gen, "n": n, "trials": trials, "created_per_n": r.created_per_n,
                   "var_budget": r.var_budget, "c_fit": r.c_fit, "max_stage_ratio": r.max_stage_ratio,
                   "flips_mean": r.flips_mean, "jensen_ok": int(r.jensen_ok), "accounting_ok": int(r.accounting_ok)}
            for t in r.tails:
                row[f"tail_a{t.alpha:g}"] = t.empirical
                row[f"bound_a{t.alpha:g}"] = t.bound
            rows.append(row)
            print(f"{gen} n={n}: created/n {r.created_per_n:.3f}  c_fit {r.c_fit:.3f}  budget {r.var_budget:.3f}")
    save(args.out, "script_delaunay_work.csv", rows)
