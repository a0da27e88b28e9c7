"""Adversarial trapezoid input: the high quantile of the work grows faster than n ln n."""
from _common import parser, save

from riclab.adversary import heavy_tail_experiment

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    sizes = [2 ** 8, 2 ** 10] if args.quick else [2 ** 10, 2 ** 12, 2 ** 14]
    rows = []
    for r in heavy_tail_experiment(sizes, seed=args.seed):
        rows.append({"n": r.n, "trials": r.trials, "c": r.c, "quantile_level": r.quantile_level,
                     "q_work": r.q_work, "q_over_nlogn": r.ratio, "mean_over_nlogn": r.mean_ratio,
                     "miss_rate": r.miss_rate, "miss_se": r.miss_se, "miss_formula": r.miss_formula,
                     "miss_exact": r.miss_exact, "enough_rate": r.enough_rate})
        print(f"n={r.n}: Q/(n ln n) {r.ratio:.3f}  miss {r.miss_rate:.4f} vs {r.miss_formula:.4f}")
    save(args.out, "script_heavy_tail.csv", rows)
