"""Per-element quicksort cost against the Freedman and Azuma tails over a grid of c."""
from _common import parser, save

from riclab.concentration import harmonic
from riclab.quicksort import quicksort_tail_experiment

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    sizes, trials = ((256, 1024), 1000) if args.quick else ((256, 1024, 4096), 10_000)
    rows = []
    for n in sizes:
        for c in (0.5, 1.0, 1.5, 2.0):
            r = quicksort_tail_experiment(n, trials, args.seed, c)
            rows.append({"n": n, "c": c, "trials": trials, "mean_per_element": r.mean_per_element,
                         "expected": 2 * harmonic(n) - 2, "se": r.se_per_element, "threshold": r.threshold,
                         "empirical_tail": r.pair_tail, "freedman": r.freedman, "azuma": r.azuma})
            print(f"n={n} c={c}: tail {r.pair_tail:.3g}  freedman {r.freedman:.3g}  azuma {r.azuma:.3g}")
    save(args.out, "script_quicksort_tails.csv", rows)
