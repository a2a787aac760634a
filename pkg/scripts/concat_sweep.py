"""Block error of RS + hash-ensemble concatenation over BEC(p), swept over s and outer rate.

    python3 scripts/concat_sweep.py --p 0.2 --trials 2000 --out concat.csv
"""
import argparse
import csv

from condcodes.channels import Channel
from condcodes.concat import justesen_code, concat_error_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--k", type=int, default=6)
    ap.add_argument("--p", type=float, default=0.2)
    ap.add_argument("--rates", type=float, nargs="+", default=[0.75, 0.9])
    ap.add_argument("--lengths", type=int, nargs="+", default=[16, 32, 64])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    rows = []
    for rate in args.rates:
        for s in args.lengths:
            cc = justesen_code(args.n, args.k, s, max(1, round(rate * s)))
            res = concat_error_experiment(cc, Channel.bec(args.p), args.trials, args.seed)
            lo, hi = res.block_error_ci
            rows.append([rate, s, cc.outer.k_prime, res.block_error_rate, lo, hi, res.inner_failure_rate,
                         res.tail_observed, res.tail_predicted])
            print(f"k'/s={rate:<5} s={s:<3} block={res.block_error_rate:.4f} [{lo:.4f}, {hi:.4f}] "
                  f"inner={res.inner_failure_rate:.4f} tail obs/pred={res.tail_observed:.3f}/{res.tail_predicted:.3f}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["outer_rate", "s", "k_prime", "block_error", "ci_low", "ci_high", "inner_failure",
                        "tail_observed", "tail_predicted"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
