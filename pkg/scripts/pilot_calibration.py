"""Pilot runs used to freeze the statistical tolerance bands of the acceptance suite.

Seeds 101..110 are reserved for the pilot; the acceptance suite uses 1..10.
"""

from __future__ import annotations

import argparse
import json
import math

from heckestat.experiments import (
    build_form,
    negative_prime_reciprocal_sum,
    nonvanishing_density_curve,
    sign_summary,
)
from heckestat.measures import MeasureSpec
from heckestat.symfunc import KappaIndex

PILOT_SEEDS = range(101, 111)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--X", type=int, default=100_000)
    ap.add_argument("--X-primes", type=int, default=1_000_000)
    args = ap.parse_args()
    spec = MeasureSpec("sato-tate", 3)
    rows = []
    for seed in PILOT_SEEDS:
        form = build_form(spec, seed, args.X_primes)
        signs = sign_summary(form, KappaIndex((1, 1), 3), args.X)
        neg = negative_prime_reciprocal_sum(form, KappaIndex((1, 0), 3), args.X_primes)
        curve = nonvanishing_density_curve(
            form.with_forced_zeros(form.forced_zeros.parse("3mod4")),
            KappaIndex((1, 0), 3),
            args.X,
            [10_000, args.X],
        )
        rows.append(
            {
                "seed": seed,
                "positive_fraction": signs.positive_fraction,
                "sign_change_ratio": signs.sign_changes / signs.nonzero,
                "negative_sum_over_loglog": neg / math.log(math.log(args.X_primes)),
                "nonvanishing_ratios": [r["ratio"] for r in curve],
            }
        )
        print(json.dumps(rows[-1]))
    for key in ("positive_fraction", "sign_change_ratio", "negative_sum_over_loglog"):
        vals = [r[key] for r in rows]
        print(f"{key}: min={min(vals):.4f} max={max(vals):.4f}")
    ratios = [v for r in rows for v in r["nonvanishing_ratios"]]
    print(f"nonvanishing ratio: min={min(ratios):.4f} max={max(ratios):.4f}")


if __name__ == "__main__":
    main()
