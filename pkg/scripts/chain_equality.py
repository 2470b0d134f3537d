#!/usr/bin/env python3
"""Frobenius gaps between the combs of UBQC versions 1-3, the ideal blind
resource with its simulator, and a leaky variant that sends angles unmasked.
"""

import argparse

from dqc.interaction import comb_choi
from dqc.mbqc import random_pattern
from dqc.protocols import ubqc_alice, ubqc_ideal


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for m in args.m:
        pattern = random_pattern(1, m, args.seed)
        ref = comb_choi(ubqc_alice(1, pattern), ["A.in1"])
        rows = {
            "version 2": ubqc_alice(2, pattern),
            "version 3": ubqc_alice(3, pattern),
            "ideal + simulator": ubqc_ideal(pattern),
            "leaky version 1": ubqc_alice(1, pattern, leaky=True),
        }
        print(f"n=1 m={m} angles={[int(a) for a in pattern.angles[0]]}")
        for label, prog in rows.items():
            print(f"  version 1 vs {label:<18} gap={ref.gap(comb_choi(prog, ['A.in1'])):.3e}")


if __name__ == "__main__":
    main()
