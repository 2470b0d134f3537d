#!/usr/bin/env python3
"""Blind-verifiability witness and sampled distinguishing advantage for the
one-qubit trap toy protocol over a range of swap probabilities.
"""

import argparse

import numpy as np

from dqc.harness import advantage_lower_bound, simulator_from_verifiability, strategy_pool, thm1_witness, toy_protocol


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=float, nargs="+", default=list(np.linspace(0, 0.5, 6)))
    ap.add_argument("--strategies", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'lambda':>7} {'eps0':>9} {'advantage':>10} {'2*eps0':>9}  ok")
    for lam in args.lambdas:
        proto = toy_protocol(lam)
        pool = strategy_pool(proto, args.strategies, args.seed)
        eps0 = thm1_witness(proto, pool)
        adv = advantage_lower_bound(proto.alice(), simulator_from_verifiability(proto), pool)
        print(f"{lam:7.3f} {eps0:9.4f} {adv:10.4f} {2 * eps0:9.4f}  {adv <= 2 * eps0 + 1e-6}")


if __name__ == "__main__":
    main()
