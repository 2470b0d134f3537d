#!/usr/bin/env python3
"""Run every acceptance suite and print a one-line verdict per criterion."""

import argparse
import json
import sys
import time

from dqc.cli import verify_all


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write the full report here")
    args = ap.parse_args()

    t0 = time.perf_counter()
    report = verify_all(args.seed)
    for e in report["criteria"]:
        mark = "PASS" if e["pass"] else "FAIL"
        print(f"[{mark}] {e['criterion']:2d} {e['check']:<15} epsilon={e['epsilon']:.3g}  tol={e['tol']:g}")
    print(f"{'all passed' if report['pass'] else 'FAILURES'} in {time.perf_counter() - t0:.1f}s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(report, fh, indent=2)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
