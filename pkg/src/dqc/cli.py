"""Command-line front end.

Exit codes: 0 on success, 1 when a check fails, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import suites
from .interaction import CapacityError, ScheduleError, qubit_cap, run_interaction
from .mbqc import MeasurementPattern, PatternError, honest_mbqc_execute, random_pattern, zero_pattern
from .protocols import qotp_ideal, qotp_real, ubqc_alice, ubqc_bob_honest
from .qcore import as_density, random_channel, random_pure, trace_distance

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    n: int | None = None
    m: int | None = None
    pattern: str | None = None
    generator: str = "random"
    mode: str = "exact"
    seed: int = 0
    trials: int | None = None
    tol: float | None = None
    out: str | None = None
    suite: str | None = None
    version: int = 1

    def check_cap(self, refs: int = 0) -> None:
        if self.n is None or self.m is None:
            return
        need = self.n * (self.m + 1) + refs
        cap = qubit_cap()
        if need > cap:
            raise CapacityError(f"n*(m+1) + references = {need} qubits exceeds the cap of {cap}; raise DQC_QUBIT_CAP to allow it")


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dims(cfg: ExperimentConfig) -> tuple[int, int]:
    if cfg.n is None or cfg.m is None:
        raise UsageError("--n and --m are required")
    if cfg.n < 1 or cfg.m < 1:
        raise UsageError("--n and --m must be at least 1")
    return cfg.n, cfg.m


def _load_pattern(cfg: ExperimentConfig) -> MeasurementPattern:
    if cfg.pattern:
        try:
            pattern = MeasurementPattern.loads(Path(cfg.pattern).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read pattern: {exc}") from None
        if cfg.n is not None and (cfg.n, cfg.m) != (pattern.n, pattern.m):
            raise UsageError(f"pattern is {pattern.n}x{pattern.m}, not {cfg.n}x{cfg.m}")
        cfg.n, cfg.m = pattern.n, pattern.m
        return pattern
    n, m = _dims(cfg)
    return random_pattern(n, m, seed=cfg.seed)


def cmd_run_ubqc(cfg: ExperimentConfig) -> int:
    pattern = _load_pattern(cfg)
    cfg.check_cap()
    if cfg.mode not in ("exact", "sample"):
        raise UsageError(f"unknown mode {cfg.mode!r}")
    n = pattern.n
    psi = random_pure([f"A.in{x}" for x in range(1, n + 1)], np.random.default_rng(cfg.seed))
    res = run_interaction(ubqc_alice(cfg.version, pattern), ubqc_bob_honest(n, pattern.m), psi,
                          mode=cfg.mode, seed=cfg.seed)
    outs = [f"A.out{x}" for x in range(1, n + 1)]
    got = res.state(outs).density()
    want = honest_mbqc_execute(pattern, as_density(psi))
    tol = 1e-9 if cfg.tol is None else cfg.tol
    dist = trace_distance(got.matrix, want.matrix)
    _emit({
        "command": "run-ubqc",
        "n": n,
        "m": pattern.m,
        "version": cfg.version,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "tol": tol,
        "pattern": pattern.to_json(),
        "transcript": res.transcript,
        "output_distance": dist,
        "pass": dist <= tol,
    }, cfg.out)
    return EXIT_OK if dist <= tol else EXIT_FAIL


def cmd_run_qotp(cfg: ExperimentConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    trials = cfg.trials or 1
    tol = 1e-9 if cfg.tol is None else cfg.tol
    worst = 0.0
    for t in range(trials):
        psi = random_pure(["A.msg", "X.R1"], rng)
        eve = random_channel(4, 4, 4, int(rng.integers(2**31)))
        worst = max(worst, trace_distance(qotp_real(psi, eve), qotp_ideal(psi, eve)))
    _emit({"command": "run-qotp", "seed": cfg.seed, "trials": trials, "tol": tol,
           "real_ideal_distance": worst, "pass": worst <= tol}, cfg.out)
    return EXIT_OK if worst <= tol else EXIT_FAIL


def _suite_kwargs(cfg: ExperimentConfig) -> dict:
    kw: dict = {}
    if cfg.trials is not None:
        kw["trials"] = cfg.trials
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    name = cfg.suite
    if cfg.n is not None or cfg.m is not None:
        n, m = _dims(cfg)
        cfg.check_cap(refs=n)
        if name == "correctness":
            kw["sizes"] = ((n, m),)
        elif name == "blindness":
            kw.update(n=n, m=m)
        elif name == "chain-equality":
            if n != 1:
                raise UsageError("chain-equality runs at n = 1")
            kw["ms"] = (m,)
        else:
            raise UsageError(f"suite {name!r} takes no --n/--m")
    return kw


def cmd_check(cfg: ExperimentConfig) -> int:
    if cfg.suite not in suites.SUITES:
        raise UsageError(f"unknown suite {cfg.suite!r}; choose from {', '.join(suites.SUITES)}")
    report = suites.SUITES[cfg.suite](cfg.seed, **_suite_kwargs(cfg))
    _emit(report.as_dict(), cfg.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_emit_pattern(cfg: ExperimentConfig) -> int:
    n, m = _dims(cfg)
    if cfg.generator == "random":
        pattern = random_pattern(n, m, seed=cfg.seed)
    elif cfg.generator == "all-zero":
        pattern = zero_pattern(n, m)
    else:
        raise UsageError(f"unknown generator {cfg.generator!r}")
    text = pattern.dumps() + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def verify_all(seed: int = 0) -> dict:
    entries = []
    for i, name in enumerate(suites.CRITERIA, 1):
        r = suites.SUITES[name](seed)
        entries.append({"criterion": i, **r.as_dict()})
    return {"command": "verify-all", "seed": seed, "criteria": entries, "pass": all(e["pass"] for e in entries)}


def cmd_verify_all(cfg: ExperimentConfig) -> int:
    report = verify_all(cfg.seed)
    _emit(report, cfg.out)
    failing = [e["check"] for e in report["criteria"] if not e["pass"]]
    if failing:
        sys.stderr.write(f"failing criteria: {', '.join(failing)}\n")
        return EXIT_FAIL
    return EXIT_OK


COMMANDS = {
    "run-ubqc": cmd_run_ubqc,
    "run-qotp": cmd_run_qotp,
    "check": cmd_check,
    "emit-pattern": cmd_emit_pattern,
    "verify-all": cmd_verify_all,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, dims=True):
        if dims:
            p.add_argument("--n", type=int)
            p.add_argument("--m", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float)
        p.add_argument("--out")

    p = sub.add_parser("run-ubqc", help="run UBQC with an honest server and emit the transcript")
    common(p)
    p.add_argument("--pattern")
    p.add_argument("--mode", default="exact")
    p.add_argument("--version", type=int, default=1, choices=(1, 2, 3))

    p = sub.add_parser("run-qotp", help="compare real and ideal QOTP outputs")
    common(p, dims=False)
    p.add_argument("--trials", type=int)

    p = sub.add_parser("check", help="run one verification suite")
    common(p)
    p.add_argument("--suite", required=True)
    p.add_argument("--trials", type=int)

    p = sub.add_parser("emit-pattern", help="write a measurement pattern file")
    common(p)
    p.add_argument("--generator", default="random")

    p = sub.add_parser("verify-all", help="run every acceptance suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return parser


def run_experiment(cfg: ExperimentConfig) -> int:
    try:
        return COMMANDS[cfg.command](cfg)
    except (UsageError, CapacityError, PatternError, ScheduleError, KeyError, ValueError) as exc:
        if isinstance(exc, KeyError) and cfg.command in COMMANDS:
            raise
        sys.stderr.write(f"dqc {cfg.command}: {exc}\n")
        return EXIT_USAGE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in ExperimentConfig.__dataclass_fields__}
    return run_experiment(ExperimentConfig(**fields))


if __name__ == "__main__":
    sys.exit(main())
