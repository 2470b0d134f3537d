"""Verification suites behind ``dqc check`` and ``dqc verify-all``.

Each suite is a pure function of its arguments and returns a SecurityReport.
"""

from __future__ import annotations

import numpy as np

from .harness import (
    SecurityReport,
    advantage_lower_bound,
    check_blind_verifiability,
    check_independence,
    check_sa_blindness,
    check_sa_verifiability,
    cleartext_protocol,
    comb_equality,
    fk_conversion_check,
    metric_lemma_check,
    oneway_protocol,
    probe_state,
    random_adversary,
    simulator_from_verifiability,
    strategy_pool,
    teleport_reduction_check,
    thm1_witness,
    toy_protocol,
    ubqc_protocol,
)
from .interaction import comb_choi, comb_equal, run_interaction
from .mbqc import honest_mbqc_execute, random_pattern
from .protocols import oneway_suite, qotp_ideal, qotp_real, ubqc_alice, ubqc_bob_honest, ubqc_ideal
from .qcore import (
    DensityOperator,
    as_density,
    random_channel,
    random_density,
    random_pure,
    trace_distance,
)

TOY_LAMBDAS = (0.0, 0.1, 0.3)


def _sub(seed: int, *tags: int) -> int:
    """Independent child seed."""
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1)[0])


def correctness(seed: int = 0, *, sizes=((1, 2), (1, 4), (2, 2), (2, 4)), trials: int = 10, entangled: int = 2,
                tol: float = 1e-9) -> SecurityReport:
    """Honest version-1 runs against the direct MBQC execution."""
    worst = 0.0
    count = 0
    for si, (n, m) in enumerate(sizes):
        for t in range(trials):
            pattern = random_pattern(n, m, seed=_sub(seed, 1, si, t))
            rng = np.random.default_rng(_sub(seed, 2, si, t))
            refs = [f"X.R{x}" for x in range(1, n + 1)] if t < entangled else []
            if refs and n + len(refs) > 3:
                refs = refs[:1]
            ins = [f"A.in{x}" for x in range(1, n + 1)]
            psi = random_pure(ins + refs, rng)
            res = run_interaction(ubqc_alice(1, pattern), ubqc_bob_honest(n, m), psi)
            outs = [f"A.out{x}" for x in range(1, n + 1)]
            got = res.state(outs + refs).density().matrix
            want = honest_mbqc_execute(pattern, as_density(psi)).reorder(ins + refs).matrix
            worst = max(worst, trace_distance(got, want))
            count += 1
    return SecurityReport("correctness", worst, worst <= tol, count, seed, tol,
                          "honest UBQC outputs the computation applied to the input",
                          {"sizes": [list(s) for s in sizes]})


def chain_equality(seed: int = 0, *, ms=(1, 2), trials: int = 1, tol: float = 1e-9) -> SecurityReport:
    """Combs of UBQC versions 1-3 and of S^b with the simulator coincide; a leaky variant differs."""
    worst, leak_gap, count = 0.0, np.inf, 0
    for m in ms:
        for t in range(trials):
            pattern = random_pattern(1, m, seed=_sub(seed, 3, m, t))
            ref = comb_choi(ubqc_alice(1, pattern), ["A.in1"])
            for other in (ubqc_alice(2, pattern), ubqc_alice(3, pattern), ubqc_ideal(pattern)):
                worst = max(worst, comb_equal(ref, comb_choi(other, ["A.in1"]), tol)[1])
            leaky = comb_choi(ubqc_alice(1, pattern, leaky=True), ["A.in1"])
            leak_gap = min(leak_gap, comb_equal(ref, leaky, tol)[1])
            count += 1
    ok = worst <= tol and leak_gap > tol
    return SecurityReport("chain-equality", worst, ok, count, seed, tol,
                          "UBQC is perfectly blind in the composable sense",
                          {"leaky_gap": float(leak_gap)})


def blindness(seed: int = 0, *, n: int = 1, m: int = 2, trials: int = 20, tol: float = 1e-9) -> SecurityReport:
    """Bob's view factors through discarding Alice's input; cleartext does not."""
    pattern = random_pattern(n, m, seed=_sub(seed, 4))
    proto = ubqc_protocol(pattern)
    worst = 0.0
    for t in range(trials):
        worst = max(worst, check_sa_blindness(proto, random_adversary(proto.schedule, _sub(seed, 5, t))))
    clear = cleartext_protocol()
    entangled = check_sa_blindness(clear, clear.honest_bob())
    dephased = check_sa_blindness(clear, clear.honest_bob(), classical_probe=True)
    ok = worst <= tol and abs(dephased - 0.5) <= 1e-6
    return SecurityReport("blindness", worst, ok, trials, seed, tol,
                          "stand-alone blindness of UBQC",
                          {"cleartext_dephased": dephased, "cleartext_entangled": entangled})


def qotp(seed: int = 0, *, trials: int = 20, tol: float = 1e-9) -> SecurityReport:
    """QOTP real and ideal outputs coincide for random eavesdropping channels."""
    worst = 0.0
    for t in range(trials):
        rng = np.random.default_rng(_sub(seed, 6, t))
        psi = random_pure(["A.msg", "X.R1"], rng)
        eve = random_channel(4, 4, 4, _sub(seed, 7, t))
        worst = max(worst, trace_distance(qotp_real(psi, eve), qotp_ideal(psi, eve)))
    return SecurityReport("qotp", worst, worst <= tol, trials, seed, tol,
                          "the one-time pad realizes a confidential channel")


def oneway(seed: int = 0, *, trials: int = 10, tol: float = 1e-12) -> SecurityReport:
    """Combs of one-way protocols equal S^b with a relaying simulator."""
    worst, blind = 0.0, 0.0
    for t in range(trials):
        rng = np.random.default_rng(_sub(seed, 8, t))
        tau = DensityOperator(["B.tau0"], random_density(2, rng))
        E = random_channel(4, 2, 4, _sub(seed, 9, t))
        suite = oneway_suite(tau, E)
        worst = max(worst, comb_equal(comb_choi(suite["alice"], suite["inputs"]),
                                      comb_choi(suite["ideal"], suite["inputs"]), tol)[1])
        proto = oneway_protocol(tau, E)
        blind = max(blind, check_sa_blindness(proto, random_adversary(proto.schedule, _sub(seed, 10, t))))
    return SecurityReport("oneway", worst, worst <= tol and blind <= tol, trials, seed, tol,
                          "one-way delegated computation is perfectly blind", {"sa_blindness": blind})


def metrics(seed: int = 0, *, trials: int = 1000, tol: float = 1e-9) -> SecurityReport:
    reps = [metric_lemma_check(trials, d, _sub(seed, 11, d), tol) for d in (2, 4)]
    eps = max(r.epsilon for r in reps)
    return SecurityReport("metrics", eps, all(r.passed for r in reps), 2 * trials, seed, tol,
                          reps[0].citation, {"violations": [r.details["violations"] for r in reps]})


def teleport(seed: int = 0, *, trials: int = 20, ns=(1, 2), tol: float = 1e-9) -> SecurityReport:
    worst, count = 0.0, 0
    for n in ns:
        for t in range(trials):
            rng = np.random.default_rng(_sub(seed, 12, n, t))
            wires = [f"A{j}" for j in range(n)] + ["B0", "R0"]
            psi = random_pure(wires, rng)
            ch = random_channel(2 ** (n + 1), 2 ** (n + 1), 2, _sub(seed, 13, n, t))
            worst = max(worst, teleport_reduction_check(ch, n, psi))
            count += 1
    return SecurityReport("teleport", worst, worst <= tol, count, seed, tol,
                          "quantum inputs reduce to classical ones through teleportation")


def thm1(seed: int = 0, *, trials: int = 50, lambdas=TOY_LAMBDAS, tol: float = 1e-6) -> SecurityReport:
    """Sampled advantage against the simulator is at most twice the measured witness."""
    details, ok, worst = {}, True, 0.0
    for lam in lambdas:
        proto = toy_protocol(lam)
        pool = strategy_pool(proto, trials, _sub(seed, 14))
        eps0 = thm1_witness(proto, pool)
        adv = advantage_lower_bound(proto.alice(), simulator_from_verifiability(proto), pool)
        good = adv <= 2 * eps0 + tol
        if eps0 == 0.0 or eps0 <= 1e-12:
            good &= comb_equality(proto.alice(), simulator_from_verifiability(proto), proto.inputs(), 1e-9)[0]
        details[f"{lam:g}"] = {"epsilon0": eps0, "advantage": adv}
        ok &= bool(good)
        worst = max(worst, adv - 2 * eps0)
    return SecurityReport("thm1", max(worst, 0.0), ok, trials * len(lambdas), seed, tol,
                          "stand-alone blind verifiability implies composable security", details)


def lemma1(seed: int = 0, *, trials: int = 10, lambdas=TOY_LAMBDAS, inputs: int = 3, tol: float = 1e-6) -> SecurityReport:
    """Blind-verifiability witness against the bound built from its components."""
    worst = -np.inf
    count = 0
    for lam in lambdas:
        proto = toy_protocol(lam)
        for t in range(trials):
            adv = random_adversary(proto.schedule, _sub(seed, 15, t))
            bl = check_sa_blindness(proto, adv)
            ind = check_independence(proto, adv)
            rng = np.random.default_rng(_sub(seed, 16, t))
            psis = [probe_state(proto.inputs())] + [random_pure(["A.in1", "X.R1"], rng) for _ in range(inputs)]
            for psi in psis:
                _, ver = check_sa_verifiability(proto, adv, psi)
                delta = check_blind_verifiability(proto, adv, psi)
                worst = max(worst, delta - (2 * np.sqrt(2 * ver) + bl + ind))
                count += 1
    return SecurityReport("lemma1", max(worst, 0.0), worst <= tol, count, seed, tol,
                          "blindness, independence and verifiability give blind verifiability")


def fk(seed: int = 0, *, trials: int = 1000, tol: float = 1e-9) -> SecurityReport:
    return fk_conversion_check(trials, seed, tol)


SUITES = {
    "correctness": correctness,
    "chain-equality": chain_equality,
    "blindness": blindness,
    "qotp": qotp,
    "oneway": oneway,
    "metrics": metrics,
    "teleport": teleport,
    "thm1": thm1,
    "lemma1": lemma1,
    "fk": fk,
}

# acceptance order
CRITERIA = ("correctness", "chain-equality", "blindness", "qotp", "oneway", "metrics", "teleport", "thm1", "lemma1", "fk")
