"""Acceptance criteria, one test per criterion, all at seed 0.

Each test prints a ``[PASS]``/``[FAIL]`` line; the same lines are repeated
in the terminal summary (see conftest.py).
"""

import json

import pytest

from dqc import suites
from dqc.cli import verify_all

SEED = 0

CRITERIA = {
    "correctness": "honest UBQC equals direct MBQC execution (D <= 1e-9)",
    "chain-equality": "UBQC v1 = v2 = v3 = S^b with simulator; leaky variant differs",
    "blindness": "UBQC blindness witness <= 1e-9; cleartext dephased witness = 0.5",
    "qotp": "one-time pad real = ideal for random eavesdroppers (D <= 1e-9)",
    "oneway": "one-way protocols: real comb = S^b with relay simulator (<= 1e-12)",
    "metrics": "D-bar <= P <= sqrt(2 D-bar) on 1000 samples per dimension",
    "teleport": "quantum-input reduction through teleportation (<= 1e-9)",
    "thm1": "toy family: sampled advantage <= 2 * witness + 1e-6",
    "lemma1": "blind verifiability bounded by its components (+1e-6)",
    "fk": "p D(sigma, U psi) <= sqrt(tr(Pi rho)) on 1000 samples",
}

_cache = {}


def report(name):
    if name not in _cache:
        _cache[name] = suites.SUITES[name](SEED)
    return _cache[name]


def line(label, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"


@pytest.mark.parametrize("name", suites.CRITERIA)
def test_criterion(name, acceptance_log):
    r = report(name)
    label = f"{suites.CRITERIA.index(name) + 1:2d} {name}"
    acceptance_log(line(label, r.passed, f"{CRITERIA[name]}; epsilon={r.epsilon:.3g}"))
    assert r.passed, r.as_dict()


def test_blindness_details():
    d = report("blindness").details
    assert d["cleartext_dephased"] == pytest.approx(0.5, abs=1e-6)
    assert d["cleartext_entangled"] == pytest.approx(0.75, abs=1e-6)


def test_chain_leaky_variant_is_detected():
    assert report("chain-equality").details["leaky_gap"] > 1e-9


def test_thm1_toy_family_spans_witness_values():
    d = report("thm1").details
    assert d["0"]["epsilon0"] <= 1e-9
    assert d["0.3"]["epsilon0"] > d["0.1"]["epsilon0"] > 1e-3


def test_verify_all_is_deterministic(acceptance_log):
    a = json.dumps(verify_all(SEED), sort_keys=False)
    b = json.dumps(verify_all(SEED), sort_keys=False)
    ok = a == b and json.loads(a)["pass"]
    acceptance_log(line("11 determinism", ok, "verify-all twice at seed 0 gives byte-identical JSON"))
    assert a == b
    assert [e["criterion"] for e in json.loads(a)["criteria"]] == list(range(1, len(suites.CRITERIA) + 1))
