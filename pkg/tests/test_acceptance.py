"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` (or `renyi-lab verify all`)
to see the per-criterion lines and margin tables.  Tolerances are pinned
inside renyilab.verify; nothing here is calibrated after the fact.
"""

import pytest

from renyilab.verify import run_suite

CRITERIA = [
    ("1", "binary-forward",
     "binary forward closed form, 405-point grid, <= 1e-4 + gap, <= 60 s"),
    ("2", "binary-dual",
     "q in (0,1) and reverse closed forms: lambda* roots to 1e-8, values to 1e-3 bits"),
    ("3", "rates",
     "R_q = 1 - H_q(eps), Rhat_q = 1 - H(eps): closed form 1e-10, variational 1e-3"),
    ("4", "oneshot-sandwich",
     "lower <= exact ensemble moment <= upper on the full small grid, <= 120 s"),
    ("5", "iid-exponent",
     "regression slope within 20% of min{gamma(1), gamma(q-1)} / the (0,2] branch"),
    ("6", "packing-covering",
     "covering deviation medians decrease in n; zero packing exceedances in 100 trials"),
    ("7", "stability-identity",
     "stability identity to 1e-10 on 500 random sets, q in {-2, 0.5, 2, 64}"),
    ("8", "delta-star",
     "closed-form delta* matches the 1e5-point grid minimum within 1e-6"),
    ("9", "anticontractivity-witness",
     "zero witness violations; random-subset achievers within 0.08 bits in >= 90% of seeds"),
    ("10", "single-letter",
     "both single-letter characterizations agree per sign clause; symbolic clauses exact"),
    ("11", "properties",
     "skew symmetry, monotonicity, tensorization, type counts, seed determinism"),
]


@pytest.mark.parametrize("number,suite,label", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_acceptance_criterion(number, suite, label):
    result = run_suite(suite)
    status = "PASS" if result.passed else "FAIL"
    print(f"\n[{status}] criterion {number} ({suite}): {label} -- {result.summary}")
    if not result.passed:
        for row in result.rows[:20]:
            print("   ", row)
    assert result.passed, f"criterion {number} ({suite}) failed: {result.summary}"
