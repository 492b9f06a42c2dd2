"""Numbered acceptance criteria, each checked at its stated tolerance.

Every test carries ``@pytest.mark.acceptance(N)``; the conftest hook prints
one PASS/FAIL line per criterion at the end of the run.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from schurcode.approx import (
    dense_oracle_relative_entropy,
    maha_expectations,
    maha_predictors,
    operator_bound_check,
    relative_entropy,
    uniform_state,
)
from schurcode.cli import main
from schurcode.codec import code_from_block_state, code_from_eigenvalues, energy_sandwich
from schurcode.energybound import (
    identity_embedding,
    random_density,
    random_isometry,
    sigma_of_code,
    verify_energy_bound,
)
from schurcode.minimax import (
    equalizer_scan,
    integral,
    jeffreys_weight,
    jn_prior,
    minimax_value,
    qubit_grid,
    sigma_j_state,
)
from schurcode.schur import Spectrum, rsk_oracle_measure, schur_weyl_measure
from schurcode.young import count_diagrams, dims, enumerate_diagrams

QUBIT_INTEGRAL = -0.50737
QUBIT_MINIMAX = -3.5545
COMPARISON_IMPROVEMENT = 1.1589
EXPANSION_TARGET = -5.21702
GRID = (0.6, 0.7, 0.8, 0.9)


def acceptance(criterion, title):
    return pytest.mark.acceptance(criterion, title=title)


def _minimax_cli(capsys):
    start = time.perf_counter()
    code = main(["minimax", "--d", "2"])
    elapsed = time.perf_counter() - start
    out = capsys.readouterr().out
    assert code == 0
    return json.loads(out)["summary"], elapsed


# -- 1 ------------------------------------------------------------------------

C1 = "qubit minimax integral"


@acceptance(1, C1)
def test_c1_qubit_integral_via_cli(capsys):
    summary, elapsed = _minimax_cli(capsys)
    assert summary["integral_log"] == pytest.approx(QUBIT_INTEGRAL, abs=5e-4)
    assert elapsed < 10.0


# -- 2 ------------------------------------------------------------------------

C2 = "qubit minimax value and improvement"


@acceptance(2, C2)
def test_c2_minimax_value(capsys):
    summary, _ = _minimax_cli(capsys)
    assert summary["minimax"] == pytest.approx(QUBIT_MINIMAX, abs=1e-3)
    assert summary["comparison"] == pytest.approx(-2.3956, abs=1e-9)
    assert summary["improvement"] == pytest.approx(COMPARISON_IMPROVEMENT, abs=1e-3)


# -- 3 ------------------------------------------------------------------------

C3 = "redundancy expansion for sigma_U, p=(0.75,0.25)"


def _compensated_uniform(n):
    p = Spectrum((0.75, 0.25))
    return relative_entropy(p, uniform_state(n, 2)) - 1.5 * math.log2(n)


@acceptance(3, C3)
def test_c3_expansion_value_at_4096():
    value = _compensated_uniform(4096)
    assert abs(value - EXPANSION_TARGET) <= 0.05, f"D - 1.5 log n = {value:.5f}, target {EXPANSION_TARGET}"


@acceptance(3, C3)
def test_c3_gap_non_increasing():
    gaps = [abs(_compensated_uniform(n) - EXPANSION_TARGET) for n in (256, 1024, 4096)]
    assert gaps[0] >= gaps[1] >= gaps[2], f"gaps {gaps}"


@acceptance(3, C3)
def test_c3_runtime():
    start = time.perf_counter()
    for n in (256, 1024, 4096):
        _compensated_uniform(n)
    assert time.perf_counter() - start < 60.0


# -- 4 ------------------------------------------------------------------------

C4 = "equalizer property of sigma_J at n=4096"


@pytest.fixture(scope="module")
def jeffreys_scan():
    return equalizer_scan(4096, 2, qubit_grid(GRID))


@acceptance(4, C4)
def test_c4_values_near_minimax(jeffreys_scan):
    off = [v for v in jeffreys_scan.values if abs(v - QUBIT_MINIMAX) > 0.2]
    assert not off, f"compensated values {jeffreys_scan.values} not within 0.2 of {QUBIT_MINIMAX}"


@acceptance(4, C4)
def test_c4_spread(jeffreys_scan):
    assert jeffreys_scan.spread <= 0.15


@acceptance(4, C4)
def test_c4_sup_below_uniform(jeffreys_scan):
    uniform = equalizer_scan(4096, 2, qubit_grid(GRID), state=uniform_state(4096, 2))
    assert jeffreys_scan.sup < uniform.sup


# -- 5 ------------------------------------------------------------------------

C5 = "oracle equivalence"
# every n >= 2 case with d^n <= 6561 has d <= 81; n = 1 is checked over the same d range
RSK_CASES = [(n, d) for d in range(2, 82) for n in range(1, 14) if d ** n <= 6561]
DENSE_CASES = [(n, d) for d in range(2, 244) for n in range(1, 9) if d ** n <= 243]


def _rational_spectrum(d):
    total = d * (d + 1) // 2
    return Spectrum(tuple(Fraction(d - i, total) for i in range(d)))


@acceptance(5, C5)
def test_c5_rsk_oracle_exact():
    bad = []
    for n, d in RSK_CASES:
        p = _rational_spectrum(d)
        if rsk_oracle_measure(p, n).weights != schur_weyl_measure(p, n).weights:
            bad.append((n, d))
    assert not bad, f"mismatch at {bad}"


@acceptance(5, C5)
def test_c5_dense_oracle():
    worst = 0.0
    for n, d in DENSE_CASES:
        p = Spectrum(tuple(float(x) for x in _rational_spectrum(d).probs))
        states = [uniform_state(n, d)] + ([sigma_j_state(n, d)] if d <= 3 else [])
        for sigma in states:
            worst = max(worst, abs(relative_entropy(p, sigma) - dense_oracle_relative_entropy(p, sigma)))
    assert worst <= 1e-8


# -- 6 ------------------------------------------------------------------------

C6 = "structural identities"


@acceptance(6, C6)
def test_c6_dimension_sum():
    for n in range(1, 9):
        for d in range(1, 5):
            pairs = [dims(lam, exact=True) for lam in enumerate_diagrams(n, d)]
            total = sum(pair.su.exact * pair.sym.exact for pair in pairs)
            assert total == d ** n, (n, d)


@acceptance(6, C6)
def test_c6_diagram_count_bound():
    for n in range(1, 101):
        for d in range(1, 5):
            assert count_diagrams(n, d) <= (n + 1) ** (d - 1), (n, d)


@acceptance(6, C6)
def test_c6_operator_bound():
    grids = {
        2: [(p1, 1 - p1) for p1 in np.linspace(0.5, 0.99, 10)],
        3: [(a / (a + b + 1), b / (a + b + 1), 1 / (a + b + 1)) for a, b in
            [(1, 1), (2, 1), (3, 2), (4, 1), (5, 3), (6, 5), (8, 2), (10, 1), (12, 6), (20, 10)]],
    }
    for d, spectra in grids.items():
        for n in range(1, 6):
            for probs in spectra:
                res = operator_bound_check(Spectrum(tuple(probs)), n)
                assert res.holds, (d, n, probs, res.margin)


# -- 7 ------------------------------------------------------------------------

C7 = "coding suite"
CODE_SWEEP = (
    [("uniform", n, 2, (0.75, 0.25)) for n in (1, 2, 5, 10, 50)]
    + [("uniform", n, 3, (0.5, 0.3, 0.2)) for n in (2, 4, 6, 9)]
    + [("jeffreys", n, 2, (0.6, 0.4)) for n in (2, 16, 64, 256, 1024)]
    + [("jeffreys", n, 3, (0.6, 0.3, 0.1)) for n in (3, 7)]
    + [("uniform", 5, 4, (0.4, 0.3, 0.2, 0.1)), ("uniform", 100, 2, (0.9, 0.1))]
    + [("plain", 1, 4, (0.4, 0.3, 0.2, 0.1)), ("plain", 1, 3, (0.7, 0.2, 0.1))]
)


@acceptance(7, C7)
@pytest.mark.parametrize("kind,n,d,p", CODE_SWEEP)
def test_c7_code_invariants(kind, n, d, p):
    if kind == "plain":
        sigma = list(p)
        code = code_from_eigenvalues(sigma)
        source = list(p)
    else:
        sigma = uniform_state(n, d) if kind == "uniform" else sigma_j_state(n, d)
        code = code_from_block_state(sigma)
        source = Spectrum(p)
    assert code.kraft_sum() <= 1
    assert code.is_prefix_free()
    assert code.satisfies_shannon_bounds()
    sandwich = energy_sandwich(code, sigma, source)
    assert sandwich.holds(), (sandwich.lower, sandwich.energy, sandwich.upper)


def test_c7_sweep_size():
    assert len(CODE_SWEEP) == 20


# -- 8 ------------------------------------------------------------------------

C8 = "lower-bound suite"


def _lower_bound_instances():
    yield identity_embedding(2, 2), np.eye(4) / 4
    for seed in range(20):
        n = 2 + seed % 2
        yield random_isometry(n, 2, 10, seed=seed), random_density(2 ** n, seed=100 + seed)


@acceptance(8, C8)
def test_c8_lower_bound_suite():
    start = time.perf_counter()
    count = 0
    for code, rho in _lower_bound_instances():
        rep = sigma_of_code(code)
        assert rep.reconstruction_error <= 1e-8
        assert rep.trace <= math.ceil(code.n * math.log2(code.d)) + 1e-12
        chk = verify_energy_bound(code, rho, rep)
        assert chk.margin >= -1e-8
        count += 1
    assert count == 21
    assert time.perf_counter() - start < 120.0


# -- 9 ------------------------------------------------------------------------

C9 = "multinomial predictors at n=10^4"


@pytest.fixture(scope="module")
def maha():
    p = Spectrum((0.6, 0.4))
    return maha_expectations(p, 10_000), maha_predictors(p, 10_000)


@acceptance(9, C9)
def test_c9_multinomial_expectation(maha):
    (_, multi), (_, expansion) = maha
    assert abs(multi - expansion) <= 0.05, f"E[log multinomial] = {multi:.4f}, prediction {expansion:.4f}"


@acceptance(9, C9)
def test_c9_dimension_gap_limit(maha):
    (diff, _), (limit, _) = maha
    assert abs(diff - limit) <= 0.05, f"E[log dim V - log multinomial] = {diff:.5f}, limit {limit:.5f}"


# -- qutrit substitute --------------------------------------------------------

CQ = "qutrit normalization, oracles, trend, error bar"


@acceptance("d3", CQ)
def test_d3_normalization():
    p = _rational_spectrum(3)
    for n in range(1, 9):
        assert schur_weyl_measure(p, n).total() == 1
        assert sum(jn_prior(n, 3, boundary="nudge").weights.values()) == pytest.approx(1, abs=1e-12)
        assert sum(uniform_state(n, 3).weights.values()) == 1


@acceptance("d3", CQ)
def test_d3_oracles():
    p = _rational_spectrum(3)
    for n in range(1, 9):
        assert rsk_oracle_measure(p, n).weights == schur_weyl_measure(p, n).weights
    q = Spectrum((0.5, 0.3, 0.2))
    for n in range(1, 6):
        sigma = uniform_state(n, 3)
        assert relative_entropy(q, sigma) == pytest.approx(dense_oracle_relative_entropy(q, sigma), abs=1e-8)


@acceptance("d3", CQ)
def test_d3_compensated_trend():
    p = Spectrum((0.5, 0.3, 0.2))
    comp = [relative_entropy(p, uniform_state(n, 3)) - 4 * math.log2(n) for n in (25, 50, 100, 200)]
    assert all(a > b for a, b in zip(comp, comp[1:]))
    steps = [a - b for a, b in zip(comp, comp[1:])]
    assert all(a > b > 0 for a, b in zip(steps, steps[1:]))


@acceptance("d3", CQ)
def test_d3_integral_error_bar():
    res = integral(3, seed=0)
    assert res.error > 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")

        def f(p2, s):
            p3 = s * s
            return jeffreys_weight(np.array([[1 - p2 - p3, p2, p3]]))[0] * 2 * s

        want, _ = integrate.dblquad(f, 0, 1 / math.sqrt(3), lambda s: s * s, lambda s: (1 - s * s) / 2,
                                    epsabs=1e-11, epsrel=1e-8)
    assert abs(res.value - want) < 5 * res.error
    print(f"d=3 integral {res.value:.8g} +- {res.error:.2g} (log2 {res.log2_value:.6f} +- {res.log2_error:.2g})")
