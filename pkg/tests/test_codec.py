import json
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schurcode.approx import relative_entropy, uniform_state
from schurcode.codec import (
    PrefixDecoder,
    average_energy,
    build_prefix_code,
    code_from_block_state,
    code_from_eigenvalues,
    energy_sandwich,
    kraft_sum,
    redundancy,
    shannon_lengths,
)
from schurcode.errors import KraftError, PreconditionError
from schurcode.minimax import sigma_j_state
from schurcode.schur import Spectrum
from schurcode.young import YoungDiagram


def is_prefix_free(words):
    words = sorted(words)
    return all(not b.startswith(a) for a, b in zip(words, words[1:]))


def test_shannon_lengths_examples():
    assert shannon_lengths([F(1, 2), F(1, 4), F(1, 4)]) == [1, 2, 2]
    assert shannon_lengths([0.5, 0.25, 0.25]) == [1, 2, 2]
    assert kraft_sum([1, 2, 2]) == 1
    assert shannon_lengths([0.9, 0.1]) == [1, 4]
    assert kraft_sum([1, 4]) == F(9, 16)
    assert shannon_lengths([F(1, 8)] * 8) == [3] * 8
    assert shannon_lengths([F(1, 3)] * 3) == [2] * 3


def test_shannon_lengths_rejects_bad_inputs():
    with pytest.raises(PreconditionError):
        shannon_lengths([1.0, 0.0])
    with pytest.raises(PreconditionError):
        shannon_lengths([0.6, 0.6])


def test_build_prefix_code_examples():
    assert build_prefix_code([1, 2, 2]) == ["0", "10", "11"]
    assert build_prefix_code([1, 4]) == ["0", "1000"]
    assert build_prefix_code([2, 2, 2, 2]) == ["00", "01", "10", "11"]
    assert build_prefix_code([3, 1, 2]) == ["110", "0", "10"]
    with pytest.raises(KraftError):
        build_prefix_code([1, 1, 2])


def test_code_from_block_state_examples():
    c1 = code_from_block_state(uniform_state(1, 2))
    assert [(b.multiplicity, b.length) for b in c1.blocks] == [(2, 1)]
    assert [w for _, _, w in c1.codewords()] == ["0", "1"]
    c2 = code_from_block_state(uniform_state(2, 2))
    rows = [(b.label, b.eigenvalue, b.multiplicity, b.length) for b in c2.blocks]
    assert rows == [(YoungDiagram((2, 0)), F(1, 6), 3, 3), (YoungDiagram((1, 1)), F(1, 2), 1, 1)]
    assert c2.kraft_sum() == F(7, 8)
    assert sorted(w for _, _, w in c2.codewords()) == ["0", "100", "101", "110"]


def test_jeffreys_code_lengths():
    sigma = sigma_j_state(64, 2)
    code = code_from_block_state(sigma)
    assert code.kraft_sum() <= 1
    min_log = min(sigma.log2_eigenvalue(lam) for lam in sigma.weights)
    assert code.max_length() <= math.ceil(-min_log)
    assert code.is_prefix_free() and code.satisfies_shannon_bounds()


def test_large_block_code_stays_symbolic():
    code = code_from_block_state(uniform_state(1000, 2))
    assert code.atoms == 2 ** 1000
    assert code.kraft_sum() <= 1
    assert code.is_prefix_free() and code.satisfies_shannon_bounds()
    with pytest.raises(PreconditionError):
        code.codewords()
    assert "codeword" not in code.to_dict()["blocks"][0]


def test_average_energy_examples():
    p = Spectrum((0.75, 0.25))
    assert average_energy(code_from_block_state(uniform_state(1, 2)), p) == 1
    own = code_from_eigenvalues([0.9, 0.1])
    assert average_energy(own, [0.9, 0.1]) == pytest.approx(1.3)
    s = energy_sandwich(own, [0.9, 0.1], [0.9, 0.1])
    assert s.lower == pytest.approx(0.4690, abs=1e-4) and s.holds()
    c2 = code_from_block_state(uniform_state(2, 2))
    assert average_energy(c2, p) == pytest.approx(2.625, abs=1e-15)
    sw = energy_sandwich(c2, uniform_state(2, 2), p)
    assert sw.lower == pytest.approx(2.2878, abs=1e-4) and sw.holds()


def test_average_energy_rejects_mismatch():
    code = code_from_block_state(uniform_state(2, 2))
    with pytest.raises(PreconditionError):
        average_energy(code, Spectrum((0.5, 0.3, 0.2)))
    with pytest.raises(PreconditionError):
        average_energy(code_from_eigenvalues([0.5, 0.5]), [0.2, 0.3, 0.5])


def test_redundancy_examples():
    dyadic = code_from_eigenvalues([F(1, 2), F(1, 4), F(1, 4)])
    assert redundancy(dyadic, [0.5, 0.25, 0.25]) == pytest.approx(0, abs=1e-15)
    p = Spectrum((0.75, 0.25))
    sigma = uniform_state(2, 2)
    code = code_from_block_state(sigma)
    r = redundancy(code, p)
    assert r == pytest.approx(1.0024, abs=1e-4)
    d = relative_entropy(p, sigma)
    assert d == pytest.approx(0.6652, abs=1e-4)
    assert 0 <= r - d < 1 and r - d == pytest.approx(0.3372, abs=1e-4)


def test_redundancy_window_jeffreys_4096():
    p = Spectrum((0.75, 0.25))
    sigma = sigma_j_state(4096, 2)
    r = redundancy(code_from_block_state(sigma), p)
    d = relative_entropy(p, sigma)
    assert d <= r < d + 1
    assert d == pytest.approx(18 - 2.55, abs=0.1)


def sweep_instances():
    out = []
    for n in (1, 2, 3, 5, 8, 13, 21):
        out.append(("uniform", n, 2, (0.75, 0.25)))
    for n in (2, 4, 6, 9):
        out.append(("uniform", n, 3, (0.5, 0.3, 0.2)))
    for n in (2, 16, 64, 256, 1024):
        out.append(("jeffreys", n, 2, (0.6, 0.4)))
    for n in (3, 7):
        out.append(("jeffreys", n, 3, (0.6, 0.3, 0.1)))
    out.append(("uniform", 5, 4, (0.4, 0.3, 0.2, 0.1)))
    out.append(("uniform", 100, 2, (0.9, 0.1)))
    return out


@pytest.mark.parametrize("kind,n,d,p", sweep_instances())
def test_code_invariants_sweep(kind, n, d, p):
    sigma = uniform_state(n, d) if kind == "uniform" else sigma_j_state(n, d)
    code = code_from_block_state(sigma)
    assert code.kraft_sum() <= 1
    assert code.is_prefix_free()
    assert code.satisfies_shannon_bounds()
    if code.atoms <= 4096:
        assert is_prefix_free([w for _, _, w in code.codewords()])
    assert energy_sandwich(code, sigma, Spectrum(p)).holds()


def test_concatenated_codes_decode_uniquely():
    a = code_from_block_state(uniform_state(3, 2))
    b = code_from_eigenvalues([0.5, 0.2, 0.2, 0.1])
    table_a = {w: (lab, i) for lab, i, w in a.codewords()}
    table_b = {w: (lab, i) for lab, i, w in b.codewords()}
    # the product code (x, y) -> c_a(x) c_b(y) is itself prefix-free
    joint = {wa + wb: (sa, sb) for wa, sa in table_a.items() for wb, sb in table_b.items()}
    assert is_prefix_free(joint)
    words_a, words_b = list(table_a), list(table_b)
    dec = PrefixDecoder(joint)
    rng = random.Random(0)
    for _ in range(10_000):
        pairs = [(rng.choice(words_a), rng.choice(words_b)) for _ in range(rng.randint(1, 6))]
        bits = "".join(x + y for x, y in pairs)
        assert dec.decode(bits) == [(table_a[x], table_b[y]) for x, y in pairs]


def test_decoder_rejects_garbage():
    dec = code_from_eigenvalues([0.5, 0.25]).decoder()
    with pytest.raises(ValueError):
        dec.decode("11")


def test_json_export():
    code = code_from_block_state(uniform_state(2, 2))
    doc = json.loads(code.to_json())
    assert doc["kraft_sum_exact"] == "7/8"
    assert doc["blocks"][0] == {"block": "(2,0)", "eigenvalue": pytest.approx(1 / 6),
                                "log2_eigenvalue": pytest.approx(-math.log2(6)),
                                "multiplicity": 3, "length": 3, "codeword": "100"}


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=1000), min_size=1, max_size=40))
def test_random_spectra_give_valid_codes(raw):
    total = sum(raw)
    eigs = [F(x, total) for x in raw]
    code = code_from_eigenvalues(eigs)
    assert code.kraft_sum() <= 1
    assert code.satisfies_shannon_bounds()
    assert is_prefix_free([w for _, _, w in code.codewords()])
    probs = [float(e) for e in eigs]
    assert energy_sandwich(code, probs, probs).holds()
