"""Prefix codes induced by block states.

A state's eigenvalues give Shannon lengths ``ceil(-log2 lambda)``; a
canonical prefix code with those lengths then defines a prefix quantum
lossless code on the state's eigenbasis.  Block states have huge
degenerate eigenspaces, so codes are kept as (eigenvalue, multiplicity,
length) blocks and every codeword in a block is one of a contiguous run of
canonical codewords.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .approx import BlockState, measure, relative_entropy
from .errors import KraftError, PreconditionError
from .schur import Spectrum

CODEWORD_CAP = 1 << 16


def _ceil_neg_log2_exact(q: Fraction) -> int:
    # smallest l >= 0 with 2^-l <= q
    a, b = q.numerator, q.denominator
    if a >= b:
        return 0
    ell = max((b // a).bit_length() - 1, 0)
    while (a << ell) < b:
        ell += 1
    while ell > 0 and (a << (ell - 1)) >= b:
        ell -= 1
    return ell


def _ceil_neg_log2(value=None, log2_value: float | None = None) -> int:
    if isinstance(value, Fraction):
        return _ceil_neg_log2_exact(value)
    if log2_value is None:
        log2_value = math.log2(value)
    return max(0, math.ceil(-log2_value))


def shannon_lengths(eigenvalues: Sequence) -> list[int]:
    """``ceil(-log2 p_i)`` for each eigenvalue; Fractions are handled exactly."""
    vals = list(eigenvalues)
    for v in vals:
        if not v > 0:
            raise PreconditionError(f"eigenvalues must be positive, got {v}")
    total = sum(vals) if all(isinstance(v, Fraction) for v in vals) else math.fsum(float(v) for v in vals)
    if total > 1 + 1e-12:
        raise PreconditionError(f"eigenvalues sum to {float(total)} > 1")
    return [_ceil_neg_log2(v) for v in vals]


def kraft_sum(lengths: Iterable[int], multiplicities: Iterable[int] | None = None) -> Fraction:
    lengths = list(lengths)
    mults = [1] * len(lengths) if multiplicities is None else list(multiplicities)
    return sum((Fraction(m, 1 << ell) for ell, m in zip(lengths, mults)), Fraction(0))


def _canonical_firsts(lengths: Sequence[int], mults: Sequence[int]) -> list[int]:
    # canonical assignment: sort by (length, position), count up, shift left
    if kraft_sum(lengths, mults) > 1:
        raise KraftError(f"Kraft sum {float(kraft_sum(lengths, mults))} exceeds 1")
    order = sorted(range(len(lengths)), key=lambda i: (lengths[i], i))
    firsts = [0] * len(lengths)
    code, prev = 0, None
    for i in order:
        if prev is not None:
            code <<= lengths[i] - prev
        firsts[i] = code
        code += mults[i]
        prev = lengths[i]
    return firsts


def _bits(value: int, length: int) -> str:
    return format(value, "b").zfill(length) if length else ""


def build_prefix_code(lengths: Sequence[int]) -> list[str]:
    """Canonical codewords for the given lengths, in input order.

    >>> build_prefix_code([1, 2, 2])
    ['0', '10', '11']
    """
    lengths = list(lengths)
    firsts = _canonical_firsts(lengths, [1] * len(lengths))
    return [_bits(c, ell) for c, ell in zip(firsts, lengths)]


@dataclass(frozen=True)
class CodeBlock:
    label: object
    multiplicity: int
    eigenvalue: object
    log2_eigenvalue: float
    length: int
    first_codeword: int

    def codeword(self, index: int) -> str:
        if not 0 <= index < self.multiplicity:
            raise IndexError(index)
        return _bits(self.first_codeword + index, self.length)


@dataclass(frozen=True)
class SpectralCode:
    """Canonical prefix code over an eigenbasis, grouped into blocks of
    equal eigenvalue.  ``n``/``d`` are set when the blocks are Young
    diagrams of a block state."""

    blocks: tuple[CodeBlock, ...]
    n: int | None = None
    d: int | None = None

    @property
    def atoms(self) -> int:
        return sum(b.multiplicity for b in self.blocks)

    def kraft_sum(self) -> Fraction:
        return kraft_sum([b.length for b in self.blocks], [b.multiplicity for b in self.blocks])

    def max_length(self) -> int:
        return max(b.length for b in self.blocks)

    def is_prefix_free(self) -> bool:
        """Exact check: the dyadic intervals covered by each block's codeword
        run must be pairwise disjoint."""
        spans = sorted(
            (Fraction(b.first_codeword, 1 << b.length), Fraction(b.first_codeword + b.multiplicity, 1 << b.length))
            for b in self.blocks
        )
        return all(hi <= lo for (_, hi), (lo, _) in zip(spans, spans[1:]))

    def satisfies_shannon_bounds(self) -> bool:
        """``lambda >= 2^{-l} > lambda / 2`` for every block."""
        for b in self.blocks:
            if isinstance(b.eigenvalue, Fraction):
                lo = Fraction(1, 1 << b.length)
                if not (b.eigenvalue >= lo > b.eigenvalue / 2):
                    return False
            elif not (-b.log2_eigenvalue <= b.length < -b.log2_eigenvalue + 1):
                return False
        return True

    def codewords(self, cap: int = CODEWORD_CAP) -> list[tuple[object, int, str]]:
        """Every (label, index, codeword), ordered by block then index."""
        if self.atoms > cap:
            raise PreconditionError(f"{self.atoms} codewords exceed the enumeration cap {cap}")
        return [(b.label, i, b.codeword(i)) for b in self.blocks for i in range(b.multiplicity)]

    def decoder(self, cap: int = CODEWORD_CAP) -> "PrefixDecoder":
        return PrefixDecoder({w: (label, i) for label, i, w in self.codewords(cap)})

    def to_dict(self, cap: int = CODEWORD_CAP) -> dict:
        explicit = self.atoms <= cap
        blocks = []
        for b in self.blocks:
            entry = {
                "block": str(b.label),
                "eigenvalue": float(b.eigenvalue),
                "log2_eigenvalue": b.log2_eigenvalue,
                "multiplicity": b.multiplicity,
                "length": b.length,
            }
            if explicit:
                entry["codeword"] = b.codeword(0)
            blocks.append(entry)
        kraft = self.kraft_sum()
        return {
            "n": self.n,
            "d": self.d,
            "atoms": self.atoms,
            "kraft_sum": float(kraft),
            "kraft_sum_exact": f"{kraft.numerator}/{kraft.denominator}",
            "blocks": blocks,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


class PrefixDecoder:
    """Greedy decoder for a prefix-free codeword table."""

    def __init__(self, table: dict[str, object]):
        self.table = dict(table)
        self.max_len = max((len(w) for w in self.table), default=0)

    def read(self, bits: str, pos: int = 0) -> tuple[object, int]:
        """Decode one symbol starting at ``pos``; returns (symbol, new position)."""
        for end in range(pos, min(len(bits), pos + self.max_len) + 1):
            hit = self.table.get(bits[pos:end])
            if hit is not None:
                return hit, end
        raise ValueError(f"no codeword matches at bit {pos}")

    def decode(self, bits: str) -> list:
        out, pos = [], 0
        while pos < len(bits):
            sym, pos = self.read(bits, pos)
            out.append(sym)
        return out


def _make_code(labels, mults, eigs, log2s, n=None, d=None) -> SpectralCode:
    lengths = [_ceil_neg_log2(e, l2) for e, l2 in zip(eigs, log2s)]
    firsts = _canonical_firsts(lengths, mults)
    blocks = tuple(
        CodeBlock(lab, m, e, l2, ell, f) for lab, m, e, l2, ell, f in zip(labels, mults, eigs, log2s, lengths, firsts)
    )
    return SpectralCode(blocks, n, d)


def code_from_eigenvalues(eigenvalues: Sequence) -> SpectralCode:
    """Shannon code for an explicit list of eigenvalues (one atom each)."""
    eigs = list(eigenvalues)
    shannon_lengths(eigs)  # validation
    log2s = [float(math.log2(e.numerator) - math.log2(e.denominator)) if isinstance(e, Fraction) else math.log2(e)
             for e in eigs]
    return _make_code(list(range(len(eigs))), [1] * len(eigs), eigs, log2s)


def code_from_block_state(sigma: BlockState) -> SpectralCode:
    """Shannon code for a block state; each diagram becomes one block of
    ``dim U * dim V`` atoms sharing the eigenvalue ``w / (dim U dim V)``."""
    labels, mults, eigs, log2s = [], [], [], []
    for lam, w in sigma.weights.items():
        if w == 0:
            raise PreconditionError(f"block {lam} has zero weight; the state must have full support")
        labels.append(lam)
        mults.append(sigma.multiplicity(lam))
        l2 = sigma.log2_eigenvalue(lam)
        log2s.append(l2)
        eigs.append(sigma.eigenvalue(lam) if isinstance(w, Fraction) else 2.0 ** l2)
    return _make_code(labels, mults, eigs, log2s, sigma.n, sigma.d)


def _diagonal(code: SpectralCode, p) -> list[tuple[float, int]]:
    # (probability mass, length) pairs of rho in the code's eigenbasis
    if code.n is not None:
        if not isinstance(p, Spectrum):
            p = Spectrum(tuple(p))
        if p.d != code.d:
            raise PreconditionError(f"spectrum length {p.d} does not match code depth {code.d}")
        weights = measure(p, code.n).weights
        return [(float(weights[b.label]), b.length) for b in code.blocks]
    probs = p.as_float() if isinstance(p, Spectrum) else tuple(float(x) for x in p)
    if len(probs) != code.atoms or any(b.multiplicity != 1 for b in code.blocks):
        raise PreconditionError("diagonal probabilities must match the code's atoms one to one")
    return [(q, b.length) for q, b in zip(probs, code.blocks)]


def average_energy(code: SpectralCode, p) -> float:
    """``Tr H U rho U^dagger``: expected codeword length under ``rho``.

    For a block-state code ``p`` is the spectrum of the single-copy state and
    each block is weighted by Q_p; for a plain code ``p`` lists the diagonal
    of rho in the code's eigenbasis.
    """
    return math.fsum(q * ell for q, ell in _diagonal(code, p))


def _entropy_term(code: SpectralCode, p) -> float:
    if code.n is not None:
        spectrum = p if isinstance(p, Spectrum) else Spectrum(tuple(p))
        return code.n * spectrum.entropy()
    probs = p.as_float() if isinstance(p, Spectrum) else tuple(float(x) for x in p)
    return -math.fsum(q * math.log2(q) for q in probs if q > 0)


def redundancy(code: SpectralCode, p) -> float:
    """Average energy minus the von Neumann entropy of the source."""
    return average_energy(code, p) - _entropy_term(code, p)


@dataclass(frozen=True)
class EnergySandwich:
    entropy: float
    divergence: float
    energy: float

    @property
    def lower(self) -> float:
        return self.entropy + self.divergence

    @property
    def upper(self) -> float:
        return self.lower + 1.0

    @property
    def slack(self) -> float:
        return self.energy - self.lower

    def holds(self, tol: float = 1e-9) -> bool:
        return self.lower - tol <= self.energy <= self.upper + tol


def energy_sandwich(code: SpectralCode, sigma, p) -> EnergySandwich:
    """Check ``H + D <= energy <= H + D + 1`` where D is the divergence of
    the source from the state the code was built for.

    ``sigma`` is the BlockState for block codes, or the eigenvalue list for
    plain codes.
    """
    energy = average_energy(code, p)
    entropy = _entropy_term(code, p)
    if code.n is not None:
        spectrum = p if isinstance(p, Spectrum) else Spectrum(tuple(p))
        div = relative_entropy(spectrum, sigma)
    else:
        probs = p.as_float() if isinstance(p, Spectrum) else tuple(float(x) for x in p)
        div = math.fsum(q * (math.log2(q) - math.log2(float(s))) for q, s in zip(probs, sigma) if q > 0)
    return EnergySandwich(entropy, div, energy)
