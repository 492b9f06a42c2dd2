"""Schur polynomials at probability vectors and the Schur-Weyl measure.

``Q_p(lam) = s_lam(p) * dim V_lam`` is the weight the n-copy state of a
diagonal state with spectrum ``p`` puts on the block labelled ``lam``.
Float evaluation is done in the natural-log domain; a rational mode with
``fractions.Fraction`` inputs is exact.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import SizeCapError, SpectrumError
from .young import YoungDiagram, dim_sym, enumerate_diagrams

SUM_TOL = 1e-12
ORACLE_MAX_WORDS = 6561


@dataclass(frozen=True)
class Spectrum:
    """Strictly positive probability vector.

    Entries are floats, or all ``Fraction`` for the exact mode.
    """

    probs: tuple

    def __post_init__(self):
        probs = tuple(self.probs)
        if not probs:
            raise SpectrumError("empty spectrum")
        if all(isinstance(x, (Fraction, int)) and not isinstance(x, bool) for x in probs):
            probs = tuple(Fraction(x) for x in probs)
            if sum(probs) != 1:
                raise SpectrumError(f"spectrum must sum to 1 exactly, got {sum(probs)}")
        else:
            probs = tuple(float(x) for x in probs)
            if abs(math.fsum(probs) - 1.0) > SUM_TOL:
                raise SpectrumError(f"spectrum must sum to 1, got {math.fsum(probs)!r}")
        if any(not x > 0 for x in probs):
            raise SpectrumError(f"spectrum entries must be strictly positive: {probs}")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def parse(cls, text: str) -> "Spectrum":
        """Parse ``"0.75,0.25"`` or ``"3/4,1/4"`` (all-rational input stays exact)."""
        items = [t.strip() for t in text.split(",") if t.strip()]
        if items and all("/" in t for t in items):
            return cls(tuple(Fraction(t) for t in items))
        try:
            return cls(tuple(float(t) for t in items))
        except ValueError as exc:
            raise SpectrumError(f"cannot parse spectrum {text!r}") from exc

    @classmethod
    def uniform(cls, d: int, exact: bool = False) -> "Spectrum":
        return cls((Fraction(1, d),) * d if exact else (1.0 / d,) * d)

    @property
    def d(self) -> int:
        return len(self.probs)

    @property
    def exact(self) -> bool:
        return isinstance(self.probs[0], Fraction)

    def sorted(self) -> "Spectrum":
        return Spectrum(tuple(sorted(self.probs, reverse=True)))

    def as_float(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self.probs)

    @property
    def strictly_decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.probs, self.probs[1:]))

    def entropy(self) -> float:
        """Shannon entropy in bits (equal to the von Neumann entropy of the
        diagonal state)."""
        return -math.fsum(x * math.log2(x) for x in self.as_float())

    def __str__(self) -> str:
        return ",".join(str(x) for x in self.probs)


def _log_schur_two(a: int, b: int, x: float, y: float) -> float:
    # s_(a,b)(x, y), natural log, stable bialternant for x >= y > 0
    if x < y:
        x, y = y, x
    m = a - b
    base = b * (math.log(x) + math.log(y))
    if x == y:
        return base + m * math.log(x) + math.log(m + 1)
    log_ratio = math.log1p((y - x) / x)
    return base + (m + 1) * math.log(x) + math.log(-math.expm1((m + 1) * log_ratio)) - math.log(x - y)


def _log_schur_two_grid(a: np.ndarray, b: np.ndarray, x: float, y: float) -> np.ndarray:
    if x < y:
        x, y = y, x
    m = a - b
    base = b * (math.log(x) + math.log(y))
    if x == y:
        return base + m * math.log(x) + np.log(m + 1)
    log_ratio = math.log1p((y - x) / x)
    return base + (m + 1) * math.log(x) + np.log(-np.expm1((m + 1) * log_ratio)) - math.log(x - y)


class _SchurEvaluator:
    """Memoised branching-rule evaluation for one spectrum.

    ``s_lam(x_1..x_k) = sum_{mu interlacing lam} x_k^{|lam|-|mu|} s_mu(x_1..x_{k-1})``
    bottoms out at the closed two-variable form, so every summand is a
    nonnegative monomial sum and no cancellation occurs for k >= 3.
    """

    def __init__(self, probs: Sequence):
        self.probs = tuple(probs)
        self.exact = isinstance(self.probs[0], Fraction)
        self.cache: dict = {}
        if not self.exact:
            self.logs = [math.log(float(x)) for x in self.probs]

    def __call__(self, rows: tuple[int, ...]):
        rows = tuple(rows)
        if len(rows) != len(self.probs):
            raise ValueError(f"diagram depth {len(rows)} != spectrum length {len(self.probs)}")
        return self.value(rows, len(rows))

    def value(self, rows: tuple[int, ...], k: int):
        key = (rows, k)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        # iterative rather than recursive so that large d cannot hit the
        # recursion limit: collect the shapes needed per level, then fill upward
        base = 2 if self.exact else 3
        levels = {k: {rows}}
        j = k
        while j > base and levels[j]:
            levels[j - 1] = {mu for lam in levels[j] if (lam, j) not in self.cache for mu in _interlacing(lam)}
            j -= 1
        for j in sorted(levels):
            for lam in levels[j]:
                if (lam, j) not in self.cache:
                    self.cache[(lam, j)] = self._direct(lam, j) if j <= base else self._combine(lam, j)
        return self.cache[key]

    def _direct(self, rows, k):
        xs = self.probs
        if self.exact:
            if k == 1:
                return xs[0] ** rows[0]
            a, b = rows
            x, y = xs[0], xs[1]
            if x == y:
                return (a - b + 1) * x ** (a + b)
            return (x * y) ** b * (x ** (a - b + 1) - y ** (a - b + 1)) / (x - y)
        if k == 1:
            return rows[0] * self.logs[0]
        if k == 2:
            return _log_schur_two(rows[0], rows[1], xs[0], xs[1])
        size = sum(rows)
        m1 = np.arange(rows[1], rows[0] + 1)
        m2 = np.arange(rows[2], rows[1] + 1)
        a, b = np.meshgrid(m1, m2, indexing="ij")
        terms = (size - a - b) * self.logs[2] + _log_schur_two_grid(a, b, xs[0], xs[1])
        return float(logsumexp(terms))

    def _combine(self, rows, k):
        size = sum(rows)
        lower = [(mu, self.cache[(mu, k - 1)]) for mu in _interlacing(rows)]
        if self.exact:
            x = self.probs[k - 1]
            total = Fraction(0)
            for mu, val in lower:
                total += x ** (size - sum(mu)) * val
            return total
        lx = self.logs[k - 1]
        return float(logsumexp([(size - sum(mu)) * lx + val for mu, val in lower]))


def _interlacing(rows: tuple[int, ...]) -> Iterable[tuple[int, ...]]:
    # mu of length k-1 with rows[i] >= mu[i] >= rows[i+1]
    ranges = [range(rows[i + 1], rows[i] + 1) for i in range(len(rows) - 1)]
    return itertools.product(*ranges)


def schur_poly(lam: YoungDiagram, p: Spectrum):
    """``s_lam(p)``: a Fraction in exact mode, a float otherwise (may underflow;
    use :func:`log2_schur_poly` for large diagrams)."""
    ev = _SchurEvaluator(p.probs)
    out = ev(lam.rows)
    return out if ev.exact else math.exp(out)


def log2_schur_poly(lam: YoungDiagram, p: Spectrum) -> float:
    ev = _SchurEvaluator(p.as_float())
    return ev(lam.rows) / math.log(2.0)


@dataclass(frozen=True)
class SchurWeylMeasure:
    n: int
    d: int
    weights: dict = field(repr=False)
    log_weights: dict | None = field(default=None, repr=False, compare=False)

    @property
    def exact(self) -> bool:
        return isinstance(next(iter(self.weights.values())), Fraction)

    def total(self):
        vals = list(self.weights.values())
        return sum(vals) if self.exact else math.fsum(vals)

    def expectation(self, f) -> float:
        """``sum_lam Q(lam) f(lam)``, skipping blocks whose float weight underflows."""
        return math.fsum(float(q) * f(lam) for lam, q in self.weights.items() if q)

    def mode(self) -> YoungDiagram:
        if self.log_weights is not None:
            return max(self.log_weights, key=self.log_weights.get)
        return max(self.weights, key=self.weights.get)


def schur_weyl_measure(p: Spectrum, n: int) -> SchurWeylMeasure:
    """Block weights ``Q_p(lam) = s_lam(p) dim V_lam`` over all depth-d diagrams."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    diagrams = enumerate_diagrams(n, p.d)
    ev = _SchurEvaluator(p.probs)
    if ev.exact:
        weights = {lam: ev(lam.rows) * dim_sym(lam, exact=True).exact for lam in diagrams}
        return SchurWeylMeasure(n, p.d, weights)
    ln2 = math.log(2.0)
    logs = {lam: ev(lam.rows) + dim_sym(lam).log2 * ln2 for lam in diagrams}
    weights = {lam: math.exp(v) for lam, v in logs.items()}
    return SchurWeylMeasure(n, p.d, weights, logs)


def rsk_shape(word: Sequence[int], d: int) -> tuple[int, ...]:
    """Shape of the RSK insertion tableau of ``word`` (letters 0..d-1)."""
    tableau: list[list[int]] = []
    for x in word:
        for row in tableau:
            pos = bisect_right(row, x)
            if pos == len(row):
                row.append(x)
                break
            row[pos], x = x, row[pos]
        else:
            tableau.append([x])
    shape = [len(r) for r in tableau]
    return tuple(shape + [0] * (d - len(shape)))


def rsk_oracle_measure(p: Spectrum, n: int) -> SchurWeylMeasure:
    """Brute-force shape distribution of RSK on i.i.d. words drawn from ``p``.

    Enumerates all ``d^n`` words, so only runs for ``d^n <= 6561``.
    """
    d = p.d
    if d ** n > ORACLE_MAX_WORDS:
        raise SizeCapError(f"oracle capped at d^n <= {ORACLE_MAX_WORDS}, got {d}^{n}")
    # words sharing (shape, content) have equal probability
    counts: Counter = Counter()
    for word in itertools.product(range(d), repeat=n):
        # sparse content: (letter, multiplicity) for letters that occur
        content = tuple(sorted(Counter(word).items()))
        counts[(rsk_shape(word, d), content)] += 1
    zero = Fraction(0) if p.exact else 0.0
    weights = {lam: zero for lam in enumerate_diagrams(n, d)}
    for (shape, content), c in sorted(counts.items()):
        prob = 1 if p.exact else 1.0
        for letter, e in content:
            prob *= p.probs[letter] ** e
        weights[YoungDiagram(shape)] += c * prob
    return SchurWeylMeasure(n, d, weights)
