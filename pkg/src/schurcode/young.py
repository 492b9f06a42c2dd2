"""Young diagrams of bounded depth and the dimensions of the matching
irreducible representations of SU(d) and S_n.

All logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple

# Above this size dim_sym switches to the log-gamma route unless exact
# integers are requested explicitly.
EXACT_LIMIT = 300

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class YoungDiagram:
    """Row lengths ``n_1 >= ... >= n_d >= 0``, padded with zeros to depth d."""

    rows: tuple[int, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise ValueError("a Young diagram needs depth >= 1")
        for r in rows:
            if not isinstance(r, int) or isinstance(r, bool) or r < 0:
                raise ValueError(f"rows must be nonnegative integers, got {rows}")
        if any(a < b for a, b in zip(rows, rows[1:])):
            raise ValueError(f"rows must be non-increasing, got {rows}")

    @property
    def size(self) -> int:
        return sum(self.rows)

    @property
    def depth(self) -> int:
        return len(self.rows)

    @property
    def length(self) -> int:
        """Number of nonzero rows."""
        return sum(1 for r in self.rows if r)

    def padded(self, d: int) -> "YoungDiagram":
        if self.length > d:
            raise ValueError(f"{self} does not fit in depth {d}")
        rows = tuple(r for r in self.rows if r)
        return YoungDiagram(rows + (0,) * (d - len(rows)))

    def __iter__(self) -> Iterator[int]:
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.rows)) + ")"


class Dimension(NamedTuple):
    exact: int | None
    log2: float


class DimPair(NamedTuple):
    su: Dimension
    sym: Dimension


def _check_nd(n: int, d: int) -> None:
    if d < 1:
        raise ValueError(f"depth must be >= 1, got d={d}")
    if n < 0:
        raise ValueError(f"size must be >= 0, got n={n}")


def _partitions(n: int, parts: int, largest: int) -> Iterator[tuple[int, ...]]:
    # lexicographically decreasing partitions of n into <= parts parts <= largest
    if n == 0:
        yield ()
        return
    if parts == 0:
        return
    lo = -(-n // parts)
    for first in range(min(n, largest), lo - 1, -1):
        for rest in _partitions(n - first, parts - 1, first):
            yield (first,) + rest


def enumerate_diagrams(n: int, d: int) -> list[YoungDiagram]:
    """All diagrams of size n and depth <= d, lexicographically decreasing.

    >>> [str(l) for l in enumerate_diagrams(4, 2)]
    ['(4,0)', '(3,1)', '(2,2)']
    """
    _check_nd(n, d)
    return [YoungDiagram(p + (0,) * (d - len(p))) for p in _partitions(n, d, n)]


@lru_cache(maxsize=None)
def count_diagrams(n: int, d: int) -> int:
    """Number of partitions of n into at most d parts."""
    _check_nd(n, d)
    # table[k][m]: partitions of m into parts of size <= k (conjugate view)
    row = [1] + [0] * n
    for k in range(1, d + 1):
        for m in range(k, n + 1):
            row[m] += row[m - k]
    return row[n]


@lru_cache(maxsize=None)
def dim_su(lam: YoungDiagram) -> Dimension:
    """Weyl dimension of the SU(d) irrep with highest weight ``lam``."""
    rows = lam.rows
    d = len(rows)
    # pairs of zero rows contribute (j - i)/(j - i) = 1, so only i < length matters
    num = den = 1
    for i in range(lam.length):
        for j in range(i + 1, d):
            num *= rows[i] - rows[j] + j - i
            den *= j - i
    exact = num // den
    return Dimension(exact, math.log2(exact))


def _shifted(lam: YoungDiagram) -> list[int]:
    # dim V depends only on the nonzero rows, so use the shortest padding
    rows = lam.rows[: max(lam.length, 1)]
    d = len(rows)
    return [r + d - 1 - i for i, r in enumerate(rows)]


def _dim_sym_exact(lam: YoungDiagram) -> int:
    ell = _shifted(lam)
    num = math.factorial(lam.size)
    for i in range(len(ell)):
        for j in range(i + 1, len(ell)):
            num *= ell[i] - ell[j]
    den = 1
    for x in ell:
        den *= math.factorial(x)
    q, r = divmod(num, den)
    assert r == 0
    return q


def log2_dim_sym_lgamma(lam: YoungDiagram) -> float:
    """log2 dim V_lam through log-gamma, valid at any size."""
    ell = _shifted(lam)
    acc = [math.lgamma(lam.size + 1)]
    for i in range(len(ell)):
        for j in range(i + 1, len(ell)):
            acc.append(math.log(ell[i] - ell[j]))
        acc.append(-math.lgamma(ell[i] + 1))
    return math.fsum(acc) / _LN2


@lru_cache(maxsize=None)
def _dim_sym_cached(lam: YoungDiagram, exact: bool) -> Dimension:
    if exact:
        value = _dim_sym_exact(lam)
        return Dimension(value, math.log2(value))
    return Dimension(None, log2_dim_sym_lgamma(lam))


def dim_sym(lam: YoungDiagram, exact: bool | None = None) -> Dimension:
    """Dimension of the S_n irrep ``lam`` (number of standard tableaux).

    Uses ``n! prod_{i<j}(l_i - l_j) / prod_i l_i!`` with ``l_i = n_i + d - i``.
    ``exact=None`` picks big integers up to EXACT_LIMIT and log-gamma beyond.
    """
    if exact is None:
        exact = lam.size <= EXACT_LIMIT
    return _dim_sym_cached(lam, bool(exact))


def dims(lam: YoungDiagram, exact: bool | None = None) -> DimPair:
    return DimPair(dim_su(lam), dim_sym(lam, exact))


def multinomial_log(lam: YoungDiagram) -> float:
    """log2(n! / prod n_i!) via log-gamma."""
    acc = [math.lgamma(lam.size + 1)]
    acc.extend(-math.lgamma(r + 1) for r in lam.rows)
    return math.fsum(acc) / _LN2


def multinomial_exact(lam: YoungDiagram) -> int:
    out = math.factorial(lam.size)
    for r in lam.rows:
        out //= math.factorial(r)
    return out
