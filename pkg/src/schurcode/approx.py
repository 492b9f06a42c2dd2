"""Universal block states, their exact relative entropy to n-copy states,
and the asymptotic predictors for it.

A block state ``sigma = sum_lam w(lam) I_lam / (dim U_lam dim V_lam)``
commutes with every ``rho(p)^{otimes n}``, so

    D(rho^{otimes n} || sigma)
        = sum_lam Q_p(lam) [-log w(lam) + log dim U_lam + log dim V_lam] - n H(p).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import dense
from .errors import DivergenceError, SpectrumError
from .schur import SchurWeylMeasure, Spectrum, schur_weyl_measure
from .young import YoungDiagram, count_diagrams, dim_su, dim_sym, enumerate_diagrams, multinomial_log

WEIGHT_TOL = 1e-10
EXACT_ENTROPY_MAX_N = 20
LOG2_2PIE = math.log2(2 * math.pi * math.e)


def _log2(x) -> float:
    if isinstance(x, Fraction):
        return math.log2(x.numerator) - math.log2(x.denominator)
    return math.log2(x)


@dataclass(frozen=True, eq=False)
class BlockState:
    """Permutation- and SU(d)-invariant state given by its block weights.

    Zero weights are allowed (the divergence to any faithful n-copy state is
    then infinite); negative weights are not.
    """

    n: int
    d: int
    weights: Mapping[YoungDiagram, object] = field(repr=False)

    def __post_init__(self):
        weights = dict(self.weights)
        for lam, w in weights.items():
            if lam.size != self.n or lam.depth != self.d:
                raise ValueError(f"diagram {lam} does not belong to Y_{self.n}^{self.d}")
            if w < 0:
                raise ValueError(f"negative block weight {w} at {lam}")
        vals = list(weights.values())
        if all(isinstance(w, Fraction) for w in vals):
            ok = sum(vals) == 1
        else:
            ok = abs(math.fsum(float(w) for w in vals) - 1.0) <= WEIGHT_TOL
        if not ok:
            raise ValueError("block weights must sum to 1")
        object.__setattr__(self, "weights", weights)

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights.values())

    @property
    def full_support(self) -> bool:
        return len(self.weights) == count_diagrams(self.n, self.d) and all(w > 0 for w in self.weights.values())

    def multiplicity(self, lam: YoungDiagram) -> int:
        return dim_su(lam).exact * dim_sym(lam, exact=True).exact

    def eigenvalue(self, lam: YoungDiagram):
        """Per-block eigenvalue ``w / (dim U dim V)``; exact for rational weights."""
        w = self.weights.get(lam, 0)
        if isinstance(w, Fraction):
            return w / self.multiplicity(lam)
        return 2.0 ** self.log2_eigenvalue(lam)

    def log2_eigenvalue(self, lam: YoungDiagram) -> float:
        w = self.weights.get(lam, 0)
        if w == 0:
            return -math.inf
        return _log2(w) - dim_su(lam).log2 - dim_sym(lam).log2

    def total_variation(self, other: "BlockState") -> float:
        keys = set(self.weights) | set(other.weights)
        return 0.5 * math.fsum(abs(float(self.weights.get(k, 0)) - float(other.weights.get(k, 0))) for k in keys)


def uniform_state(n: int, d: int) -> BlockState:
    """``sigma_U``: equal weight on every diagram."""
    if n < 1:
        raise ValueError("n must be >= 1")
    diagrams = enumerate_diagrams(n, d)
    w = Fraction(1, len(diagrams))
    return BlockState(n, d, {lam: w for lam in diagrams})


def twirled_state(p: Spectrum, n: int) -> BlockState:
    """SU(d)-average of ``rho(p)^{otimes n}``; its block weights are Q_p."""
    return BlockState(n, p.d, measure(p, n).weights)


def measure(p: Spectrum, n: int) -> SchurWeylMeasure:
    """Cached Schur-Weyl measure. Treat the returned weights as read-only."""
    # float and Fraction spectra can compare equal, so exactness is part of the key
    return _cached_measure(p, p.exact, n)


@lru_cache(maxsize=128)
def _cached_measure(p: Spectrum, exact: bool, n: int) -> SchurWeylMeasure:
    return schur_weyl_measure(p, n)


def _block_cost(lam: YoungDiagram, w) -> float:
    return -_log2(w) + dim_su(lam).log2 + dim_sym(lam).log2


def cross_entropy(p: Spectrum, sigma: BlockState) -> float:
    """``-Tr rho(p)^{otimes n} log sigma`` in bits."""
    if p.d != sigma.d:
        raise ValueError(f"spectrum length {p.d} != state depth {sigma.d}")
    use_exact = p.exact and sigma.exact and sigma.n <= EXACT_ENTROPY_MAX_N
    q_meas = measure(p, sigma.n) if use_exact or not p.exact else measure(Spectrum(p.as_float()), sigma.n)
    terms = []
    for lam, q in q_meas.weights.items():
        w = sigma.weights.get(lam, 0)
        if w == 0:
            raise DivergenceError(f"sigma has zero weight on {lam}, where Q_p > 0")
        if q:
            terms.append(float(q) * _block_cost(lam, w))
    return math.fsum(terms)


def relative_entropy(p: Spectrum, sigma: BlockState) -> float:
    """Exact ``D(rho(p)^{otimes n} || sigma)`` in bits via the block formula."""
    return cross_entropy(p, sigma) - sigma.n * p.entropy()


def dense_oracle_relative_entropy(p: Spectrum, sigma: BlockState) -> float:
    """Same quantity from explicit d^n x d^n matrices (d^n <= 243)."""
    if p.d != sigma.d:
        raise ValueError(f"spectrum length {p.d} != state depth {sigma.d}")
    rho = dense.product_state(p.as_float(), sigma.n)
    mat = dense.block_state_matrix(sigma.weights, sigma.n, sigma.d)
    return dense.relative_entropy_dense(rho, mat)


@dataclass(frozen=True)
class OperatorBound:
    holds: bool
    margin: float
    factor: float


def operator_bound_check(p: Spectrum, n: int) -> OperatorBound:
    """Smallest eigenvalue of ``(n+1)^{(d+2)(d-1)/2} sigma_U - rho^{otimes n}``."""
    d = p.d
    factor = float((n + 1) ** ((d + 2) * (d - 1) // 2))
    sigma = dense.block_state_matrix(uniform_state(n, d).weights, n, d)
    gap = factor * sigma - np.diag(dense.product_state(p.as_float(), n))
    margin = float(np.linalg.eigvalsh(gap).min())
    return OperatorBound(margin >= -1e-10, margin, factor)


# -- asymptotic constants ----------------------------------------------------


@dataclass(frozen=True)
class AsymptoticConstants:
    """Constants of the second-order redundancy expansion, in bits.

    ``c_d`` uses the published denominator ``2^{d-1} 3^{d-2} ... d^1``;
    ``c_d_weyl`` uses ``prod_{i<j}(j - i)``, the denominator the Weyl
    dimension formula actually produces.  The two differ by ``log2 d!``
    (one bit for d = 2).
    """

    d: int
    c_d: float
    c_d_weyl: float
    deltas: tuple[int, ...]

    @property
    def log_count(self) -> float:
        """log2 d!(d-1)!, the constant in ``|Y_n^d| ~ n^{d-1} / d!(d-1)!``."""
        return math.log2(math.factorial(self.d) * math.factorial(self.d - 1))


def constants(d: int) -> AsymptoticConstants:
    if d < 1:
        raise ValueError("d must be >= 1")
    head = -(d - 1) / 2 * LOG2_2PIE
    published = math.fsum((d + 1 - b) * math.log2(b) for b in range(2, d + 1))
    weyl = math.fsum((d - k) * math.log2(k) for k in range(1, d))
    return AsymptoticConstants(d, head - published, head - weyl, tuple(range(d - 1, -1, -1)))


@lru_cache(maxsize=None)
def _signed_perms(d: int) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(itertools.permutations(range(d))), dtype=np.int64).reshape(-1, d)
    signs = []
    for perm in perms:
        inv = sum(1 for i in range(d) for j in range(i + 1, d) if perm[i] > perm[j])
        signs.append(-1.0 if inv % 2 else 1.0)
    return perms, np.array(signs)


def _as_probs(p) -> np.ndarray:
    if isinstance(p, Spectrum):
        return np.array(p.as_float())
    return np.asarray(p, dtype=float)


def eval_c_array(probs: np.ndarray) -> np.ndarray:
    """C(p) in bits for each row of ``probs`` (rows strictly decreasing, positive).

    ``C(p) = -sum_s sgn(s) prod p_i^{delta_s(i)} log prod p_i^{delta_s(i)} / V(p)
             + 2 log V(p) - 1/2 sum_i log p_i``,
    with ``V(p) = prod_{i<j}(p_i - p_j)`` and ``delta_i = d - i``.
    Rows that are not strictly decreasing give ``-inf``.
    """
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    m, d = probs.shape
    deltas = np.arange(d - 1, -1, -1, dtype=float)
    perms, signs = _signed_perms(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.log2(probs)
        vand = np.ones(m)
        for i in range(d):
            for j in range(i + 1, d):
                vand = vand * (probs[:, i] - probs[:, j])
        # exponent vectors delta_{s(i)} for every s
        expo = deltas[perms]  # (d!, d)
        log_mono = logp @ expo.T  # (m, d!) -> log2 prod_i p_i^{delta_s(i)}
        mono = np.exp2(log_mono)
        lead = (mono * log_mono) @ signs
        out = -lead / vand + 2 * np.log2(vand) - 0.5 * logp.sum(axis=1)
    ok = vand > 0
    ok &= np.all(probs > 0, axis=1)
    return np.where(ok, out, -np.inf)


def _require_ordered(p) -> np.ndarray:
    arr = _as_probs(p)
    if not (np.all(arr > 0) and np.all(np.diff(arr) < 0)):
        raise SpectrumError(f"C(p) needs p_1 > p_2 > ... > p_d > 0, got {tuple(arr)}")
    return arr


def eval_c(p) -> float:
    """C(p) in bits for a strictly decreasing spectrum."""
    return float(eval_c_array(_require_ordered(p)[None, :])[0])


def expansion_prediction(p, n: int, prior=None, weyl: bool = False) -> float:
    """Predicted ``D(rho(p)^{otimes n} || sigma_{P_n})`` in bits.

    ``prior=None`` is the uniform prior, for which the prediction is
    ``(d^2-1)/2 log n + C_d - log d!(d-1)! + C(p)``.  An explicit prior
    (a BlockState or a mapping diagram -> probability) replaces
    ``-log d!(d-1)!`` by ``-(d-1) log n - E_Q[log P_n]``.
    ``weyl=True`` swaps in the Weyl-denominator constant.
    """
    arr = _require_ordered(p)
    d = len(arr)
    k = constants(d)
    cd = k.c_d_weyl if weyl else k.c_d
    head = (d * d - 1) / 2 * math.log2(n) + cd + eval_c(arr)
    if prior is None:
        return head - k.log_count
    weights = prior.weights if isinstance(prior, BlockState) else prior
    spectrum = p if isinstance(p, Spectrum) else Spectrum(tuple(arr))
    meas = measure(spectrum, n)
    terms = []
    for lam, q in meas.weights.items():
        w = weights.get(lam, 0)
        if w == 0:
            raise DivergenceError(f"prior has zero weight on {lam}")
        if q:
            terms.append(float(q) * _log2(w))
    return head - (d - 1) * math.log2(n) - math.fsum(terms)


def maha_predictors(p, n: int) -> tuple[float, float]:
    """Published asymptotic values for the two parts of ``E_Q[log dim V]``.

    Returns ``(limit of E_Q[log dim V - log n!/n!], expansion of E_Q[log n!/n!])``,
    where ``n!/n!`` is the multinomial coefficient of the diagram rows.
    """
    arr = _require_ordered(p)
    d = len(arr)
    logp = np.log2(arr)
    deltas = np.arange(d - 1, -1, -1, dtype=float)
    perms, signs = _signed_perms(d)
    vand = math.prod(arr[i] - arr[j] for i in range(d) for j in range(i + 1, d))
    log_mono = logp @ deltas[perms].T
    mono = np.exp2(log_mono)
    limit = float(np.sum(signs * mono / vand * (math.log2(vand) - log_mono)))
    entropy = -float(np.sum(arr * logp))
    expansion = entropy * n - (d - 1) / 2 * math.log2(n) - (d - 1) / 2 * LOG2_2PIE - 0.5 * float(logp.sum())
    return limit, expansion


def maha_expectations(p: Spectrum, n: int) -> tuple[float, float]:
    """Exact ``(E_Q[log dim V - log n!/n!], E_Q[log n!/n!])`` under Q_p."""
    meas = measure(p, n)
    diff = meas.expectation(lambda lam: dim_sym(lam).log2 - multinomial_log(lam))
    multi = meas.expectation(multinomial_log)
    return diff, multi


def redundancy_bound(n: int, d: int) -> float:
    """Upper bound ``((d+2)(d-1)/2) log(n+1)`` on D for sigma_U."""
    return (d + 2) * (d - 1) / 2 * math.log2(n + 1)
