"""Quantum Jeffreys prior, the minimax redundancy constant, and the states
that attain it.

The prior density on the ordered simplex is proportional to ``2^{C(p)}``
with C in bits, which is the same function as ``e^{C(p)}`` with C in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .approx import BlockState, constants, eval_c_array, measure, relative_entropy
from .errors import BudgetError, PreconditionError, SpectrumError
from .quadrature import MCResult, QuadResult, adaptive_gk, gauss_legendre_panels, ordered_simplex_mc
from .schur import Spectrum
from .young import YoungDiagram, dim_sym, enumerate_diagrams

# Best value over the one-parameter family of Krattenthaler and Slater,
# qubit case, in bits.  Used only as a fixed comparison number.
KS_QUBIT_CONSTANT = -2.3956

_T_MAX = 2.0 ** -0.5


@dataclass(frozen=True)
class OrderedSimplex:
    """``{p : p_1 > ... > p_{d-1} > 1 - p_1 - ... - p_{d-1} > 0}`` in
    coordinates ``(p_1, ..., p_{d-1})``."""

    d: int

    def full(self, coords: Sequence[float]) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        return np.append(coords, 1.0 - coords.sum())

    def contains(self, coords: Sequence[float]) -> bool:
        p = self.full(coords)
        return bool(np.all(p > 0) and np.all(np.diff(p) < 0))

    @property
    def volume(self) -> float:
        return 1.0 / (math.factorial(self.d - 1) * math.factorial(self.d))


def jeffreys_weight(probs: np.ndarray) -> np.ndarray:
    """Unnormalised prior ``2^{C(p)}`` row-wise; 0 on ties."""
    return np.exp2(eval_c_array(probs))


def _qubit_integrand(t: np.ndarray) -> np.ndarray:
    # p_2 = t^2 removes the p_2^{-1/2} singularity at p_1 -> 1
    p2 = t * t
    return jeffreys_weight(np.stack([1.0 - p2, p2], axis=1)) * 2.0 * t


@dataclass(frozen=True)
class IntegralResult:
    d: int
    method: str
    value: float
    error: float
    evaluations: int
    seed: int | None = None

    @property
    def log2_value(self) -> float:
        return math.log2(self.value)

    @property
    def log2_error(self) -> float:
        return self.error / (self.value * math.log(2.0))


def integral(d: int, method: str | None = None, tol: float = 1e-10, samples: int = 200_000,
             seed: int = 0, max_panels: int = 2000) -> IntegralResult:
    """``int_{ordered simplex} 2^{C(p)} dp``.

    ``method`` is ``"quadrature"`` (d = 2 only, the default there) or
    ``"mc"`` (default for d >= 3).  For Monte Carlo, ``tol`` is the relative
    standard error that must be reached, else BudgetError.
    """
    if d < 2:
        raise PreconditionError("the ordered-simplex integral needs d >= 2")
    method = method or ("quadrature" if d == 2 else "mc")
    if method == "quadrature":
        if d != 2:
            raise PreconditionError("deterministic quadrature is implemented for d = 2 only")
        res: QuadResult = adaptive_gk(_qubit_integrand, 0.0, _T_MAX, abs_tol=tol, rel_tol=tol, max_panels=max_panels)
        return IntegralResult(d, method, res.value, res.error, res.evaluations)
    if method == "mc":
        res_mc: MCResult = ordered_simplex_mc(jeffreys_weight, d, samples=samples, seed=seed)
        if not res_mc.stderr <= max(tol, 1e-3) * res_mc.value:
            raise BudgetError(
                f"Monte Carlo relative error {res_mc.stderr / res_mc.value:.3g} above tolerance",
                estimate=res_mc.value, error=res_mc.stderr,
            )
        return IntegralResult(d, method, res_mc.value, res_mc.stderr, res_mc.samples, seed)
    raise PreconditionError(f"unknown integration method {method!r}")


def integral_log(d: int, **kwargs) -> IntegralResult:
    """Alias of :func:`integral`; read ``.log2_value`` for the base-2 log."""
    return integral(d, **kwargs)


@dataclass(frozen=True)
class MinimaxResult:
    d: int
    c_d: float
    c_d_weyl: float
    integral: IntegralResult

    @property
    def log2_integral(self) -> float:
        return self.integral.log2_value

    @property
    def value(self) -> float:
        """``C_d + log2 int 2^{C}`` with the published ``C_d``."""
        return self.c_d + self.log2_integral

    @property
    def value_weyl(self) -> float:
        """Same with the Weyl-denominator constant."""
        return self.c_d_weyl + self.log2_integral

    @property
    def comparison(self) -> float | None:
        return KS_QUBIT_CONSTANT if self.d == 2 else None

    @property
    def improvement(self) -> float | None:
        return None if self.comparison is None else self.comparison - self.value


def minimax_value(d: int, **kwargs) -> MinimaxResult:
    k = constants(d)
    return MinimaxResult(d, k.c_d, k.c_d_weyl, integral(d, **kwargs))


# -- priors on diagrams -------------------------------------------------------


@dataclass(frozen=True)
class DiagramPrior:
    n: int
    d: int
    weights: dict = field(repr=False)
    log2_normalizer: float
    boundary: str

    @property
    def normalizer_ratio(self) -> float:
        """``sum_lam 2^{C(lam/n)} / n^{d-1}``, a Riemann sum for the integral."""
        return 2.0 ** (self.log2_normalizer - (self.d - 1) * math.log2(self.n))


def _rows_matrix(diagrams: list[YoungDiagram]) -> np.ndarray:
    return np.array([lam.rows for lam in diagrams], dtype=float)


def jn_prior(n: int, d: int, boundary: str = "zero") -> DiagramPrior:
    """``J_n(lam) ∝ 2^{C(lam/n)}`` over Y_n^d.

    ``C`` is undefined on diagrams with tied rows or a zero row.  With
    ``boundary="zero"`` those get weight 0.  With ``boundary="nudge"`` they
    are evaluated at ``(1 - eta) lam/n + eta u`` where ``u ∝ (d, d-1, ..., 1)``
    and ``eta = 1/(2n)``, which keeps every weight positive so that the
    mixture state has full support.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    if boundary not in ("zero", "nudge"):
        raise PreconditionError(f"unknown boundary rule {boundary!r}")
    diagrams = enumerate_diagrams(n, d)
    freq = _rows_matrix(diagrams) / n
    interior = np.all(freq > 0, axis=1) & np.all(np.diff(freq, axis=1) < 0, axis=1)
    if boundary == "nudge":
        u = np.arange(d, 0, -1, dtype=float)
        u /= u.sum()
        eta = 1.0 / (2 * n)
        freq = np.where(interior[:, None], freq, (1 - eta) * freq + eta * u)
    logw = eval_c_array(freq)
    if boundary == "zero":
        logw = np.where(interior, logw, -np.inf)
    if len(diagrams) == 1:
        return DiagramPrior(n, d, {diagrams[0]: 1.0}, float(logw[0]), boundary)
    if not np.any(np.isfinite(logw)):
        raise PreconditionError(
            f"every diagram in Y_{n}^{d} has tied or empty rows; J_n is undefined (use boundary='nudge')"
        )
    top = logw[np.isfinite(logw)].max()
    rel = np.exp2(logw - top)
    log2_norm = top + math.log2(rel.sum())
    probs = rel / rel.sum()
    return DiagramPrior(n, d, {lam: float(w) for lam, w in zip(diagrams, probs)}, float(log2_norm), boundary)


def sigma_j_state(n: int, d: int, boundary: str = "nudge") -> BlockState:
    """``sigma_J,n = sum_lam J_n(lam) rho_lam``."""
    prior = jn_prior(n, d, boundary)
    return BlockState(n, d, prior.weights)


def _log_q_matrix_qubit(n: int, p1: np.ndarray) -> tuple[list[YoungDiagram], np.ndarray]:
    # natural-log Q_p(lam) for every node (rows) and diagram (columns), d = 2
    diagrams = enumerate_diagrams(n, 2)
    a = np.array([lam.rows[0] for lam in diagrams], dtype=float)
    b = np.array([lam.rows[1] for lam in diagrams], dtype=float)
    log_dv = np.array([dim_sym(lam).log2 for lam in diagrams]) * math.log(2.0)
    x = p1[:, None]
    y = 1.0 - x
    m = a - b
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.log1p((y - x) / x)
        log_s = b * (np.log(x) + np.log(y)) + (m + 1) * np.log(x) + np.log(-np.expm1((m + 1) * log_ratio)) - np.log(x - y)
    return diagrams, log_s + log_dv


@dataclass(frozen=True)
class MixtureResult:
    state: BlockState
    tolerance: float
    nodes: int


def _mixture_weights_qubit(n: int, panels: int) -> tuple[list[YoungDiagram], np.ndarray, int]:
    t, wt = gauss_legendre_panels(0.0, _T_MAX, panels)
    p2 = t * t
    prior = _qubit_integrand(t) * wt
    diagrams, log_q = _log_q_matrix_qubit(n, 1.0 - p2)
    keep = prior > 0
    q = np.exp(log_q[keep])
    weights = prior[keep] @ q / prior[keep].sum()
    return diagrams, weights, int(keep.sum())


def sigma_j_tilde(n: int, d: int, panels: int | None = None, samples: int = 4000, seed: int = 0) -> MixtureResult:
    """``int Q-twirled rho(p)^{otimes n} J(p) dp`` with block weights
    ``int Q_p(lam) J(p) dp``.

    d = 2 uses composite Gauss-Legendre in ``t = sqrt(p_2)``; the reported
    tolerance is the total-variation change when the panel count doubles.
    d >= 3 uses the Monte Carlo nodes of the integral routine (small n only);
    the tolerance is then the spread between two independent node sets.
    The weights are normalised by the same rule's estimate of the prior
    mass, so they sum to 1 up to rounding.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    if d == 2:
        panels = panels or max(64, int(4 * math.sqrt(n)))
        diagrams, w1, nodes = _mixture_weights_qubit(n, panels)
        _, w2, _ = _mixture_weights_qubit(n, 2 * panels)
        tol = 0.5 * float(np.abs(w1 - w2).sum())
        w2 = w2 / w2.sum()
        return MixtureResult(BlockState(n, d, dict(zip(diagrams, map(float, w2)))), tol, 2 * nodes)
    runs = [_mixture_weights_mc(n, d, samples, s) for s in (seed, seed + 1)]
    diagrams, w1 = runs[0]
    _, w2 = runs[1]
    tol = 0.5 * float(np.abs(w1 - w2).sum())
    avg = 0.5 * (w1 + w2)
    avg = avg / avg.sum()
    return MixtureResult(BlockState(n, d, dict(zip(diagrams, map(float, avg)))), tol, 2 * samples)


def _mixture_weights_mc(n: int, d: int, samples: int, seed: int) -> tuple[list[YoungDiagram], np.ndarray]:
    diagrams = enumerate_diagrams(n, d)
    rng = np.random.default_rng(seed)
    # uniform on the ordered simplex: sorted flat Dirichlet
    p = np.sort(rng.dirichlet(np.ones(d), size=samples), axis=1)[:, ::-1]
    prior = jeffreys_weight(p)
    acc = np.zeros(len(diagrams))
    for row, weight in zip(p, prior):
        if weight <= 0:
            continue
        meas = measure(Spectrum(tuple(row / row.sum())), n)
        acc += weight * np.array([meas.weights[lam] for lam in diagrams])
    return diagrams, acc / prior.sum()


# -- equalizer scan -----------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    p: tuple[float, ...]
    divergence: float
    compensated: float


@dataclass(frozen=True)
class EqualizerScan:
    n: int
    d: int
    rows: tuple[ScanRow, ...]

    @property
    def values(self) -> list[float]:
        return [r.compensated for r in self.rows]

    @property
    def spread(self) -> float:
        return max(self.values) - min(self.values)

    @property
    def sup(self) -> float:
        return max(self.values)


def compensated_redundancy(p: Spectrum, state: BlockState) -> tuple[float, float]:
    """``(D, D - ((d^2-1)/2) log2 n)``."""
    div = relative_entropy(p, state)
    return div, div - (state.d ** 2 - 1) / 2 * math.log2(state.n)


def equalizer_scan(n: int, d: int, grid: Iterable, state: BlockState | None = None) -> EqualizerScan:
    """Compensated redundancy of ``state`` (default sigma_J,n) over a grid of
    strictly ordered spectra."""
    state = state or sigma_j_state(n, d)
    rows = []
    for item in grid:
        p = item if isinstance(item, Spectrum) else Spectrum(tuple(item))
        if not p.strictly_decreasing:
            raise SpectrumError(f"equalizer grid needs strictly ordered spectra, got {p}")
        div, comp = compensated_redundancy(p, state)
        rows.append(ScanRow(p.as_float(), div, comp))
    return EqualizerScan(n, d, tuple(rows))


def qubit_grid(p1_values: Iterable[float]) -> list[Spectrum]:
    return [Spectrum((x, 1.0 - x)) for x in p1_values]
