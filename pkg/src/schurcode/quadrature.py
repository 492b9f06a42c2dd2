"""Numerical integration used by the minimax module.

``adaptive_gk`` is a globally adaptive 7/15-point Gauss-Kronrod rule (the
QAG strategy: keep bisecting the panel with the largest error estimate).
``ordered_simplex_mc`` estimates integrals over the ordered simplex
``p_1 > ... > p_d > 0`` by stratified, antithetic sampling through a
Dirichlet proposal.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import betaincinv, gammaln

from .errors import BudgetError

# 15-point Kronrod nodes/weights and the embedded 7-point Gauss weights
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KW = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5, center)
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[13, 11, 9]] = _WG[:3]
_GW[7] = _WG[3]


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evaluations: int
    panels: int


def _panel(f, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = f(mid + half * _NODES)
    k = half * float(np.dot(_KW, fx))
    g = half * float(np.dot(_GW, fx))
    return k, abs(k - g)


def adaptive_gk(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
    max_panels: int = 2000,
) -> QuadResult:
    """Integrate a vectorised ``f`` over [a, b].

    The error estimate is the plain |K15 - G7| difference summed over panels,
    which is conservative for smooth integrands.  Raises BudgetError when the
    panel budget runs out before the tolerance is met.
    """
    value, err = _panel(f, a, b)
    heap = [(-err, a, b, value)]
    total, total_err = value, err
    evals = 15
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if len(heap) >= max_panels:
            raise BudgetError(
                f"adaptive_gk: {max_panels} panels exhausted, error {total_err:.3g}",
                estimate=total, error=total_err,
            )
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _panel(f, lo, mid)
        v2, e2 = _panel(f, mid, hi)
        evals += 30
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        # recompute sums from scratch each time to avoid drift
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    return QuadResult(total, total_err, evals, len(heap))


def gauss_legendre_panels(a: float, b: float, panels: int, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


# -- Monte Carlo over the ordered simplex -------------------------------------


def simplex_vertices(d: int) -> np.ndarray:
    """Vertices of the ordered simplex: row k is (1/k, ..., 1/k, 0, ..., 0)."""
    out = np.zeros((d, d))
    for k in range(1, d + 1):
        out[k - 1, :k] = 1.0 / k
    return out


def ordered_simplex_volume(d: int) -> float:
    """Volume of {p_1 > ... > p_d > 0, sum = 1} in coordinates (p_1..p_{d-1})."""
    return 1.0 / (math.factorial(d - 1) * math.factorial(d))


def _stick_breaking(u: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    # inverse-CDF map from the unit cube to Dirichlet(alpha)
    m, k = u.shape
    lam = np.empty((m, k + 1))
    remaining = np.ones(m)
    tail = alpha[::-1].cumsum()[::-1]
    for i in range(k):
        frac = betaincinv(alpha[i], tail[i + 1], u[:, i])
        lam[:, i] = remaining * frac
        remaining = remaining - lam[:, i]
    lam[:, k] = remaining
    return lam


def _log_dirichlet_pdf(lam: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    norm = gammaln(alpha.sum()) - gammaln(alpha).sum()
    with np.errstate(divide="ignore"):
        return norm + ((alpha - 1.0) * np.log(lam)).sum(axis=1)


@dataclass(frozen=True)
class MCResult:
    value: float
    stderr: float
    samples: int
    replicates: int
    seed: int


def ordered_simplex_mc(
    f: Callable[[np.ndarray], np.ndarray],
    d: int,
    samples: int = 200_000,
    replicates: int = 8,
    seed: int = 0,
    alpha_last: float = 0.5,
) -> MCResult:
    """Estimate ``int f(p) dp`` over the ordered simplex.

    ``f`` takes an (m, d) array of spectra and returns (m,) values.  The
    proposal is Dirichlet on barycentric coordinates with exponent
    ``alpha_last`` on the vertex opposite the ``p_d = 0`` face, which absorbs
    a ``p_d^{-1/2}`` edge singularity.  Each replicate stratifies the unit
    cube into a regular grid with one point per cell plus its antithetic
    partner; the standard error comes from the spread across replicates.
    """
    k = d - 1
    alpha = np.ones(d)
    alpha[-1] = alpha_last
    verts = simplex_vertices(d)
    per_axis = max(1, int((samples / (2 * replicates)) ** (1.0 / k)))
    grid = np.stack(np.meshgrid(*[np.arange(per_axis)] * k, indexing="ij"), axis=-1).reshape(-1, k)
    # dp = dlam / d!  (linear map from the barycentric simplex)
    scale = 1.0 / math.factorial(d)
    children = np.random.SeedSequence(seed).spawn(replicates)
    estimates = []
    for child in children:
        rng = np.random.default_rng(child)
        u = (grid + rng.random(grid.shape)) / per_axis
        vals = []
        for cube in (u, 1.0 - u):
            cube = np.clip(cube, 1e-300, 1.0 - 1e-16)
            lam = _stick_breaking(cube, alpha)
            p = lam @ verts
            ratio = np.asarray(f(p), dtype=float) * np.exp(-_log_dirichlet_pdf(lam, alpha))
            vals.append(ratio)
        estimates.append(scale * 0.5 * (vals[0].mean() + vals[1].mean()))
    estimates = np.array(estimates)
    stderr = float(estimates.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else math.nan
    return MCResult(float(estimates.mean()), stderr, 2 * len(grid) * replicates, replicates, seed)
