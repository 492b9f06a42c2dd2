"""Explicit d^n x d^n matrices for small instances.

Isotypic projectors come from character sums over S_n,

    I_lam = (dim V_lam / n!) * sum_{pi in S_n} chi_lam(pi) V_pi,

with characters from the Murnaghan-Nakayama rule.  Nothing here uses the
Schur polynomial route, so it serves as an independent check on it.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .errors import SizeCapError
from .young import YoungDiagram, dim_su, dim_sym, enumerate_diagrams

DENSE_MAX_DIM = 243


def cycle_type(perm: tuple[int, ...]) -> tuple[int, ...]:
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        k, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            k += 1
        lengths.append(k)
    return tuple(sorted(lengths, reverse=True))


@lru_cache(maxsize=None)
def _mn(beta: frozenset, cycles: tuple[int, ...]) -> int:
    # Murnaghan-Nakayama on a beta-set: removing a rim hook of length k moves
    # one bead from b to b - k; the sign counts beads jumped over.
    if not cycles:
        return 1
    k, rest = cycles[0], cycles[1:]
    total = 0
    for b in beta:
        t = b - k
        if t < 0 or t in beta:
            continue
        height = sum(1 for c in beta if t < c < b)
        sign = -1 if height % 2 else 1
        total += sign * _mn((beta - {b}) | {t}, rest)
    return total


def character(lam: YoungDiagram, cycles: tuple[int, ...]) -> int:
    """Irreducible S_n character chi_lam at a permutation of the given cycle type."""
    rows = [r for r in lam.rows if r]
    L = len(rows)
    beta = frozenset(r + L - 1 - i for i, r in enumerate(rows))
    return _mn(beta, tuple(sorted(cycles, reverse=True)))


@lru_cache(maxsize=None)
def _digits(n: int, d: int) -> np.ndarray:
    return np.array(list(itertools.product(range(d), repeat=n)), dtype=np.int64).reshape(-1, n)


def permutation_indices(perm: tuple[int, ...], d: int) -> np.ndarray:
    """Index map of V_perm: basis vector ``i`` goes to ``out[i]``.

    V_perm sends tensor factor ``j`` to slot ``perm[j]``.
    """
    n = len(perm)
    digits = _digits(n, d)
    moved = np.empty_like(digits)
    moved[:, list(perm)] = digits
    weights = d ** np.arange(n - 1, -1, -1)
    return moved @ weights


def permutation_operator(perm: tuple[int, ...], d: int) -> np.ndarray:
    dim = d ** len(perm)
    out = np.zeros((dim, dim))
    out[permutation_indices(perm, d), np.arange(dim)] = 1.0
    return out


def _check_cap(n: int, d: int) -> None:
    if d ** n > DENSE_MAX_DIM:
        raise SizeCapError(f"dense oracle capped at d^n <= {DENSE_MAX_DIM}, got {d}^{n}")


@lru_cache(maxsize=None)
def isotypic_projectors(n: int, d: int) -> dict[YoungDiagram, np.ndarray]:
    """Projectors onto every Schur-Weyl block of (C^d)^{otimes n}."""
    _check_cap(n, d)
    dim = d ** n
    diagrams = enumerate_diagrams(n, d)
    out = {lam: np.zeros((dim, dim)) for lam in diagrams}
    cols = np.arange(dim)
    fact = math.factorial(n)
    for perm in itertools.permutations(range(n)):
        rows = permutation_indices(perm, d)
        ct = cycle_type(perm)
        for lam in diagrams:
            chi = character(lam, ct)
            if chi:
                out[lam][rows, cols] += chi * dim_sym(lam, exact=True).exact / fact
    for mat in out.values():
        mat.setflags(write=False)
    return out


def block_bases(n: int, d: int) -> dict[YoungDiagram, np.ndarray]:
    """Orthonormal basis (columns) of each block, from the projector's eigenvectors."""
    out = {}
    for lam, proj in isotypic_projectors(n, d).items():
        vals, vecs = np.linalg.eigh(proj)
        out[lam] = vecs[:, vals > 0.5]
    return out


def product_state(probs, n: int) -> np.ndarray:
    """Diagonal of rho(p)^{otimes n} in the computational basis."""
    diag = np.ones(1)
    for _ in range(n):
        diag = np.kron(diag, np.asarray(probs, dtype=float))
    return diag


def block_state_matrix(weights: dict, n: int, d: int) -> np.ndarray:
    """sum_lam w(lam) I_lam / (dim U_lam dim V_lam) as a dense matrix."""
    projs = isotypic_projectors(n, d)
    out = np.zeros((d ** n, d ** n))
    for lam, w in weights.items():
        size = dim_su(lam).exact * dim_sym(lam, exact=True).exact
        out += float(w) / size * projs[lam]
    return out


def relative_entropy_dense(rho_diag: np.ndarray, sigma: np.ndarray) -> float:
    """D(rho||sigma) in bits for diagonal rho and Hermitian sigma > 0."""
    vals, vecs = np.linalg.eigh(sigma)
    if vals.min() <= 0:
        return math.inf
    log_sigma = (vecs * np.log2(vals)) @ vecs.conj().T
    mask = rho_diag > 0
    term1 = float(np.sum(rho_diag[mask] * np.log2(rho_diag[mask])))
    term2 = float(np.real(np.sum(rho_diag * np.diag(log_sigma))))
    return term1 - term2
