"""Energy lower bound for lossless codes into a truncated Fock space.

A lossless code is an isometry ``U`` from (C^d)^{otimes n} into the Fock
space sum_k (C^2)^{otimes k}, whose Hamiltonian H has eigenvalue k on
sector k.  Peeling the range projection A_0 = U U^dagger sector by sector,

    B_k = range(A_{k-1} P_k A_{k-1}),   A_k = A_{k-1} - B_k,

splits the code space into pieces of energy at least k.  Each piece has
rank at most 2^k, so the state sigma~ = sum_i 2^{-k_i} |e_i><e_i| on the
domain has trace at most ceil(n log2 d), and normalising it gives a state
whose log-loss undercuts the average energy by at most log2 ceil(n log2 d).

Everything is done on an orthonormal basis of the range rather than on
Fock-space projectors, so the dense matrices stay at (Fock dim) x d^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BoundViolation, PreconditionError, RankAmbiguityError, SchurCodeError, SizeCapError

RANK_THRESHOLD = 1e-7
# singular values within a factor 10 of the threshold are ambiguous
DEAD_ZONE = (1e-8, 1e-6)
ISOMETRY_TOL = 1e-10
MAX_TRUNCATION = 12


@dataclass(frozen=True)
class FockSpace:
    """Sectors k = 0..K of dimension 2^k, stacked in order of k."""

    K: int

    def __post_init__(self):
        if self.K < 0:
            raise PreconditionError("truncation K must be nonnegative")
        if self.K > MAX_TRUNCATION:
            raise SizeCapError(f"truncation K <= {MAX_TRUNCATION} only, got {self.K}")

    @classmethod
    def from_dim(cls, dim: int) -> "FockSpace":
        K = (dim + 1).bit_length() - 2
        if dim < 1 or (1 << (K + 1)) - 1 != dim:
            raise PreconditionError(f"{dim} is not a truncated Fock dimension 2^(K+1) - 1")
        return cls(K)

    @property
    def dim(self) -> int:
        return (1 << (self.K + 1)) - 1

    def sector(self, k: int) -> slice:
        return slice((1 << k) - 1, (1 << (k + 1)) - 1)

    def index(self, bits: str) -> int:
        """Fock basis index of a bit string (the empty string is the vacuum)."""
        if len(bits) > self.K:
            raise PreconditionError(f"codeword of length {len(bits)} exceeds truncation {self.K}")
        return (1 << len(bits)) - 1 + (int(bits, 2) if bits else 0)

    @property
    def energies(self) -> np.ndarray:
        return np.concatenate([np.full(1 << k, float(k)) for k in range(self.K + 1)])

    def projector(self, k: int) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        s = self.sector(k)
        out[s, s] = np.eye(1 << k)
        return out


@dataclass(frozen=True, eq=False)
class LosslessCode:
    """An isometry from the d^n-dimensional domain into a truncated Fock space.

    Codes touching the vacuum are rejected: a zero-energy codeword breaks
    the trace bound (energies 0, 1, 1, 2 give a trace of 2.25 > 2).
    """

    n: int
    d: int
    isometry: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.isometry, dtype=complex)
        object.__setattr__(self, "isometry", u)
        if u.ndim != 2 or u.shape[1] != self.d ** self.n:
            raise PreconditionError(f"isometry must have d^n = {self.d ** self.n} columns, got shape {u.shape}")
        FockSpace.from_dim(u.shape[0])
        gram = u.conj().T @ u
        dev = float(np.abs(gram - np.eye(u.shape[1])).max())
        if dev > ISOMETRY_TOL:
            raise PreconditionError(f"not an isometry: max |U^dagger U - I| = {dev:.3g}")
        if float(np.abs(u[0]).max()) > ISOMETRY_TOL:
            raise PreconditionError("code has support on the vacuum sector")

    @property
    def fock(self) -> FockSpace:
        return FockSpace.from_dim(self.isometry.shape[0])

    @property
    def domain_dim(self) -> int:
        return self.isometry.shape[1]

    def average_energy(self, rho: np.ndarray) -> float:
        u = self.isometry
        h = (u.conj().T * self.fock.energies) @ u
        return float(np.real(np.trace(h @ rho)))


def trace_bound(n: int, d: int) -> int:
    """ceil(n log2 d), computed exactly as the bit length of d^n - 1."""
    return max((d ** n - 1).bit_length(), 0)


# -- code constructors ---------------------------------------------------------


def random_isometry(n: int, d: int, K: int, seed: int = 0, sectors=None) -> LosslessCode:
    """Haar-like random isometry supported on the given sectors (default 1..K)."""
    fock = FockSpace(K)
    sectors = tuple(range(1, K + 1)) if sectors is None else tuple(sectors)
    if 0 in sectors:
        raise PreconditionError("the vacuum sector cannot carry codewords")
    rows = np.concatenate([np.arange(fock.sector(k).start, fock.sector(k).stop) for k in sectors])
    dim = d ** n
    if len(rows) < dim:
        raise PreconditionError(f"sectors {sectors} hold {len(rows)} < {dim} states")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((len(rows), dim)) + 1j * rng.standard_normal((len(rows), dim))
    q, _ = np.linalg.qr(g)
    u = np.zeros((fock.dim, dim), dtype=complex)
    u[rows] = q
    return LosslessCode(n, d, u)


def _basis_embedding(n: int, d: int, K: int, targets) -> LosslessCode:
    u = np.zeros((FockSpace(K).dim, d ** n), dtype=complex)
    u[list(targets), np.arange(d ** n)] = 1.0
    return LosslessCode(n, d, u)


def identity_embedding(n: int, d: int, K: int | None = None, sector: int | None = None) -> LosslessCode:
    """Map basis state x to the sector-k string holding x in binary,
    with k = ceil(n log2 d) unless given."""
    k = trace_bound(n, d) if sector is None else sector
    if k < 1 or (1 << k) < d ** n:
        raise PreconditionError(f"sector {k} cannot hold {d ** n} states")
    K = k if K is None else K
    return _basis_embedding(n, d, K, [(1 << k) - 1 + x for x in range(d ** n)])


def greedy_code(n: int, d: int, K: int | None = None) -> LosslessCode:
    """Fill sectors 1, 2, ... in order: the lowest-energy lossless code."""
    dim = d ** n
    targets, k = [], 1
    while len(targets) < dim:
        take = min(1 << k, dim - len(targets))
        targets.extend((1 << k) - 1 + j for j in range(take))
        k += 1
    K = k - 1 if K is None else K
    return _basis_embedding(n, d, K, targets)


def code_isometry(code, K: int | None = None) -> LosslessCode:
    """Realise a block-state SpectralCode as a Fock isometry: each atom of
    block lam is a basis vector of that Schur-Weyl block, sent to the Fock
    basis state of its codeword."""
    from .dense import block_bases

    if code.n is None:
        raise PreconditionError("code must come from a block state")
    bases = block_bases(code.n, code.d)
    K = code.max_length() if K is None else K
    fock = FockSpace(K)
    words = code.codewords()
    # U = sum over atoms of |codeword><block basis vector|
    targets = np.array([fock.index(w) for _, _, w in words])
    vecs = np.column_stack([bases[lam][:, i] for lam, i, _ in words])
    u = np.zeros((fock.dim, code.d ** code.n), dtype=complex)
    u[targets] = vecs.conj().T
    return LosslessCode(code.n, code.d, u)


# -- peeling ----------------------------------------------------------------


@dataclass(frozen=True)
class Peel:
    """Orthonormal bases of the peeled pieces.

    ``pieces[k]`` spans range(B_k) inside the Fock space and
    ``aligned[k]`` is its image under the alignment V, an orthonormal set
    inside sector k.  ``singular_values[k]`` are the sector overlaps.
    """

    fock: FockSpace
    pieces: dict[int, np.ndarray]
    aligned: dict[int, np.ndarray]
    singular_values: dict[int, np.ndarray]

    @property
    def ranks(self) -> dict[int, int]:
        return {k: v.shape[1] for k, v in self.pieces.items()}

    @property
    def basis(self) -> np.ndarray:
        return np.hstack([self.pieces[k] for k in sorted(self.pieces)])

    @property
    def sector_labels(self) -> np.ndarray:
        return np.concatenate([np.full(self.pieces[k].shape[1], k) for k in sorted(self.pieces)])


def peel_range(q: np.ndarray, fock: FockSpace) -> Peel:
    """Peel the range of the orthonormal columns ``q``, lowest sector first.

    The sector-k rows R_k of the current basis have singular vectors that
    split it into the part touching sector k (kept as B_k) and the part
    orthogonal to it (carried on as A_k).
    """
    remaining = np.asarray(q, dtype=complex)
    pieces, aligned, svals = {}, {}, {}
    for k in range(fock.K + 1):
        if remaining.shape[1] == 0:
            break
        rows = remaining[fock.sector(k)]
        w, s, xh = np.linalg.svd(rows, full_matrices=True)
        s_full = np.zeros(remaining.shape[1])
        s_full[: len(s)] = s
        ambiguous = s_full[(s_full > DEAD_ZONE[0]) & (s_full < DEAD_ZONE[1])]
        if ambiguous.size:
            raise RankAmbiguityError(
                f"sector {k}: singular values {ambiguous} are too close to the rank threshold {RANK_THRESHOLD}"
            )
        keep = s_full > RANK_THRESHOLD
        r = int(keep.sum())
        x = xh.conj().T
        if r:
            pieces[k] = remaining @ x[:, :r]
            embed = np.zeros((fock.dim, r), dtype=complex)
            embed[fock.sector(k)] = w[:, :r]
            aligned[k] = embed
            svals[k] = s_full[:r]
        remaining = remaining @ x[:, r:]
    if remaining.shape[1]:
        raise SchurCodeError(f"{remaining.shape[1]} dimensions left after peeling to sector {fock.K}")
    return Peel(fock, pieces, aligned, svals)


def range_basis(a0: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of a projection's range; checks it is a projection."""
    a0 = np.asarray(a0, dtype=complex)
    if np.abs(a0 - a0.conj().T).max() > tol or np.abs(a0 @ a0 - a0).max() > tol:
        raise PreconditionError("A0 is not a Hermitian idempotent")
    vals, vecs = np.linalg.eigh(a0)
    return vecs[:, vals > 0.5]


def peel_projections(a0: np.ndarray, fock: FockSpace, tol: float = 1e-8) -> list[np.ndarray]:
    """Dense B_0..B_K for a projection A0; verifies the decomposition."""
    peel = peel_range(range_basis(a0), fock)
    out = []
    for k in range(fock.K + 1):
        if k in peel.pieces:
            f = peel.pieces[k]
            out.append(f @ f.conj().T)
        else:
            out.append(np.zeros((fock.dim, fock.dim), dtype=complex))
    total = sum(out)
    if np.abs(total - a0).max() > tol:
        raise SchurCodeError("peeled pieces do not sum to A0")
    for i, b in enumerate(out):
        if np.abs(b @ b - b).max() > tol:
            raise SchurCodeError(f"B_{i} is not a projection")
        for j in range(i):
            if np.abs(b @ out[j]).max() > tol:
                raise SchurCodeError(f"B_{i} and B_{j} are not orthogonal")
    return out


# -- the state built from a code --------------------------------------------


@dataclass(frozen=True)
class SigmaReport:
    """sigma(U) in the domain with the checks made while building it."""

    energies: np.ndarray          # sector index k_i of each e_i
    domain_basis: np.ndarray      # columns e_i = U^dagger f_i
    trace: float                  # Tr sigma~
    trace_bound: int              # ceil(n log2 d)
    partial_sums: np.ndarray      # sum_{i<=M} 2^{-k_i}, energies ascending
    partial_sums_ok: bool         # against ceil(log2 M), for M >= 2
    reconstruction_error: float   # |sum_k B_k - A0|
    monotonicity_margin: float    # min over k of (lowest eigenvalue of B_k H B_k) - k
    alignment_margin: float       # lowest eigenvalue of A0 H A0 - V B H B V^dagger on range A0
    alignment_error: float        # deviation of V from an isometry
    ranks: dict

    def operator(self, normalized: bool = True) -> np.ndarray:
        e = self.domain_basis
        diag = np.exp2(-self.energies) / (self.trace if normalized else 1.0)
        return (e * diag) @ e.conj().T

    def log2_operator(self) -> np.ndarray:
        e = self.domain_basis
        return (e * (-self.energies - math.log2(self.trace))) @ e.conj().T


def sigma_of_code(code: LosslessCode) -> SigmaReport:
    u = code.isometry
    fock = code.fock
    peel = peel_range(u, fock)
    f = peel.basis
    k = peel.sector_labels.astype(float)
    # f spans range U, so f f^dagger = U U^dagger exactly when f^dagger U is unitary
    overlap = u.conj().T @ f
    recon = float(np.abs(f @ f.conj().T - u @ u.conj().T).max()) if fock.dim <= 1024 else float(
        np.abs(overlap.conj().T @ overlap - np.eye(f.shape[1])).max()
    )
    energy = fock.energies
    mono = math.inf
    for kk, piece in peel.pieces.items():
        vals = np.linalg.eigvalsh((piece.conj().T * energy) @ piece)
        mono = min(mono, float(vals.min()) - kk)
    v = np.hstack([peel.aligned[kk] for kk in sorted(peel.aligned)])
    align_err = float(np.abs(v.conj().T @ v - np.eye(v.shape[1])).max())
    # A0 H A0 - V B H B V^dagger, expressed in the basis f (V f_i = aligned_i)
    hv = np.real(np.einsum("ij,i,ij->j", v.conj(), energy, v))
    gap = (f.conj().T * energy) @ f - np.diag(hv)
    align_margin = float(np.linalg.eigvalsh(gap).min())
    weights = np.exp2(-k)
    trace = math.fsum(weights)
    partial = np.cumsum(np.sort(weights)[::-1])
    m = np.arange(1, len(partial) + 1)
    ceil_log = np.array([(int(x) - 1).bit_length() for x in m])
    partial_ok = bool(np.all(partial[1:] <= ceil_log[1:] + 1e-12))
    report = SigmaReport(
        energies=k,
        domain_basis=overlap,
        trace=trace,
        trace_bound=trace_bound(code.n, code.d),
        partial_sums=partial,
        partial_sums_ok=partial_ok,
        reconstruction_error=recon,
        monotonicity_margin=mono,
        alignment_margin=align_margin,
        alignment_error=align_err,
        ranks=peel.ranks,
    )
    if align_err > 1e-8:
        raise SchurCodeError(f"alignment V is not isometric (deviation {align_err:.3g})")
    return report


@dataclass(frozen=True)
class BoundCheck:
    energy: float
    cross_entropy: float          # -Tr rho log2 sigma(U)
    tilde_cross_entropy: float    # -Tr rho log2 sigma~(U)
    log2_trace_bound: float

    @property
    def margin(self) -> float:
        return self.energy - (self.cross_entropy - self.log2_trace_bound)

    @property
    def intermediate_margin(self) -> float:
        return self.energy - self.tilde_cross_entropy


def verify_energy_bound(code: LosslessCode, rho: np.ndarray, report: SigmaReport | None = None,
                        tol: float = 1e-8) -> BoundCheck:
    """Compare the average energy of ``U rho U^dagger`` with the log-loss of
    sigma(U); raises BoundViolation if either inequality fails by more than
    ``tol``."""
    rho = np.asarray(rho, dtype=complex)
    dim = code.domain_dim
    if rho.shape != (dim, dim):
        raise PreconditionError(f"rho must be {dim}x{dim}")
    if np.abs(rho - rho.conj().T).max() > 1e-10 or abs(np.trace(rho) - 1) > 1e-10:
        raise PreconditionError("rho must be Hermitian with unit trace")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise PreconditionError("rho must be positive semidefinite")
    report = sigma_of_code(code) if report is None else report
    e = report.domain_basis
    diag = np.real(np.einsum("ij,jk,ki->i", e.conj().T, rho, e))
    tilde = math.fsum(diag * report.energies)
    check = BoundCheck(
        energy=code.average_energy(rho),
        cross_entropy=tilde + math.log2(report.trace),
        tilde_cross_entropy=tilde,
        log2_trace_bound=math.log2(report.trace_bound),
    )
    if check.margin < -tol or check.intermediate_margin < -tol:
        raise BoundViolation(f"energy bound fails: margin {check.margin:.3g}, "
                             f"intermediate {check.intermediate_margin:.3g}")
    return check


def random_density(dim: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# -- file format -------------------------------------------------------------


def save_isometry(path, u: np.ndarray) -> None:
    """Write (rows, cols) as little-endian uint64, then the entries row-major
    as little-endian float64 (real, imag) pairs."""
    u = np.ascontiguousarray(u, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(np.array(u.shape, dtype="<u8").tobytes())
        fh.write(u.tobytes(order="C"))


def load_isometry(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise PreconditionError("isometry file too short for its header")
    rows, cols = (int(x) for x in np.frombuffer(raw[:16], dtype="<u8"))
    body = raw[16:]
    if len(body) != rows * cols * 16:
        raise PreconditionError(f"isometry file holds {len(body)} bytes, expected {rows * cols * 16}")
    return np.frombuffer(body, dtype="<c16").reshape(rows, cols).astype(complex)
