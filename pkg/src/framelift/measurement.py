"""The linear measurement map, its coordinate matrix, and kernel bases.

A measurement maps a Hermitian matrix X to the real vector of traces
(tr(G_1 X), ..., tr(G_m X)). In the orthonormal hvec coordinates the map is
an m x n^2 real matrix whose singular values are the true singular values of
the measurement; the smallest one enters the stability constant.

Kernel bases come in two flavors: ``structural`` (antidiagonal inclusions of
totally non-singular complements of the ensemble's coefficient blocks,
exact by construction) and ``numeric`` (SVD null space of the coordinate
matrix). For a well-formed ensemble they span the same subspace, which makes
the pair a useful cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frames import MeasurementEnsemble, coefficient_blocks
from .hermitian import antidiag_include, antidiag_len, hunvec, hvec
from .nonsingular import tns_complement

KERNEL_SV_TOL = 1e-10


@dataclass
class MeasurementOperator:
    """A measurement with its coordinate matrix and SVD precomputed."""

    ensemble: MeasurementEnsemble
    coord: np.ndarray
    svd: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)

    @property
    def n(self) -> int:
        return self.ensemble.n

    @property
    def m(self) -> int:
        return self.coord.shape[0]

    @property
    def singular_values(self) -> np.ndarray:
        return self.svd[1]

    @property
    def sigma_max(self) -> float:
        return float(self.svd[1][0])

    @property
    def sigma_min(self) -> float:
        """Smallest of the m singular values (0 if rank-deficient)."""
        return float(self.svd[1][self.m - 1]) if self.m <= self.coord.shape[1] else 0.0


def build_operator(ens: MeasurementEnsemble) -> MeasurementOperator:
    coord = ens.coord_rows()
    svd = np.linalg.svd(coord, full_matrices=False)
    return MeasurementOperator(ens, coord, svd)


def apply(op: MeasurementOperator, X: np.ndarray) -> np.ndarray:
    """Measurement outcomes (tr(G_i X))_i as a real vector."""
    X = np.asarray(X, dtype=complex)
    if X.shape != (op.n, op.n):
        raise ValueError(f"expected a {op.n}x{op.n} matrix, got {X.shape}")
    return op.coord @ hvec(X)


def adjoint(op: MeasurementOperator, y: np.ndarray) -> np.ndarray:
    """Adjoint map: sum_i y_i G_i."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != op.m:
        raise ValueError(f"expected {op.m} outcomes, got {y.shape[0]}")
    return hunvec(op.coord.T @ y, op.n)


@dataclass
class KernelBasis:
    """Hermitian matrices spanning Ker(M), with provenance."""

    elements: np.ndarray  # (d, n, n), possibly d = 0
    provenance: str  # "structural" | "numeric"
    n: int

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def coord_rows(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((0, self.n * self.n))
        return np.stack([hvec(Z) for Z in self.elements])


def kernel_dimension(n: int, r: int) -> int:
    """n^2 minus the operator count 4r(n-r)+n-2r."""
    return n * n - (4 * r * (n - r) + n - 2 * r)


def kernel_basis_structural(ens: MeasurementEnsemble,
                            seed: int | np.random.Generator | None = 0) -> KernelBasis:
    """Kernel basis from totally non-singular complements of the coefficient blocks.

    For each interior antidiagonal k in 2r+1..2(n-r)-3 the complements
    B_k, B'_k of A_k, A'_k contribute the pairs (iota_k(B_k[:, j]),
    iota_k(i B'_k[:, j])); the four boundary antidiagonals contribute
    nothing. Total count n^2 - m.
    """
    n, r = ens.n, ens.r
    blocks = coefficient_blocks(ens)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    elements: list[np.ndarray] = []
    for k in range(2 * r + 1, 2 * (n - r) - 2):
        g = antidiag_len(n, k)
        if g <= r:
            continue
        A, Ai = blocks[k]
        B = tns_complement(A, rng)
        Bi = tns_complement(Ai, rng)
        for j in range(g - r):
            elements.append(antidiag_include(n, k, B[:, j]))
            elements.append(antidiag_include(n, k, 1j * Bi[:, j]))
    if elements:
        stacked = np.stack(elements)
    else:
        stacked = np.zeros((0, n, n), dtype=complex)
    expected = kernel_dimension(n, r)
    if stacked.shape[0] != expected:
        raise RuntimeError(
            f"structural kernel has {stacked.shape[0]} elements, expected {expected}")
    return KernelBasis(stacked, "structural", n)


def kernel_basis_numeric(op: MeasurementOperator,
                         tol: float = KERNEL_SV_TOL) -> KernelBasis:
    """Orthonormal kernel basis from the SVD of the coordinate matrix.

    Right singular directions with singular value below tol * sigma_max
    count as kernel, plus the n^2 - m directions outside the row space.
    """
    n = op.n
    _, s, Vt = np.linalg.svd(op.coord, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax))
    null_rows = Vt[rank:]
    if null_rows.shape[0] == 0:
        return KernelBasis(np.zeros((0, n, n), dtype=complex), "numeric", n)
    elements = np.stack([hunvec(row, n) for row in null_rows])
    return KernelBasis(elements, "numeric", n)


# ---------------------------------------------------------------------------
# Subspace comparison
# ---------------------------------------------------------------------------

def orthonormal_rows(rows: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of the row space (via SVD, rank-revealing)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[0] == 0:
        return rows
    _, s, Vt = np.linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(s > tol * s[0])) if s.size else 0
    return Vt[:rank]


def max_principal_angle_sin(basis_a: np.ndarray, basis_b: np.ndarray) -> float:
    """sin of the largest principal angle between two row-space bases.

    Accurate for tiny angles (sine-based residual formulation); bases of
    unequal dimension return 1.0, two empty bases return 0.0.
    """
    Qa = orthonormal_rows(basis_a)
    Qb = orthonormal_rows(basis_b)
    if Qa.shape[0] != Qb.shape[0]:
        return 1.0
    if Qa.shape[0] == 0:
        return 0.0
    resid = Qb - (Qb @ Qa.T) @ Qa
    return float(min(1.0, np.linalg.svd(resid, compute_uv=False)[0]))


# ---------------------------------------------------------------------------
# Outcome serialization
# ---------------------------------------------------------------------------

def outcomes_to_csv(b: np.ndarray) -> str:
    lines = ["index,value"]
    for i, v in enumerate(np.asarray(b, dtype=float).ravel()):
        lines.append(f"{i},{float(v)!r}")
    return "\n".join(lines) + "\n"


def outcomes_from_csv(text: str) -> np.ndarray:
    values: list[tuple[int, float]] = []
    for line in text.strip().splitlines():
        line = line.strip()
        if not line or line.lower().startswith("index"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"malformed outcome row: {line!r}")
        values.append((int(parts[0]), float(parts[1])))
    values.sort()
    if [i for i, _ in values] != list(range(len(values))):
        raise ValueError("outcome indices must be 0..m-1 without gaps")
    return np.array([v for _, v in values])
