"""Total non-singularity: exhaustive minor checks and orthogonal complements.

A real matrix is totally non-singular when every minor, of every size, is
nonzero. ``all_minors_nonzero`` certifies this by enumerating all minors
(with a hard budget, since the count is combinatorial), and
``tns_complement`` constructs a totally non-singular basis of the orthogonal
complement of the column span by drawing random coefficients over a null
space basis and verifying the result, retrying on failure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

MINOR_BUDGET = 2_000_000
MINOR_TOL = 1e-10


@dataclass
class TNSReport:
    """Outcome of an exhaustive minor enumeration."""

    is_tns: bool
    min_abs_minor: float
    minors_checked: int
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    tol: float = MINOR_TOL

    def __bool__(self) -> bool:
        return self.is_tns


def minor_count(p: int, q: int) -> int:
    """Total number of square minors of a p x q matrix."""
    return sum(math.comb(p, s) * math.comb(q, s) for s in range(1, min(p, q) + 1))


def bareiss_det(M: np.ndarray) -> float:
    """Determinant by fraction-free (Bareiss) elimination with partial pivoting."""
    A = np.array(M, dtype=float)
    s = A.shape[0]
    if s == 1:
        return float(A[0, 0])
    sign = 1.0
    prev = 1.0
    for k in range(s - 1):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if A[p, k] == 0.0:
            return 0.0
        if p != k:
            A[[k, p]] = A[[p, k]]
            sign = -sign
        A[k + 1:, k + 1:] = (A[k + 1:, k + 1:] * A[k, k]
                             - np.outer(A[k + 1:, k], A[k, k + 1:])) / prev
        prev = A[k, k]
    return sign * float(A[-1, -1])


def all_minors_nonzero(A: np.ndarray, tol: float = MINOR_TOL,
                       budget: int = MINOR_BUDGET) -> TNSReport:
    """Check every minor of A against a scale-relative tolerance.

    A minor counts as nonzero when its absolute determinant exceeds
    ``tol`` times the product of the Euclidean norms of its rows (the
    Hadamard bound, so the test is invariant under row scaling). Raises
    ValueError when the total number of minors exceeds ``budget``:
    certification must stay exact, so over-budget instances are refused
    rather than sampled.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    p, q = A.shape
    if p * q == 0:
        raise ValueError("empty matrix")
    total = minor_count(p, q)
    if total > budget:
        raise ValueError(
            f"minor enumeration budget exceeded: {total} minors > {budget} "
            f"for a {p}x{q} matrix")

    checked = 0
    min_abs = math.inf
    # 1x1 minors are the entries themselves.
    for i in range(p):
        for j in range(q):
            checked += 1
            a = abs(float(A[i, j]))
            if a <= tol * a:  # only an exact zero fails the relative test
                return TNSReport(False, 0.0, checked, ((i,), (j,)), tol)
            min_abs = min(min_abs, a)

    for s in range(2, min(p, q) + 1):
        for rows in itertools.combinations(range(p), s):
            sub = A[list(rows)]
            for cols in itertools.combinations(range(q), s):
                checked += 1
                minor = sub[:, list(cols)]
                d = abs(bareiss_det(minor))
                hadamard = float(np.prod(np.linalg.norm(minor, axis=1)))
                if d <= tol * hadamard or hadamard == 0.0:
                    return TNSReport(False, d, checked, (rows, cols), tol)
                min_abs = min(min_abs, d)
    return TNSReport(True, float(min_abs), checked, None, tol)


def tns_complement(A: np.ndarray, seed: int | np.random.Generator | None = 0,
                   max_retries: int = 32, tol: float = MINOR_TOL) -> np.ndarray:
    """Totally non-singular B with A^t B = 0, for totally non-singular A.

    A must be p x q with q < p. B is p x (p - q), built as a random mix of
    an orthonormal null-space basis of A^t and verified minor-by-minor; the
    draw is retried up to ``max_retries`` times. Raises ValueError for bad
    inputs and RuntimeError when all retries produce a vanishing minor
    (reseed and try again; failures are measure-zero in exact arithmetic).
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    p, q = A.shape
    if not 1 <= q < p:
        raise ValueError(f"need q < p, got shape {A.shape}")
    pre = all_minors_nonzero(A, tol=tol)
    if not pre.is_tns:
        raise ValueError(f"input is not totally non-singular (witness minor {pre.witness})")

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    # Orthonormal basis of Ker(A^t) = orthogonal complement of Range(A).
    U, s, _ = np.linalg.svd(A, full_matrices=True)
    N = U[:, q:]  # p x (p - q)

    last: TNSReport | None = None
    for _ in range(max_retries):
        mix = rng.uniform(-1.0, 1.0, size=(p - q, p - q))
        B = N @ mix
        ortho = float(np.abs(A.T @ B).max())
        if ortho > 1e-10 * max(1.0, float(np.linalg.norm(A)) * float(np.linalg.norm(B))):
            last = None
            continue
        report = all_minors_nonzero(B, tol=tol)
        if report.is_tns:
            return B
        last = report
    detail = f"; last failing minor {last.witness}" if last is not None else ""
    raise RuntimeError(f"tns_complement failed after {max_retries} retries{detail}")
