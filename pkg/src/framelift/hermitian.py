"""Hermitian matrix arithmetic and Hilbert-Schmidt geometry.

Conventions used throughout the package:

* Hermitian matrices are dense ``numpy`` arrays of dtype ``complex128``.
* Matrix indices start at 0; the k-th antidiagonal is the set of positions
  (j, l) with j + l = k, for k in 1..2n-3.
* ``antidiag_len(n, k)`` is the number of strictly-upper positions (j < l)
  on antidiagonal k; ``antidiag_include`` embeds a complex vector of that
  length into a Hermitian matrix supported on that antidiagonal, with a
  1/sqrt(2) factor so that real unit vectors map to unit-Frobenius matrices.
* ``hvec``/``hunvec`` convert between Hermitian matrices and real coordinate
  vectors in a fixed orthonormal basis (diagonal units first, then, per
  antidiagonal k = 1..2n-3 and upper position in row order, the real and
  imaginary antidiagonal units). The map is an isometry from the
  Hilbert-Schmidt inner product to the Euclidean one.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-12


class EigSpectrum(NamedTuple):
    """Eigenvalues in non-increasing order with matching orthonormal vectors.

    ``values[i]`` belongs to the eigenvector ``vectors[:, i]``.
    """

    values: np.ndarray
    vectors: np.ndarray


def hermitize(A: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A*) / 2 as complex128."""
    A = np.asarray(A, dtype=complex)
    return (A + A.conj().T) / 2


def is_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    scale = max(1.0, float(np.linalg.norm(A)))
    return float(np.abs(A - A.conj().T).max(initial=0.0)) <= tol * scale


def check_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a Hermitian matrix and return it as complex128.

    Raises ValueError when A is not square or deviates from conjugate
    symmetry by more than ``tol`` relative to its Frobenius norm.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not is_hermitian(A, tol):
        dev = float(np.abs(A - A.conj().T).max())
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return A


def hs_inner(A: np.ndarray, B: np.ndarray) -> float:
    """Hilbert-Schmidt inner product tr(AB) of two Hermitian matrices."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    # For Hermitian A, B: tr(AB) = sum_ij A_ij conj(B_ij), which is real.
    return float(np.real(np.vdot(B, A)))


def hs_norm(A: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(A))


def eig_ordered(A: np.ndarray) -> EigSpectrum:
    """Eigendecomposition with eigenvalues sorted non-increasingly.

    Deterministic for a fixed input. Raises numpy.linalg.LinAlgError if the
    eigensolver fails to converge.
    """
    A = check_hermitian(A)
    values, vectors = np.linalg.eigh(hermitize(A))
    return EigSpectrum(values[::-1].copy(), vectors[:, ::-1].copy())


def psd_project(A: np.ndarray) -> np.ndarray:
    """Project onto the PSD cone: clamp negative eigenvalues to zero.

    Returns the nearest positive semidefinite matrix in Frobenius norm.
    """
    A = hermitize(A)
    w, V = np.linalg.eigh(A)
    if w[0] >= 0.0:
        return A
    w = np.maximum(w, 0.0)
    return hermitize((V * w) @ V.conj().T)


def default_sign_tol(A: np.ndarray) -> float:
    """Relative eigenvalue-sign tolerance: 1e-8 * max(1, ||A||_F)."""
    return 1e-8 * max(1.0, float(np.linalg.norm(A)))


def signed_eig_counts(A: np.ndarray, tol: float | None = None) -> tuple[int, int]:
    """Count eigenvalues above +tol and below -tol.

    With tol=None the relative default is used (see default_sign_tol).
    """
    A = check_hermitian(A)
    if tol is None:
        tol = default_sign_tol(A)
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = np.linalg.eigvalsh(hermitize(A))
    return int(np.sum(w > tol)), int(np.sum(w < -tol))


# ---------------------------------------------------------------------------
# Antidiagonal geometry
# ---------------------------------------------------------------------------

def antidiag_len(n: int, k: int) -> int:
    """Number of strictly-upper positions on the k-th antidiagonal.

    Equals ceil(k/2) for k <= n-1 and ceil(n-1-k/2) beyond.
    """
    if not 1 <= k <= 2 * n - 3:
        raise ValueError(f"antidiagonal index k={k} out of range 1..{2 * n - 3}")
    if k <= n - 1:
        return (k + 1) // 2
    return n - 1 - k // 2


def upper_positions(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column indices of the upper half (j < l) of antidiagonal k, by row."""
    if not 1 <= k <= 2 * n - 3:
        raise ValueError(f"antidiagonal index k={k} out of range 1..{2 * n - 3}")
    j0 = max(0, k - n + 1)
    js = np.arange(j0, (k + 1) // 2)
    return js, k - js


def antidiag_include(n: int, k: int, v: np.ndarray) -> np.ndarray:
    """Embed a complex vector into the k-th antidiagonal of a Hermitian matrix.

    Entry (j, l) with j + l = k and j < l receives v[p] / sqrt(2) where p is
    the position of row j along the upper half; entries below the diagonal
    are the conjugates, everything else (including the diagonal) is zero.
    Real inputs of equal length preserve the Euclidean inner product under
    hs_inner.
    """
    v = np.asarray(v, dtype=complex).ravel()
    g = antidiag_len(n, k)
    if v.shape[0] != g:
        raise ValueError(f"expected a vector of length {g} for (n={n}, k={k}), got {v.shape[0]}")
    X = np.zeros((n, n), dtype=complex)
    js, ls = upper_positions(n, k)
    X[js, ls] = v / np.sqrt(2.0)
    X[ls, js] = v.conj() / np.sqrt(2.0)
    return X


# ---------------------------------------------------------------------------
# Orthonormal coordinates on H(n)
# ---------------------------------------------------------------------------

_UPPER_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _upper_all(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Concatenated upper positions for k = 1..2n-3, antidiagonal-major."""
    cached = _UPPER_CACHE.get(n)
    if cached is None:
        rows, cols = [], []
        for k in range(1, 2 * n - 2):
            js, ls = upper_positions(n, k)
            rows.append(js)
            cols.append(ls)
        cached = (np.concatenate(rows), np.concatenate(cols))
        _UPPER_CACHE[n] = cached
    return cached


def hvec(X: np.ndarray) -> np.ndarray:
    """Coordinates of a Hermitian matrix in the orthonormal basis of H(n).

    Layout: n diagonal entries, then per upper antidiagonal position the
    pair (sqrt(2) Re X_jl, sqrt(2) Im X_jl). An isometry: ||hvec(X)||_2
    equals the Frobenius norm of X.
    """
    X = np.asarray(X)
    n = X.shape[0]
    I, J = _upper_all(n)
    out = np.empty(n * n)
    out[:n] = np.real(np.diagonal(X))
    off = X[I, J]
    out[n::2] = np.sqrt(2.0) * off.real
    out[n + 1::2] = np.sqrt(2.0) * off.imag
    return out


def hunvec(y: np.ndarray, n: int) -> np.ndarray:
    """Inverse of hvec: rebuild the Hermitian matrix from coordinates."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != n * n:
        raise ValueError(f"expected {n * n} coordinates, got {y.shape[0]}")
    I, J = _upper_all(n)
    X = np.zeros((n, n), dtype=complex)
    X[np.arange(n), np.arange(n)] = y[:n]
    off = (y[n::2] + 1j * y[n + 1::2]) / np.sqrt(2.0)
    X[I, J] = off
    X[J, I] = off.conj()
    return X
