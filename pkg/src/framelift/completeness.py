"""Completeness certification for measurement ensembles.

A measurement is r-complete when it separates every PSD matrix of rank at
most r from every other PSD matrix; equivalently, every nonzero kernel
element has at least r+1 positive (hence also r+1 negative) eigenvalues.

Three certification levels, strongest first:

* ``structural``: verifies the construction hypotheses exactly (banded block
  spans its subspace, coefficient blocks totally non-singular, operator
  count and linear independence) — completeness then holds by the
  construction theorem.
* ``sampled``: random unit kernel combinations all satisfy the eigenvalue
  sign condition. Sampling can only corroborate, never certify: a violation
  disproves completeness (up to tolerance), absence of one does not prove it.
* ``oracle``: random pairs (rank <= r PSD, arbitrary PSD) are separated by
  the measurement. Same caveat.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frames import MeasurementEnsemble, banded_basis, coefficient_blocks, \
    cos_sin_matrices, expected_count
from .hermitian import hvec
from .measurement import KernelBasis, MeasurementOperator, apply, \
    max_principal_angle_sin, orthonormal_rows
from .nonsingular import all_minors_nonzero


@dataclass
class CompletenessCertificate:
    level: str  # "structural" | "sampled" | "oracle"
    r: int
    ok: bool
    details: list[dict] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"level": self.level, "r": self.r, "ok": self.ok,
                "details": self.details}


def certify_structural(ens: MeasurementEnsemble,
                       tol: float = 1e-10) -> CompletenessCertificate:
    """Verify the construction hypotheses of an ensemble exactly.

    Checks, in order: (a) the non-antidiagonal block spans the banded
    subspace, (b) every coefficient block is totally non-singular, (c) the
    operator count matches 4r(n-r)+n-2r and the operators are linearly
    independent. For the rank-one frame an extra span-equivalence check
    reduces it to the cosine/sine form first. Any failed hypothesis makes
    ok=False with the offending item named in details.
    """
    n, r = ens.n, ens.r
    details: list[dict] = []
    ok = True

    if ens.recipe not in ("thm1", "thm2", "thm3", "example_n4"):
        return CompletenessCertificate("structural", r, False,
                                       [{"check": "recipe", "ok": False,
                                         "error": f"recipe {ens.recipe!r} has no structural certificate"}])

    rows = ens.coord_rows()

    # (c) count and linear independence
    count_ok = ens.m == expected_count(n, r)
    details.append({"check": "operator_count", "ok": count_ok,
                    "expected": expected_count(n, r), "actual": ens.m})
    rank = int(np.linalg.matrix_rank(rows, tol=tol * max(1.0, float(np.linalg.norm(rows)))))
    indep_ok = rank == ens.m
    details.append({"check": "linear_independence", "ok": indep_ok,
                    "rank": rank, "m": ens.m})
    ok = ok and count_ok and indep_ok

    if ens.recipe == "thm1":
        # Reduce to the cosine/sine form: equal spans by rank and mutual
        # containment, then certify that form. The achievable angle precision
        # degrades with the conditioning of the frame's coordinate matrix, so
        # the tolerance tracks it.
        alt = [hvec(G) for G in ens.matrices[:n]]
        for k in range(1, 2 * n - 2):
            X, Y = cos_sin_matrices(n, k)
            alt.append(hvec(X))
            alt.append(hvec(Y))
        s = np.linalg.svd(rows, compute_uv=False)
        cond = float(s[0] / s[ens.m - 1]) if s[ens.m - 1] > 0 else np.inf
        span_tol = max(1e-9, 100 * n * np.finfo(float).eps * cond)
        span_ok = spans_equal(rows, np.stack(alt), tol=span_tol)
        details.append({"check": "span_equivalence", "ok": span_ok,
                        "tol": span_tol})
        ok = ok and span_ok

    # (a) banded block spans the banded subspace
    if ens.recipe in ("thm2", "thm3", "example_n4"):
        dim_banded = n + 4 * r * (r - 1)
        block_rows = rows[:dim_banded]
        banded_rows = np.stack([hvec(B) for B in banded_basis(n, r)])
        banded_ok = spans_equal(block_rows, banded_rows, tol=tol)
        details.append({"check": "banded_span", "ok": banded_ok,
                        "dim": dim_banded})
        ok = ok and banded_ok

    # (b) coefficient blocks totally non-singular
    for k, (A, Ai) in sorted(coefficient_blocks(ens).items()):
        for tag, B in (("A", A), ("A'", Ai)):
            report = all_minors_nonzero(B)
            details.append({"check": "totally_nonsingular", "antidiagonal": k,
                            "block": tag, "ok": report.is_tns,
                            "min_abs_minor": report.min_abs_minor,
                            "minors_checked": report.minors_checked,
                            "witness": report.witness})
            ok = ok and report.is_tns

    return CompletenessCertificate("structural", r, ok, details)


def spans_equal(rows_a: np.ndarray, rows_b: np.ndarray, tol: float) -> bool:
    """Equal row spaces: equal ranks and mutual containment within tol."""
    Qa = orthonormal_rows(rows_a)
    Qb = orthonormal_rows(rows_b)
    if Qa.shape[0] != Qb.shape[0]:
        return False
    return max_principal_angle_sin(Qa, Qb) <= tol


def kernel_spectral_check(kernel: KernelBasis, r: int, trials: int = 10_000,
                          seed: int | np.random.Generator | None = 0,
                          tol: float = 1e-8) -> CompletenessCertificate:
    """Sample unit-Frobenius kernel combinations and count eigenvalue signs.

    Every sample must show at least r+1 eigenvalues above tol and r+1 below
    -tol; a violating sample disproves r-completeness (up to tol) and is
    returned in the details. An empty kernel is vacuously certified.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if kernel.dim == 0:
        return CompletenessCertificate("sampled", r, True,
                                       [{"check": "kernel_signs", "trials": 0,
                                         "note": "empty kernel"}])
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    basis = kernel.elements
    d = kernel.dim
    min_pos = np.inf
    min_neg = np.inf
    chunk = 2048
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        C = rng.normal(size=(size, d))
        Z = np.tensordot(C, basis, axes=(1, 0))
        norms = np.linalg.norm(Z, axis=(1, 2))
        Z /= norms[:, None, None]
        w = np.linalg.eigvalsh(Z)
        pos = np.sum(w > tol, axis=1)
        neg = np.sum(w < -tol, axis=1)
        min_pos = min(min_pos, int(pos.min()))
        min_neg = min(min_neg, int(neg.min()))
        bad = np.flatnonzero((pos < r + 1) | (neg < r + 1))
        if bad.size:
            i = int(bad[0])
            return CompletenessCertificate(
                "sampled", r, False,
                [{"check": "kernel_signs", "trials": done + i + 1,
                  "positives": int(pos[i]), "negatives": int(neg[i]),
                  "required": r + 1, "tol": tol,
                  "witness_coefficients": C[i].tolist()}])
        done += size
    return CompletenessCertificate(
        "sampled", r, True,
        [{"check": "kernel_signs", "trials": trials, "tol": tol,
          "min_positives": int(min_pos), "min_negatives": int(min_neg),
          "required": r + 1,
          "note": "sampling corroborates, it cannot certify"}])


def random_psd(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Random PSD matrix of rank at most r: VV* with complex Gaussian V."""
    V = (rng.normal(size=(n, r)) + 1j * rng.normal(size=(n, r))) / np.sqrt(2.0)
    return V @ V.conj().T


def discrimination_oracle(op: MeasurementOperator, r: int, trials: int = 500,
                          seed: int | np.random.Generator | None = 0,
                          tol: float = 1e-6) -> CompletenessCertificate:
    """Sampled separation check straight from the completeness definition.

    Draws pairs (X of rank <= r, X' PSD of random rank) and requires
    ||M(X) - M(X')||_2 > tol whenever ||X - X'||_2 > tol. A violation
    disproves r-completeness up to tolerance.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = op.n
    min_margin = np.inf
    tested = 0
    for _ in range(trials):
        X = random_psd(n, r, rng)
        Xp = random_psd(n, int(rng.integers(1, n + 1)), rng)
        gap = float(np.linalg.norm(X - Xp))
        if gap <= tol:
            continue
        tested += 1
        sep = float(np.linalg.norm(apply(op, X) - apply(op, Xp)))
        min_margin = min(min_margin, sep)
        if sep <= tol:
            return CompletenessCertificate(
                "oracle", r, False,
                [{"check": "discrimination", "pairs_tested": tested,
                  "separation": sep, "distance": gap, "tol": tol}])
    return CompletenessCertificate(
        "oracle", r, True,
        [{"check": "discrimination", "pairs_tested": tested, "tol": tol,
          "min_separation": float(min_margin),
          "note": "sampling corroborates, it cannot certify"}])
