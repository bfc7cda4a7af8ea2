"""Explicit measurement ensembles on Hermitian matrices.

Four construction recipes are provided:

* ``rank_one_frame`` ("thm1"): n diagonal projectors plus normalized rank-one
  projectors of the phase vectors v_k and their conjugates, 5n-6 operators,
  suitable for phase retrieval (rank-one recovery).
* ``vandermonde_ensemble`` ("thm2"): a banded-subspace basis plus per-
  antidiagonal I_k(x)/R_k(x) pairs at r positive nodes, 4r(n-r)+n-2r
  operators, suitable for rank-r recovery.
* ``general_ensemble`` ("thm3"): the same shape driven by arbitrary totally
  non-singular coefficient blocks A_k, A'_k.
* ``example_n4`` ("example_n4"): the fixed 14-operator 4x4 instance with
  all-ones antidiagonal coefficients.

Operator ordering is fixed per recipe so serialized ensembles are
reproducible: the banded/diagonal block comes first, then antidiagonals in
ascending k. Within an antidiagonal, "thm2" emits (imaginary, real) per node
and "thm3"/"example_n4" emit (real, imaginary) per coefficient column; the
rank-one frame emits (v_k, conj(v_k)) pairs per node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hermitian import antidiag_include, antidiag_len, hvec, upper_positions
from .nonsingular import all_minors_nonzero

RECIPES = ("thm1", "thm2", "thm3", "example_n4", "custom")


@dataclass
class MeasurementEnsemble:
    """An ordered tuple of Hermitian measurement operators with metadata.

    ``matrices`` has shape (m, n, n); ``r`` is the target rank the
    construction is designed to recover; ``recipe``/``params`` record how it
    was built (nodes, phase, coefficient blocks) for reproducibility.
    """

    n: int
    r: int
    matrices: np.ndarray
    recipe: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.matrices = np.asarray(self.matrices, dtype=complex)
        if self.matrices.ndim != 3 or self.matrices.shape[1:] != (self.n, self.n):
            raise ValueError(f"matrices must have shape (m, {self.n}, {self.n})")
        if self.recipe not in RECIPES:
            raise ValueError(f"unknown recipe {self.recipe!r}")

    @property
    def m(self) -> int:
        return self.matrices.shape[0]

    def coord_rows(self) -> np.ndarray:
        """Stacked hvec coordinates, one row per operator."""
        return np.stack([hvec(G) for G in self.matrices])


def expected_count(n: int, r: int) -> int:
    """Operator count of the rank-r construction: 4r(n-r) + n - 2r."""
    return 4 * r * (n - r) + n - 2 * r


def max_rank(n: int) -> int:
    """Largest admissible target rank, ceil(n/2) - 1."""
    return math.ceil(n / 2) - 1


def check_nodes(xs: Sequence[float], count: int | None = None,
                positive: bool = False) -> np.ndarray:
    """Validate a node list: strictly increasing, nonzero reals."""
    xs = np.asarray(xs, dtype=float).ravel()
    if count is not None and xs.shape[0] != count:
        raise ValueError(f"expected {count} nodes, got {xs.shape[0]}")
    if np.any(xs == 0.0):
        raise ValueError("nodes must be nonzero")
    if np.any(np.diff(xs) <= 0.0):
        raise ValueError("nodes must be strictly increasing")
    if positive and xs[0] <= 0.0:
        raise ValueError("nodes must be strictly positive for rank >= 2 constructions")
    return xs


# Node lists maximizing the frame's smallest singular value, tuned offline
# by scripts/tune_rank_one_nodes.py (gains of 2x to 350x over the Chebyshev
# fallback). The node choice only moves the conditioning, never the operator
# span or the kernel.
TUNED_RANK_ONE_NODES = {
    3: [-1.663775, -0.555393, 1.041648],
    4: [-1.335516, -0.753347, 0.399286, 0.995361, 2.580414],
    5: [-1.869104, -1.052403, -0.755742, 0.264455, 0.736299, 1.266659,
        2.484915],
    6: [-3.122464, -1.533271, -0.999878, -0.681612, -0.286564, 0.576926,
        0.825791, 1.179685, 1.765737],
    7: [-3.131532, -1.630410, -1.143074, -0.838795, -0.453743, -0.182979,
        0.592044, 0.802412, 1.076775, 1.578114, 2.667124],
    8: [-3.854134, -1.925692, -1.346406, -1.111449, -0.904254, -0.585496,
        0.145290, 0.410468, 0.646316, 0.849382, 1.143303, 1.598821,
        2.436947],
    9: [-3.001746, -2.167394, -1.425345, -1.154827, -0.988898, -0.718484,
        -0.436734, 0.121579, 0.346091, 0.568158, 0.817702, 1.037128,
        1.298704, 1.786677, 2.339528],
    10: [-4.754825, -2.725454, -1.662256, -1.206775, -1.004980, -0.868433,
         -0.707550, -0.574234, 0.104367, 0.325700, 0.556253, 0.719210,
         0.893741, 1.076957, 1.357381, 1.894474, 2.937521],
    11: [-9.720933, -3.434804, -2.028854, -1.442642, -1.144495, -0.951520,
         -0.834732, -0.595431, -0.407401, -0.235391, 0.188185, 0.393309,
         0.616153, 0.763622, 0.921105, 1.135402, 1.348089, 1.810822,
         2.286206],
    12: [-6.004416, -3.365600, -2.030245, -1.496029, -1.254992, -1.112473,
         -0.885602, -0.798120, -0.644503, -0.535020, 0.109730, 0.281714,
         0.423898, 0.575202, 0.726309, 0.867258, 1.081781, 1.226518,
         1.581480, 2.127911, 2.980279],
}


def default_nodes_rank_one(n: int) -> np.ndarray:
    """Default 2n-3 nodes for the rank-one frame.

    Tuned lists (see TUNED_RANK_ONE_NODES) where available; otherwise
    Chebyshev points of order 2n-2 on (-1.3, 1.3) with the point nearest
    zero removed. Both are symmetric-ish, nonzero, and far better
    conditioned than equispaced nodes in (0, 1), whose measurement matrix
    is numerically singular by n = 12.
    """
    if n in TUNED_RANK_ONE_NODES:
        return np.asarray(TUNED_RANK_ONE_NODES[n], dtype=float)
    m = 2 * n - 2
    pts = np.sort(np.cos((2 * np.arange(1, m + 1) - 1) * np.pi / (2 * m)))
    return 1.3 * np.delete(pts, int(np.argmin(np.abs(pts))))


def default_nodes_rank_r(r: int) -> np.ndarray:
    """Default positive nodes k/(r+1), k = 1..r."""
    return np.arange(1, r + 1) / (r + 1)


# ---------------------------------------------------------------------------
# Rank-one frame (phase retrieval)
# ---------------------------------------------------------------------------

def phase_vector(n: int, x: float, phi: float | None = None) -> np.ndarray:
    """The length-n vector with component j equal to x^j e^{i j phi}.

    The default phase phi = pi/(2n) guarantees every antidiagonal of the
    rank-one projector has nonvanishing real and imaginary coefficient
    patterns. A custom phi must satisfy j*phi != k*pi/2 for j = 1..n-1 and
    integer k.
    """
    if x == 0.0:
        raise ValueError("x must be nonzero")
    if phi is None:
        phi = np.pi / (2 * n)
    else:
        _check_phase(n, phi)
    j = np.arange(n)
    return (float(x) ** j) * np.exp(1j * j * phi)


def _check_phase(n: int, phi: float, tol: float = 1e-12) -> None:
    for j in range(1, n):
        ratio = j * phi / (np.pi / 2)
        if abs(ratio - round(ratio)) <= tol:
            raise ValueError(
                f"invalid phase: {j}*phi is a multiple of pi/2 (phi={phi!r})")


def rank_one_frame(n: int, nodes: Sequence[float] | None = None,
                   phi: float | None = None) -> MeasurementEnsemble:
    """The 5n-6 operator frame: diagonal projectors plus phase-vector projectors.

    Operators, in order: e_i e_i* for i = 0..n-1, then for each node x_k the
    normalized projectors of v_k = phase_vector(n, x_k) and of its entrywise
    conjugate. Requires n >= 3 and 2n-3 strictly increasing nonzero nodes.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    if nodes is None:
        nodes = default_nodes_rank_one(n)
    nodes = check_nodes(nodes, count=2 * n - 3)
    mats = [_diag_unit(n, i) for i in range(n)]
    for x in nodes:
        v = phase_vector(n, float(x), phi)
        for vec in (v, v.conj()):
            P = np.outer(vec, vec.conj())
            mats.append(P / np.linalg.norm(P))
    params = {"nodes": [float(x) for x in nodes]}
    if phi is not None:
        params["phi"] = float(phi)
    return MeasurementEnsemble(n, 1, np.stack(mats), "thm1", params)


def _diag_unit(n: int, i: int) -> np.ndarray:
    E = np.zeros((n, n), dtype=complex)
    E[i, i] = 1.0
    return E


# ---------------------------------------------------------------------------
# Banded subspace and antidiagonal operator families
# ---------------------------------------------------------------------------

def banded_basis(n: int, r: int) -> list[np.ndarray]:
    """Orthonormal basis of the Hermitian matrices vanishing on the open
    antidiagonal band 2r-1 <= j+l <= 2(n-r)-1 off the diagonal.

    The n diagonal units plus, for each antidiagonal outside the band, the
    real/imaginary antidiagonal units. Size n + 4r(r-1); for r = 1 these are
    just the diagonal units.
    """
    if not 1 <= r <= max_rank(n):
        raise ValueError(f"rank r={r} out of range 1..{max_rank(n)} for n={n}")
    mats = [_diag_unit(n, i) for i in range(n)]
    outside = [k for k in range(1, 2 * n - 2) if k <= 2 * r - 2 or k >= 2 * (n - r)]
    for k in outside:
        g = antidiag_len(n, k)
        for j in range(g):
            e = np.zeros(g)
            e[j] = 1.0
            mats.append(antidiag_include(n, k, e))
            mats.append(antidiag_include(n, k, 1j * e))
    return mats


def power_coefficients(n: int, k: int, x: float) -> np.ndarray:
    """Coefficient column (1, x, ..., x^{g-1}) along antidiagonal k."""
    if x == 0.0:
        raise ValueError("x must be nonzero")
    return float(x) ** np.arange(antidiag_len(n, k))


def antidiag_pair(n: int, k: int, x: float) -> tuple[np.ndarray, np.ndarray]:
    """The real/imaginary antidiagonal operators R_k(x), I_k(x).

    R_k(x) carries consecutive powers of x along the upper half of
    antidiagonal k (1 at the topmost position), mirrored below; I_k(x)
    carries i times the same powers, conjugate-mirrored. Both have zero
    diagonal.
    """
    u = power_coefficients(n, k, x)
    R = antidiag_include(n, k, np.sqrt(2.0) * u)
    I = antidiag_include(n, k, 1j * np.sqrt(2.0) * u)
    return R, I


def vandermonde_ensemble(n: int, r: int,
                         nodes: Sequence[float] | None = None) -> MeasurementEnsemble:
    """Rank-r ensemble from Vandermonde coefficient columns at positive nodes.

    Operators: banded_basis(n, r), then for each antidiagonal k in the band
    2r-1..2(n-r)-1 the pairs (I_k(x_1), R_k(x_1), ..., I_k(x_r), R_k(x_r)).
    Count 4r(n-r) + n - 2r.

    Nodes must be strictly positive and increasing. Positivity is stricter
    than requiring distinct nonzero values, but mixed-sign nodes can produce
    vanishing generalized Vandermonde minors for r >= 2 (rows {0, 2} at
    nodes {-1, 1}), which breaks the total non-singularity the construction
    relies on; positive increasing nodes make every minor positive.
    """
    if nodes is None:
        nodes = default_nodes_rank_r(r)
    nodes = check_nodes(nodes, count=r, positive=True)
    mats = banded_basis(n, r)
    for k in range(2 * r - 1, 2 * (n - r)):
        for x in nodes:
            R, I = antidiag_pair(n, k, float(x))
            mats.append(I)
            mats.append(R)
    ens = MeasurementEnsemble(n, r, np.stack(mats), "thm2",
                              {"nodes": [float(x) for x in nodes]})
    assert ens.m == expected_count(n, r)
    return ens


def general_ensemble(n: int, r: int, blocks: dict[int, np.ndarray],
                     blocks_imag: dict[int, np.ndarray] | None = None,
                     verify: bool = True) -> MeasurementEnsemble:
    """Rank-r ensemble from arbitrary totally non-singular coefficient blocks.

    ``blocks[k]`` (and ``blocks_imag[k]``, defaulting to ``blocks[k]``) must
    be a real antidiag_len(n, k) x r matrix for every antidiagonal k in
    2r-1..2(n-r)-1. Operators: banded_basis(n, r), then per antidiagonal the
    pairs (iota_k(A_k[:, c]), iota_k(i A'_k[:, c])) for c = 0..r-1.

    With verify=True every block is certified totally non-singular first;
    a failure names the offending antidiagonal and minor.
    """
    if not 1 <= r <= max_rank(n):
        raise ValueError(f"rank r={r} out of range 1..{max_rank(n)} for n={n}")
    if blocks_imag is None:
        blocks_imag = blocks
    band = list(range(2 * r - 1, 2 * (n - r)))
    norm_blocks: dict[int, np.ndarray] = {}
    norm_imag: dict[int, np.ndarray] = {}
    for k in band:
        g = antidiag_len(n, k)
        for tag, src, dst in (("A", blocks, norm_blocks), ("A'", blocks_imag, norm_imag)):
            if k not in src:
                raise ValueError(f"missing coefficient block {tag}_{k}")
            B = np.asarray(src[k], dtype=float)
            if B.ndim == 1:
                B = B[:, None]
            if B.shape != (g, r):
                raise ValueError(f"block {tag}_{k} must be {g}x{r}, got {B.shape}")
            if verify:
                report = all_minors_nonzero(B)
                if not report.is_tns:
                    raise ValueError(
                        f"coefficient block {tag}_{k} is not totally non-singular "
                        f"(vanishing minor at rows/cols {report.witness})")
            dst[k] = B
    mats = banded_basis(n, r)
    for k in band:
        A, Ai = norm_blocks[k], norm_imag[k]
        for c in range(r):
            mats.append(antidiag_include(n, k, A[:, c]))
            mats.append(antidiag_include(n, k, 1j * Ai[:, c]))
    params = {"blocks": {str(k): norm_blocks[k].tolist() for k in band},
              "blocks_imag": {str(k): norm_imag[k].tolist() for k in band}}
    ens = MeasurementEnsemble(n, r, np.stack(mats), "thm3", params)
    assert ens.m == expected_count(n, r)
    return ens


def example_n4() -> MeasurementEnsemble:
    """The fixed 14-operator ensemble on 4x4 Hermitian matrices.

    All-ones coefficient columns scaled by sqrt(2): four diagonal projectors,
    then per antidiagonal k = 1..5 the matrix with ones on the antidiagonal
    and its +-i counterpart. Entries are exactly 0, +-1, +-i.
    """
    n = 4
    mats = [_diag_unit(n, i) for i in range(n)]
    for k in range(1, 2 * n - 2):
        ones = np.sqrt(2.0) * np.ones(antidiag_len(n, k))
        mats.append(antidiag_include(n, k, ones))
        mats.append(antidiag_include(n, k, 1j * ones))
    # The sqrt(2) factors cancel exactly in IEEE arithmetic, so entries are
    # bit-exact 0, +-1, +-i.
    return MeasurementEnsemble(n, 1, np.stack(mats), "example_n4", {})


# ---------------------------------------------------------------------------
# Cosine/sine antidiagonal matrices (span-equivalent form of the frame)
# ---------------------------------------------------------------------------

def cos_sin_matrices(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Antidiagonal matrices with entries cos((j-l)pi/2n) and i sin((j-l)pi/2n).

    The cosine matrix includes the central diagonal entry (value 1) when k is
    even; every off-diagonal antidiagonal entry of both matrices is nonzero
    because |j-l| pi/2n stays strictly inside (0, pi/2).
    """
    if not 1 <= k <= 2 * n - 3:
        raise ValueError(f"antidiagonal index k={k} out of range 1..{2 * n - 3}")
    X = np.zeros((n, n), dtype=complex)
    Y = np.zeros((n, n), dtype=complex)
    js, ls = upper_positions(n, k)
    ang = (js - ls) * np.pi / (2 * n)
    X[js, ls] = np.cos(ang)
    X[ls, js] = np.cos(ang)
    Y[js, ls] = 1j * np.sin(ang)
    Y[ls, js] = -1j * np.sin(ang)
    if k % 2 == 0 and k // 2 < n:
        X[k // 2, k // 2] = 1.0
    return X, Y


def cos_sin_coefficients(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient columns u_k, w_k with iota_k(u_k) = offdiag(X_k) and
    iota_k(i w_k) = Y_k. All entries are nonzero."""
    js, ls = upper_positions(n, k)
    ang = (js - ls) * np.pi / (2 * n)
    return np.sqrt(2.0) * np.cos(ang), np.sqrt(2.0) * np.sin(ang)


def coefficient_blocks(ens: MeasurementEnsemble) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Per-antidiagonal real coefficient blocks (A_k, A'_k) of an ensemble.

    These are the matrices whose total non-singularity drives both the
    structural completeness certificate and the structural kernel basis.
    For the rank-one frame the blocks come from the span-equivalent
    cosine/sine form, which is independent of the node list.
    """
    n, r = ens.n, ens.r
    band = range(2 * r - 1, 2 * (n - r))
    if ens.recipe == "thm2":
        nodes = np.asarray(ens.params["nodes"], dtype=float)
        out = {}
        for k in band:
            A = np.stack([power_coefficients(n, k, x) for x in nodes], axis=1)
            out[k] = (A, A.copy())
        return out
    if ens.recipe == "thm3":
        return {k: (np.asarray(ens.params["blocks"][str(k)], dtype=float),
                    np.asarray(ens.params["blocks_imag"][str(k)], dtype=float))
                for k in band}
    if ens.recipe == "example_n4":
        return {k: (np.ones((antidiag_len(n, k), 1)),
                    np.ones((antidiag_len(n, k), 1))) for k in band}
    if ens.recipe == "thm1":
        out = {}
        for k in band:
            u, w = cos_sin_coefficients(n, k)
            out[k] = (u[:, None], w[:, None])
        return out
    raise ValueError(f"no coefficient blocks for recipe {ens.recipe!r}")


# ---------------------------------------------------------------------------
# Recipe dispatch and serialization
# ---------------------------------------------------------------------------

def build_ensemble(recipe: str, n: int, r: int = 1,
                   nodes: Sequence[float] | None = None,
                   blocks: dict[int, np.ndarray] | None = None,
                   blocks_imag: dict[int, np.ndarray] | None = None,
                   phi: float | None = None) -> MeasurementEnsemble:
    """Build an ensemble by recipe name (CLI / config entry point)."""
    if recipe == "thm1":
        return rank_one_frame(n, nodes, phi)
    if recipe == "thm2":
        return vandermonde_ensemble(n, r, nodes)
    if recipe == "thm3":
        if blocks is None:
            raise ValueError("recipe thm3 requires coefficient blocks")
        return general_ensemble(n, r, blocks, blocks_imag)
    if recipe == "example_n4":
        return example_n4()
    raise ValueError(f"unknown recipe {recipe!r}")


def ensemble_to_dict(ens: MeasurementEnsemble) -> dict:
    """JSON-ready dict: full matrices as nested [re, im] pairs, row-major."""
    mats = [[[[float(z.real), float(z.imag)] for z in row] for row in G]
            for G in ens.matrices]
    return {"n": ens.n, "r": ens.r, "recipe": ens.recipe,
            "params": ens.params, "matrices": mats}


def ensemble_from_dict(d: dict) -> MeasurementEnsemble:
    mats = np.asarray(d["matrices"], dtype=float)
    if mats.ndim != 4 or mats.shape[-1] != 2:
        raise ValueError("matrices must be nested [re, im] pairs")
    M = mats[..., 0] + 1j * mats[..., 1]
    return MeasurementEnsemble(int(d["n"]), int(d["r"]), M,
                               str(d["recipe"]), dict(d.get("params", {})))
