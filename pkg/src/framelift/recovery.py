"""Recovery solvers, signal extraction, and stability estimation.

Noiseless recovery solves the feasibility problem {Y >= 0, M(Y) = b} by
alternating projections between the affine set and the PSD cone; for an
r-complete measurement and consistent b the feasible set is the single
matrix that produced the outcomes, so plain POCS converges to it.

Noisy recovery minimizes ||M(Y) - b||_2 over the PSD cone. The default
solver is ADMM (Douglas-Rachford splitting) whose quadratic prox is an
exact linear solve via the precomputed SVD: plain projected gradient with
step 1/sigma_max^2 is also available (method="pgd") but its convergence
degrades with the square of the condition number and it stalls far from the
minimizer on realistically conditioned frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hermitian import eig_ordered, hunvec, hvec
from .measurement import KernelBasis, MeasurementOperator

PINV_RCOND = 1e-13


@dataclass
class RecoveryResult:
    """PSD iterate with convergence diagnostics and optional extracted signal."""

    Y: np.ndarray
    residual: float
    iterations: int
    converged: bool
    signal: np.ndarray | None = None
    lambda1: float | None = None
    phase: float | None = None
    diagnostics: dict = field(default_factory=dict)


def _psd_project_vec(y: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    """PSD-cone projection in hvec coordinates; returns (projected, lambda_min)."""
    X = hunvec(y, n)
    w, V = np.linalg.eigh(X)
    lam_min = float(w[0])
    if lam_min >= 0.0:
        return y, lam_min
    wc = np.maximum(w, 0.0)
    return hvec((V * wc) @ V.conj().T), lam_min


def recover_noiseless(op: MeasurementOperator, b: np.ndarray,
                      tol: float = 1e-9, max_iters: int = 50_000,
                      method: str = "pocs",
                      record_history: bool = False) -> RecoveryResult:
    """Alternating projections onto {M(Y) = b} and the PSD cone.

    The affine projection uses the pseudoinverse of the coordinate matrix
    (singular values below PINV_RCOND * sigma_max are dropped). Stops when
    max(residual, |lambda_min|) <= tol * (1 + ||b||_2). On rare instances
    the linear POCS rate is too flat to reach the tolerance within the
    iteration cap; a stalled run falls back to the active-set finisher
    (exact least squares on the identified face), which solves the same
    feasibility problem. converged=False after both signals
    ill-conditioning or an inconsistent b.

    method="dykstra" adds the Boyle-Dykstra correction to the cone step,
    for near-degenerate intersections where the projection point matters.
    """
    b = np.asarray(b, dtype=float).ravel()
    if b.shape[0] != op.m:
        raise ValueError(f"expected {op.m} outcomes, got {b.shape[0]}")
    if method not in ("pocs", "dykstra"):
        raise ValueError(f"unknown method {method!r}")
    n = op.n
    U, s, Vt = op.svd
    keep = s > PINV_RCOND * s[0]
    Uk, sk, Vk = U[:, keep], s[keep], Vt[keep]

    scale = tol * (1.0 + float(np.linalg.norm(b)))
    y = np.zeros(op.coord.shape[1])
    correction = np.zeros_like(y)
    lam_min = 0.0
    history: list[float] = []
    resid = float(np.linalg.norm(b))
    window = resid
    it = 0
    for it in range(1, max_iters + 1):
        r = op.coord @ y - b
        y = y - Vk.T @ ((Uk.T @ r) / sk)
        if method == "dykstra":
            before = y + correction
            y, lam_min = _psd_project_vec(before, n)
            correction = before - y
        else:
            y, lam_min = _psd_project_vec(y, n)
        resid = float(np.linalg.norm(op.coord @ y - b))
        if record_history:
            history.append(resid)
        if max(resid, abs(min(lam_min, 0.0))) <= scale:
            return _finish(y, n, resid, it, True, history)
        if it % 1000 == 0:
            if resid > 0.9 * window:
                break  # linear rate too flat: hand over to the finisher
            window = resid
    y_fin, _, _ = _active_set_finish(op, b, hunvec(y, n), tol)
    resid_fin = float(np.linalg.norm(op.coord @ y_fin - b))
    if resid_fin < resid:
        y, resid = y_fin, resid_fin
    result = _finish(y, n, resid, it, resid <= scale, history)
    result.diagnostics["stall_fallback"] = True
    return result


def recover_noisy(op: MeasurementOperator, b: np.ndarray,
                  tol: float = 1e-9, max_iters: int = 10_000,
                  method: str = "admm", rho: float | None = None,
                  record_history: bool = False) -> RecoveryResult:
    """Minimize ||M(Y) - b||_2 over the PSD cone.

    The default pipeline runs ADMM to identify the active face and then an
    active-set finisher (exact least squares on the face span, with rank
    drops and rank-adding steps along negative gradient eigendirections)
    that certifies first-order optimality: converged=True means the KKT
    conditions hold within a tol-scaled threshold. method="pgd" is the plain
    projected-gradient alternative without the finisher; its convergence
    degrades with the squared condition number. The minimizer inherits the
    measurement's stability guarantee: its distance to the true rank-r
    matrix is bounded by a constant times the noise level.
    """
    b = np.asarray(b, dtype=float).ravel()
    if b.shape[0] != op.m:
        raise ValueError(f"expected {op.m} outcomes, got {b.shape[0]}")
    if method == "admm":
        return _noisy_admm(op, b, tol, max_iters, rho, record_history)
    if method == "pgd":
        return _noisy_pgd(op, b, tol, max_iters, record_history)
    raise ValueError(f"unknown method {method!r}")


def _noisy_admm(op: MeasurementOperator, b: np.ndarray, tol: float,
                max_iters: int, rho: float | None,
                record_history: bool) -> RecoveryResult:
    n = op.n
    _, s, Vt = op.svd
    Vm = Vt.T
    smax = float(s[0])
    if rho is None:
        rho = 1e-2 * smax * smax
    Ctb = op.coord.T @ b
    scale = tol * (1.0 + float(np.linalg.norm(b)))

    shrink = (s * s) / (rho + s * s)
    z = np.zeros(op.coord.shape[1])
    u = np.zeros_like(z)
    history: list[float] = []
    it = 0
    for it in range(1, max_iters + 1):
        # y-update: argmin 0.5||Cy - b||^2 + (rho/2)||y - (z - u)||^2
        w = (z - u) + Ctb / rho
        y = w - Vm @ (shrink * (Vm.T @ w))
        z_new, _ = _psd_project_vec(y + u, n)
        primal = float(np.linalg.norm(y - z_new))
        dual = rho * float(np.linalg.norm(z_new - z))
        z = z_new
        u = u + y - z
        if record_history:
            history.append(float(np.linalg.norm(op.coord @ z - b)))
        if max(primal, dual) <= scale:
            break
        # residual balancing keeps the splitting well-scaled
        if it % 25 == 0:
            if primal > 10.0 * dual:
                rho *= 2.0
                u /= 2.0
                shrink = (s * s) / (rho + s * s)
            elif dual > 10.0 * primal:
                rho /= 2.0
                u *= 2.0
                shrink = (s * s) / (rho + s * s)
    y_fin, kkt_ok, outer = _active_set_finish(op, b, hunvec(z, n), tol)
    resid = float(np.linalg.norm(op.coord @ y_fin - b))
    result = _finish(y_fin, n, resid, it, kkt_ok, history)
    result.diagnostics["active_set_steps"] = outer
    return result


def _factor_polish(op: MeasurementOperator, b: np.ndarray, W: np.ndarray,
                   max_iters: int = 200) -> np.ndarray:
    """Levenberg-Marquardt on the factor W of Y = WW*.

    Minimizes ||M(WW*) - b||_2 over n x k complex factors. The Jacobian of
    the residual with respect to (Re W, Im W) is assembled from P_i = G_i W;
    the unitary gauge freedom W -> WQ makes the normal matrix singular,
    which the damping absorbs.
    """
    Gs = op.ensemble.matrices
    n, k = W.shape
    if k == 0:
        return W
    mu = 1e-8
    r = op.coord @ hvec(W @ W.conj().T) - b
    fval = 0.5 * float(r @ r)
    gscale = op.sigma_max ** 2
    for _ in range(max_iters):
        P = 2.0 * np.einsum("mij,jk->mik", Gs, W)
        J = np.concatenate([P.real.reshape(op.m, n * k),
                            P.imag.reshape(op.m, n * k)], axis=1)
        g = J.T @ r
        gnorm = float(np.linalg.norm(g))
        wnorm = max(1.0, float(np.linalg.norm(W)))
        if gnorm <= 1e-15 * gscale * wnorm * (1.0 + float(np.linalg.norm(b))):
            break
        p = J.shape[1]
        wide = p > op.m  # more parameters than measurements: solve the dual
        H = J @ J.T if wide else J.T @ J
        accepted = False
        for _ in range(25):
            if wide:
                # (J^T J + mu I)^{-1} J^T r = J^T (J J^T + mu I)^{-1} r
                step = -J.T @ np.linalg.solve(H + mu * np.eye(op.m), r)
            else:
                step = np.linalg.solve(H + mu * np.eye(p), -g)
            dW = step[:n * k].reshape(n, k) + 1j * step[n * k:].reshape(n, k)
            W_new = W + dW
            r_new = op.coord @ hvec(W_new @ W_new.conj().T) - b
            f_new = 0.5 * float(r_new @ r_new)
            if f_new < fval:
                W, r, fval = W_new, r_new, f_new
                mu = max(mu / 3.0, 1e-12)
                accepted = True
                break
            mu *= 4.0
        if not accepted or float(np.linalg.norm(dW)) <= 1e-15 * wnorm:
            break
    return W


def _active_set_finish(op: MeasurementOperator, b: np.ndarray, Y0: np.ndarray,
                       tol: float, max_outer: int = 12
                       ) -> tuple[np.ndarray, bool, int]:
    """Rank-adaptive refinement of the PSD-constrained least squares.

    Polishes a low-rank factor with Levenberg-Marquardt, then checks the
    cone KKT conditions: at a factor stationary point complementarity holds,
    so optimality reduces to lambda_min(gradient) >= -theta with
    theta = tol * sigma_max * (1 + ||b||). A negative eigenvalue yields an
    exact-step escape direction of one rank higher (a stationary point of
    the factorized problem that fails the test is not a cone minimizer);
    tiny factor columns are pruned before each polish.
    """
    n = op.n
    C = op.coord
    theta = tol * op.sigma_max * (1.0 + float(np.linalg.norm(b)))
    kmax = max(1, min(n, int(np.sqrt(op.m)) + 1))

    # start from the top eigenpair alone: extra columns from an unconverged
    # warmup iterate bog down the polish, while genuinely needed directions
    # come back through the escape step one exact ray at a time
    w, V = np.linalg.eigh(Y0)
    if float(w[-1]) > 0.0:
        W = V[:, -1:] * np.sqrt(w[-1])
    else:
        W = np.zeros((n, 0), dtype=complex)

    best_y = hvec(W @ W.conj().T)
    best_res = float(np.linalg.norm(C @ best_y - b))
    best_ok = False
    outer = 0
    for outer in range(1, max_outer + 1):
        # prune negligible factor directions
        if W.shape[1] > 1:
            u, s, vt = np.linalg.svd(W, full_matrices=False)
            keep = s > 1e-9 * float(s[0])
            W = u[:, keep] * s[keep]
        W = _factor_polish(op, b, W)
        y = hvec(W @ W.conj().T)
        res = float(np.linalg.norm(C @ y - b))
        G = hunvec(C.T @ (C @ y - b), n)
        wg, Vg = np.linalg.eigh(G)
        ok = bool(wg[0] >= -theta)
        if res < best_res or (ok and not best_ok):
            best_y, best_res, best_ok = y, res, ok
        if ok:
            return best_y, True, outer
        if W.shape[1] >= kmax:
            break
        # escape direction: exact ray step along the most negative
        # gradient eigenvector, appended as a fresh factor column
        v = Vg[:, 0]
        d = C @ hvec(np.outer(v, v.conj()))
        beta = -float(d @ (C @ y - b)) / float(d @ d)
        if beta <= 0:
            break
        W = np.concatenate([W, np.sqrt(beta) * v[:, None]], axis=1)
    return best_y, best_ok, outer


def _noisy_pgd(op: MeasurementOperator, b: np.ndarray, tol: float,
               max_iters: int, record_history: bool) -> RecoveryResult:
    n = op.n
    step = 1.0 / (op.sigma_max ** 2)
    scale = tol * (1.0 + float(np.linalg.norm(b)))
    y = np.zeros(op.coord.shape[1])
    history: list[float] = []
    it = 0
    for it in range(1, max_iters + 1):
        g = op.coord.T @ (op.coord @ y - b)
        y_new, _ = _psd_project_vec(y - step * g, n)
        gap = float(np.linalg.norm(y_new - y)) / step
        y = y_new
        if record_history:
            history.append(float(np.linalg.norm(op.coord @ y - b)))
        if gap <= scale:
            resid = float(np.linalg.norm(op.coord @ y - b))
            return _finish(y, n, resid, it, True, history)
    resid = float(np.linalg.norm(op.coord @ y - b))
    return _finish(y, n, resid, max_iters, False, history)


def _finish(y: np.ndarray, n: int, resid: float, iters: int, converged: bool,
            history: list[float]) -> RecoveryResult:
    Y = hunvec(y, n)
    xhat, lam1 = extract_signal(Y)
    diag: dict = {}
    if history:
        diag["residual_history"] = np.asarray(history)
    w = np.linalg.eigvalsh(Y)
    if Y.shape[0] >= 2 and abs(float(w[-1]) - float(w[-2])) <= 1e-12 * max(1.0, abs(float(w[-1]))):
        diag["top_eigenvalue_degenerate"] = True
    return RecoveryResult(Y=Y, residual=resid, iterations=iters,
                          converged=converged, signal=xhat, lambda1=lam1,
                          diagnostics=diag)


# ---------------------------------------------------------------------------
# Signal extraction and phase alignment
# ---------------------------------------------------------------------------

def extract_signal(Y: np.ndarray) -> tuple[np.ndarray, float]:
    """Top eigenpair signal estimate sqrt(max(lambda_1, 0)) * v_1.

    Ties in lambda_1 are broken by taking the first vector of the ordered
    eigendecomposition, in which case the estimate is non-unique.
    """
    spec = eig_ordered(Y)
    lam1 = float(spec.values[0])
    xhat = math.sqrt(max(lam1, 0.0)) * spec.vectors[:, 0]
    return xhat, lam1


def align_phase(x: np.ndarray, xhat: np.ndarray) -> tuple[float, float]:
    """Optimal global phase and the aligned residual.

    phi = -arg <x, xhat> (0 when the inner product vanishes); the returned
    error ||x - e^{i phi} xhat||_2 is the minimum over all phases.
    """
    x = np.asarray(x, dtype=complex).ravel()
    xhat = np.asarray(xhat, dtype=complex).ravel()
    if x.shape != xhat.shape:
        raise ValueError("signals must have equal length")
    inner = np.vdot(x, xhat)
    phi = 0.0 if inner == 0 else float(-np.angle(inner))
    err = float(np.linalg.norm(x - np.exp(1j * phi) * xhat))
    return phi, err


# ---------------------------------------------------------------------------
# Stability constant estimation
# ---------------------------------------------------------------------------

@dataclass
class StabilityEstimate:
    """Heuristic upper-bound ingredients for the recovery stability constant.

    kappa_hat is a random-search (plus local ascent) estimate of
    -max lambda_{n-r}(Z) over unit-Frobenius kernel elements: random search
    lower-bounds the max, so kappa_hat over-estimates the true kappa and
    c_m_bound = (2/sigma_min)(1 + 1/kappa_hat) under-estimates the true
    bound. An estimate, not a certificate.
    """

    sigma_min: float
    kappa_hat: float
    c_m_bound: float
    samples: int


def estimate_stability(op: MeasurementOperator, kernel: KernelBasis, r: int,
                       samples: int = 10_000,
                       seed: int | np.random.Generator | None = 0,
                       ascent_iters: int = 300) -> StabilityEstimate:
    """Estimate sigma_min, kappa, and the stability-constant bound.

    sigma_min comes exactly from the SVD of the coordinate matrix. kappa is
    estimated by sampling unit-Frobenius kernel combinations, taking the
    (n-r)-th largest eigenvalue, and refining the best sample by projected
    gradient ascent on the unit sphere of kernel coefficients. An empty
    kernel gives kappa_hat = inf and bound 2/sigma_min.
    """
    sigma_min = op.sigma_min
    if kernel.dim == 0:
        return StabilityEstimate(sigma_min, math.inf, 2.0 / sigma_min, 0)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = op.n
    idx = n - r - 1  # (n-r)-th largest eigenvalue, 0-indexed descending
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    # Orthonormalize so unit coefficient vectors give unit-Frobenius matrices.
    rows = kernel.coord_rows()
    q, _ = np.linalg.qr(rows.T)
    basis = np.stack([hunvec(q[:, j], n) for j in range(q.shape[1])])
    d = basis.shape[0]

    best_val = -math.inf
    best_c = None
    chunk = max(1, min(samples, 4096))
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        C = rng.normal(size=(size, d))
        C /= np.linalg.norm(C, axis=1, keepdims=True)
        Z = np.tensordot(C, basis, axes=(1, 0))
        vals = np.linalg.eigvalsh(Z)[:, ::-1][:, idx]
        i = int(np.argmax(vals))
        if float(vals[i]) > best_val:
            best_val = float(vals[i])
            best_c = C[i]
        done += size

    # Local ascent on lambda_{n-r}(Z(c)) over the coefficient sphere.
    c = best_c.copy()
    step = 0.1
    val = best_val
    for _ in range(ascent_iters):
        Z = np.tensordot(c, basis, axes=(0, 0))
        w, V = np.linalg.eigh(Z)
        u = V[:, ::-1][:, idx]
        grad = np.real(np.einsum("i,kij,j->k", u.conj(), basis, u))
        grad -= np.dot(grad, c) * c
        gn = float(np.linalg.norm(grad))
        if gn < 1e-14:
            break
        c_new = c + step * grad
        c_new /= np.linalg.norm(c_new)
        Z_new = np.tensordot(c_new, basis, axes=(0, 0))
        val_new = float(np.linalg.eigvalsh(Z_new)[::-1][idx])
        if val_new > val:
            c, val = c_new, val_new
            step *= 1.2
        else:
            step /= 2.0
            if step < 1e-12:
                break
    kappa_hat = -val
    bound = (2.0 / sigma_min) * (1.0 + 1.0 / kappa_hat) if kappa_hat > 0 else math.inf
    return StabilityEstimate(sigma_min, kappa_hat, bound, samples)
