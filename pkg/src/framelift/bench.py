"""Seeded, reproducible stability experiments over ensemble families.

The stability experiment follows the noisy-recovery protocol: per dimension
n, draw a Haar-uniform unit signal x and an error term f uniform in the
epsilon-ball of R^m, measure b = M(xx*) + f, solve the noisy program, and
record ||Y - xx*||_2 / epsilon. The report aggregates the max and mean ratio
per n together with sigma_min and the kappa estimate of the instance.

Every random draw is keyed by (seed, n, trial) through numpy SeedSequence
spawn keys, so reports are bit-for-bit reproducible for a fixed config and
independent of execution order. Wall time is kept out of the serialized
rows for the same reason.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .frames import build_ensemble
from .hermitian import hvec
from .measurement import build_operator, kernel_basis_numeric
from .recovery import estimate_stability, recover_noisy


@dataclass
class ExperimentConfig:
    """Stability-experiment parameters; validated on construction."""

    n_values: list[int] = field(default_factory=lambda: list(range(3, 31, 3)))
    trials: int = 100
    epsilon: float = 1e-3
    seed: int = 0
    recipe: str = "thm1"
    r: int = 1
    solver_tol: float = 1e-8
    solver_max_iters: int = 4000
    kappa_samples: int = 2000
    zero_noise: bool = False  # diagnostic: forces f = 0 (noiseless limit)

    def __post_init__(self) -> None:
        self.n_values = [int(n) for n in self.n_values]
        if not self.n_values or any(n < 3 for n in self.n_values):
            raise ValueError("n_values must be nonempty with every n >= 3")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class TrialRecord:
    n: int
    trial: int
    ratio: float
    residual: float
    iterations: int
    converged: bool


@dataclass
class StabilityRow:
    n: int
    trials: int
    max_ratio: float
    mean_ratio: float
    sigma_min: float
    kappa_hat: float
    unconverged: int


@dataclass
class StabilityReport:
    rows: list[StabilityRow]
    seed: int
    config_hash: str
    wall_time: float
    trial_records: list[TrialRecord] = field(default_factory=list)

    def trend(self) -> dict:
        """Monotone-trend summary of max_ratio against n."""
        ratios = [row.max_ratio for row in self.rows]
        if len(ratios) < 2:
            return {"increasing_fraction": 1.0, "log_slope": 0.0}
        steps = [ratios[i + 1] >= ratios[i] for i in range(len(ratios) - 1)]
        ns = np.array([row.n for row in self.rows], dtype=float)
        logs = np.log10(np.maximum(ratios, 1e-300))
        slope = float(np.polyfit(ns, logs, 1)[0])
        return {"increasing_fraction": sum(steps) / len(steps), "log_slope": slope}

    def to_csv(self) -> str:
        lines = ["n,trials,max_ratio,mean_ratio,sigma_min,kappa_hat,unconverged"]
        for row in self.rows:
            lines.append(
                f"{row.n},{row.trials},{row.max_ratio!r},{row.mean_ratio!r},"
                f"{row.sigma_min!r},{row.kappa_hat!r},{row.unconverged}")
        return "\n".join(lines) + "\n"

    def to_dat(self) -> str:
        """Two-column (n, max_ratio) data, gnuplot-ready."""
        return "".join(f"{row.n} {row.max_ratio!r}\n" for row in self.rows)

    def trials_csv(self) -> str:
        lines = ["n,trial,ratio,residual,iterations,converged"]
        for t in self.trial_records:
            lines.append(f"{t.n},{t.trial},{t.ratio!r},{t.residual!r},"
                         f"{t.iterations},{int(t.converged)}")
        return "\n".join(lines) + "\n"


def trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    """Counter-style per-trial stream: execution order cannot change results."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n, trial)))


def draw_unit_signal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-uniform unit vector: normalized standard complex Gaussian."""
    z = rng.normal(size=2 * n)
    x = z[:n] + 1j * z[n:]
    return x / np.linalg.norm(x)


def draw_ball_noise(rng: np.random.Generator, m: int, epsilon: float) -> np.ndarray:
    """Uniform draw from the closed epsilon-ball of R^m.

    Gaussian direction scaled by epsilon * U^(1/m): the norm bound in the
    protocol is "at most epsilon", not "exactly epsilon".
    """
    direction = rng.normal(size=m)
    direction /= np.linalg.norm(direction)
    radius = epsilon * rng.uniform() ** (1.0 / m)
    return radius * direction


def _operator_for(cfg: ExperimentConfig, n: int):
    ens = build_ensemble(cfg.recipe, n, cfg.r)
    return build_operator(ens)


def run_stability_experiment(cfg: ExperimentConfig,
                             keep_trials: bool = False) -> StabilityReport:
    """Run the noisy-recovery stability experiment over cfg.n_values.

    Solver non-convergence is counted per row, not fatal. Deterministic for
    a fixed config.
    """
    t0 = time.perf_counter()
    rows: list[StabilityRow] = []
    records: list[TrialRecord] = []
    for n in cfg.n_values:
        op = _operator_for(cfg, n)
        kernel = kernel_basis_numeric(op)
        est = estimate_stability(
            op, kernel, cfg.r, samples=max(1, cfg.kappa_samples),
            seed=trial_rng(cfg.seed, n, cfg.trials), ascent_iters=100)
        ratios = np.empty(cfg.trials)
        unconverged = 0
        for trial in range(cfg.trials):
            rng = trial_rng(cfg.seed, n, trial)
            x = draw_unit_signal(rng, n)
            target = hvec(np.outer(x, x.conj()))
            f = draw_ball_noise(rng, op.m, cfg.epsilon)
            if cfg.zero_noise:
                f = np.zeros_like(f)
            b = op.coord @ target + f
            res = recover_noisy(op, b, tol=cfg.solver_tol,
                                max_iters=cfg.solver_max_iters)
            ratio = float(np.linalg.norm(hvec(res.Y) - target)) / cfg.epsilon
            ratios[trial] = ratio
            unconverged += 0 if res.converged else 1
            if keep_trials:
                records.append(TrialRecord(n, trial, ratio, res.residual,
                                           res.iterations, res.converged))
        rows.append(StabilityRow(n, cfg.trials, float(ratios.max()),
                                 float(ratios.mean()), op.sigma_min,
                                 est.kappa_hat, unconverged))
    return StabilityReport(rows, cfg.seed, cfg.config_hash(),
                           time.perf_counter() - t0, records)


@dataclass
class LinearityRow:
    n: int
    epsilon: float
    max_ratio: float
    mean_ratio: float
    unconverged: int


@dataclass
class LinearityReport:
    rows: list[LinearityRow]
    seed: int
    config_hash: str
    wall_time: float

    def agreement(self) -> dict[int, float]:
        """Per n: largest pairwise ratio between per-epsilon max ratios."""
        by_n: dict[int, list[float]] = {}
        for row in self.rows:
            by_n.setdefault(row.n, []).append(row.max_ratio)
        return {n: (max(v) / min(v) if min(v) > 0 else math.inf)
                for n, v in by_n.items()}

    def to_csv(self) -> str:
        lines = ["n,epsilon,max_ratio,mean_ratio,unconverged"]
        for row in self.rows:
            lines.append(f"{row.n},{row.epsilon!r},{row.max_ratio!r},"
                         f"{row.mean_ratio!r},{row.unconverged}")
        return "\n".join(lines) + "\n"

    def to_dat(self) -> str:
        return "".join(f"{row.epsilon!r} {row.max_ratio!r}\n" for row in self.rows)


def run_linearity_sweep(cfg: ExperimentConfig,
                        epsilons: list[float]) -> LinearityReport:
    """Fixed instances, rescaled noise: max error ratio per epsilon.

    Per trial the signal, noise direction, and radius fraction are drawn
    once and reused across epsilons, so ratio agreement across epsilons
    isolates the linearity of the error in the noise scale.
    """
    if len(epsilons) < 2:
        raise ValueError("need at least two epsilon values")
    if any(not e > 0 for e in epsilons):
        raise ValueError("epsilon values must be positive")
    t0 = time.perf_counter()
    rows: list[LinearityRow] = []
    for n in cfg.n_values:
        op = _operator_for(cfg, n)
        draws = []
        for trial in range(cfg.trials):
            rng = trial_rng(cfg.seed, n, trial)
            x = draw_unit_signal(rng, n)
            direction = rng.normal(size=op.m)
            direction /= np.linalg.norm(direction)
            fraction = rng.uniform() ** (1.0 / op.m)
            draws.append((hvec(np.outer(x, x.conj())), direction, fraction))
        for eps in epsilons:
            ratios = np.empty(cfg.trials)
            unconverged = 0
            for trial, (target, direction, fraction) in enumerate(draws):
                b = op.coord @ target + eps * fraction * direction
                res = recover_noisy(op, b, tol=cfg.solver_tol,
                                    max_iters=cfg.solver_max_iters)
                ratios[trial] = float(np.linalg.norm(hvec(res.Y) - target)) / eps
                unconverged += 0 if res.converged else 1
            rows.append(LinearityRow(n, float(eps), float(ratios.max()),
                                     float(ratios.mean()), unconverged))
    return LinearityReport(rows, cfg.seed, cfg.config_hash(),
                           time.perf_counter() - t0)
