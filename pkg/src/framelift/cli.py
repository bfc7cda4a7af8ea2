"""Command-line interface.

Subcommands: gen, measure, recover, certify, bench (stability | linearity).
Exit codes: 0 success, 1 check/certification failure, 2 input error.
The FRAMELIFT_OUTPUT_DIR environment variable sets the default output
directory for generated files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import frames
from .completeness import certify_structural, discrimination_oracle, \
    kernel_spectral_check
from .measurement import apply, build_operator, kernel_basis_numeric, \
    outcomes_from_csv, outcomes_to_csv
from .recovery import align_phase, recover_noiseless, recover_noisy


class InputError(Exception):
    """Malformed input file or invalid configuration (exit code 2)."""


def _out_dir() -> Path:
    return Path(os.environ.get("FRAMELIFT_OUTPUT_DIR", "."))


def _resolve(path: str | None, default_name: str) -> Path:
    if path is None:
        return _out_dir() / default_name
    p = Path(path)
    return p if p.is_absolute() or p.parent != Path(".") else _out_dir() / p


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _load_ensemble(path: str) -> frames.MeasurementEnsemble:
    try:
        return frames.ensemble_from_dict(_load_json(path))
    except (KeyError, ValueError) as exc:
        raise InputError(f"malformed ensemble file {path}: {exc}") from exc


def _parse_complex_vector(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.ndim == 1:
        return arr.astype(complex)
    raise InputError("signal must be a flat list or a list of [re, im] pairs")


def _parse_hermitian(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise InputError("matrix must be a nested list, entries scalar or [re, im]")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--tol", type=float, default=None, help="solver/check tolerance")
    p.add_argument("--output", "-o", default=None, help="output file or directory")
    p.add_argument("--format", choices=("json", "csv"), default=None,
                   help="output format where both are supported")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="framelift",
                                  description="Deterministic frames for PSD matrix recovery")
    sub = top.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an ensemble JSON")
    g.add_argument("--recipe", choices=("thm1", "thm2", "thm3", "example_n4"),
                   default="thm1")
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--r", type=int, default=1)
    g.add_argument("--nodes", type=str, default=None,
                   help="comma-separated node list")
    g.add_argument("--phi", type=float, default=None,
                   help="custom phase for the rank-one frame")
    g.add_argument("--coeffs", type=str, default=None,
                   help="JSON file with thm3 coefficient blocks {k: {A: [[..]], Aprime: [[..]]}}")
    _add_common(g)

    m = sub.add_parser("measure", help="apply an ensemble to a signal or matrix")
    m.add_argument("--ensemble", required=True)
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--signal", help="JSON file with a complex vector; measures xx*")
    src.add_argument("--matrix", help="JSON file with a Hermitian matrix")
    m.add_argument("--export-coord", default=None,
                   help="also write the m x n^2 coordinate matrix as CSV")
    _add_common(m)

    r = sub.add_parser("recover", help="recover a PSD matrix from outcomes")
    r.add_argument("--ensemble", required=True)
    r.add_argument("--outcomes", required=True, help="outcome CSV (index,value) or JSON array")
    r.add_argument("--noisy", action="store_true",
                   help="least-squares-over-cone solver instead of exact feasibility")
    r.add_argument("--max-iters", type=int, default=None)
    r.add_argument("--strict", action="store_true",
                   help="exit nonzero when the solver did not converge")
    r.add_argument("--reference-signal", default=None,
                   help="JSON complex vector to phase-align the extracted signal against")
    _add_common(r)

    c = sub.add_parser("certify", help="certify completeness of an ensemble")
    c.add_argument("--ensemble", required=True)
    c.add_argument("--spectral-trials", type=int, default=0,
                   help="additionally sample this many kernel combinations")
    c.add_argument("--oracle-trials", type=int, default=0,
                   help="additionally test this many discrimination pairs")
    _add_common(c)

    b = sub.add_parser("bench", help="stability experiments")
    bsub = b.add_subparsers(dest="bench_command", required=True)
    for name in ("stability", "linearity"):
        bp = bsub.add_parser(name)
        bp.add_argument("--config", default=None, help="JSON config file")
        bp.add_argument("--n-values", type=str, default=None,
                        help="comma-separated dimensions")
        bp.add_argument("--trials", type=int, default=None)
        bp.add_argument("--recipe", default=None)
        bp.add_argument("--r", type=int, default=None)
        bp.add_argument("--max-iters", type=int, default=None)
        if name == "stability":
            bp.add_argument("--epsilon", type=float, default=None)
            bp.add_argument("--per-trial", action="store_true",
                            help="also write per-trial rows")
        else:
            bp.add_argument("--epsilons", type=str, default=None,
                            help="comma-separated noise scales (at least two)")
        bp.add_argument("--no-plot", action="store_true",
                        help="skip the PNG figure")
        _add_common(bp)
    return top


def cmd_gen(args: argparse.Namespace) -> int:
    blocks = blocks_imag = None
    if args.coeffs:
        raw = _load_json(args.coeffs)
        try:
            blocks = {int(k): np.asarray(v["A"], dtype=float) for k, v in raw.items()}
            blocks_imag = {int(k): np.asarray(v.get("Aprime", v["A"]), dtype=float)
                           for k, v in raw.items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed coefficient file: {exc}") from exc
    nodes = None
    if args.nodes:
        try:
            nodes = [float(t) for t in args.nodes.split(",")]
        except ValueError as exc:
            raise InputError(f"malformed node list {args.nodes!r}") from exc
    try:
        ens = frames.build_ensemble(args.recipe, args.n, args.r, nodes=nodes,
                                    blocks=blocks, blocks_imag=blocks_imag,
                                    phi=args.phi)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    path = _resolve(args.output, f"ensemble_{args.recipe}_n{ens.n}_r{ens.r}.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(frames.ensemble_to_dict(ens)))
    print(f"wrote {ens.m}-operator {args.recipe} ensemble (n={ens.n}, r={ens.r}) to {path}")
    return 0


def cmd_measure(args: argparse.Namespace) -> int:
    ens = _load_ensemble(args.ensemble)
    op = build_operator(ens)
    if args.signal:
        x = _parse_complex_vector(_load_json(args.signal))
        if x.shape[0] != ens.n:
            raise InputError(f"signal length {x.shape[0]} does not match n={ens.n}")
        X = np.outer(x, x.conj())
    else:
        X = _parse_hermitian(_load_json(args.matrix))
        if X.shape != (ens.n, ens.n):
            raise InputError(f"matrix shape {X.shape} does not match n={ens.n}")
    b = apply(op, X)
    fmt = args.format or "csv"
    path = _resolve(args.output, f"outcomes.{fmt}")
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path.write_text(outcomes_to_csv(b))
    else:
        path.write_text(json.dumps([float(v) for v in b]))
    if args.export_coord:
        coord_path = _resolve(args.export_coord, "coord.csv")
        coord_path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(coord_path, op.coord, delimiter=",")
        print(f"wrote coordinate matrix to {coord_path}")
    print(f"wrote {b.shape[0]} outcomes to {path}")
    return 0


def cmd_recover(args: argparse.Namespace) -> int:
    ens = _load_ensemble(args.ensemble)
    op = build_operator(ens)
    raw = Path(args.outcomes)
    if not raw.exists():
        raise InputError(f"no such file: {args.outcomes}")
    text = raw.read_text()
    try:
        if args.outcomes.endswith(".json"):
            b = np.asarray(json.loads(text), dtype=float)
        else:
            b = outcomes_from_csv(text)
    except ValueError as exc:
        raise InputError(f"malformed outcomes: {exc}") from exc
    if b.shape[0] != op.m:
        raise InputError(f"expected {op.m} outcomes, got {b.shape[0]}")

    kwargs = {}
    if args.tol is not None:
        kwargs["tol"] = args.tol
    if args.max_iters is not None:
        kwargs["max_iters"] = args.max_iters
    res = (recover_noisy if args.noisy else recover_noiseless)(op, b, **kwargs)

    out = {
        "converged": res.converged,
        "residual": res.residual,
        "iterations": res.iterations,
        "lambda1": res.lambda1,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in res.Y],
        "signal": [[float(z.real), float(z.imag)] for z in res.signal],
    }
    if args.reference_signal:
        x = _parse_complex_vector(_load_json(args.reference_signal))
        phi, err = align_phase(x, res.signal)
        out["phase"] = phi
        out["aligned_error"] = err
    path = _resolve(args.output, "recovery.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(out))
    print(f"converged={res.converged} residual={res.residual:.3e} "
          f"iterations={res.iterations} -> {path}")
    if args.strict and not res.converged:
        return 1
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    ens = _load_ensemble(args.ensemble)
    certs = [certify_structural(ens)]
    if args.spectral_trials > 0:
        op = build_operator(ens)
        kernel = kernel_basis_numeric(op)
        tol = args.tol if args.tol is not None else 1e-8
        certs.append(kernel_spectral_check(kernel, ens.r,
                                           trials=args.spectral_trials,
                                           seed=args.seed, tol=tol))
    if args.oracle_trials > 0:
        op = build_operator(ens)
        certs.append(discrimination_oracle(op, ens.r, trials=args.oracle_trials,
                                           seed=args.seed))
    ok = all(c.ok for c in certs)
    for c in certs:
        status = "PASS" if c.ok else "FAIL"
        print(f"[{status}] {c.level} certificate (r={c.r})")
        for item in c.details:
            if not item.get("ok", True):
                print(f"    failed: {item}")
    if args.output:
        path = _resolve(args.output, "certificate.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps([c.to_dict() for c in certs]))
        print(f"wrote certificate to {path}")
    return 0 if ok else 1


def _bench_config(args: argparse.Namespace) -> bench_mod.ExperimentConfig:
    raw: dict = {}
    if args.config:
        raw.update(_load_json(args.config))
    if args.n_values:
        try:
            raw["n_values"] = [int(t) for t in args.n_values.split(",")]
        except ValueError as exc:
            raise InputError(f"malformed n-values {args.n_values!r}") from exc
    if args.trials is not None:
        raw["trials"] = args.trials
    if getattr(args, "epsilon", None) is not None:
        raw["epsilon"] = args.epsilon
    if args.recipe is not None:
        raw["recipe"] = args.recipe
    if args.r is not None:
        raw["r"] = args.r
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.tol is not None:
        raw["solver_tol"] = args.tol
    if args.max_iters is not None:
        raw["solver_max_iters"] = args.max_iters
    try:
        return bench_mod.ExperimentConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid config: {exc}") from exc


def cmd_bench(args: argparse.Namespace) -> int:
    from . import plots

    cfg = _bench_config(args)
    base = _resolve(args.output, f"bench_{args.bench_command}")
    base.parent.mkdir(parents=True, exist_ok=True)
    if base.suffix:
        base = base.with_suffix("")
    if args.bench_command == "stability":
        report = bench_mod.run_stability_experiment(cfg, keep_trials=args.per_trial)
        Path(f"{base}.csv").write_text(report.to_csv())
        Path(f"{base}.dat").write_text(report.to_dat())
        if args.per_trial:
            Path(f"{base}_trials.csv").write_text(report.trials_csv())
        if not args.no_plot:
            plots.save_stability_figure(report, f"{base}.png")
        trend = report.trend()
        print(f"config {report.config_hash} seed {report.seed} "
              f"wall {report.wall_time:.1f}s")
        for row in report.rows:
            print(f"  n={row.n:3d} max_ratio={row.max_ratio:.6g} "
                  f"mean={row.mean_ratio:.6g} sigma_min={row.sigma_min:.3e} "
                  f"kappa_hat={row.kappa_hat:.4f} unconverged={row.unconverged}")
        print(f"trend: increasing_fraction={trend['increasing_fraction']:.2f} "
              f"log10-slope={trend['log_slope']:.3f}")
    else:
        if args.epsilons is None:
            raise InputError("bench linearity requires --epsilons")
        try:
            epsilons = [float(t) for t in args.epsilons.split(",")]
        except ValueError as exc:
            raise InputError(f"malformed epsilon list {args.epsilons!r}") from exc
        try:
            report = bench_mod.run_linearity_sweep(cfg, epsilons)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        Path(f"{base}.csv").write_text(report.to_csv())
        Path(f"{base}.dat").write_text(report.to_dat())
        if not args.no_plot:
            plots.save_linearity_figure(report, f"{base}.png")
        print(f"config {report.config_hash} seed {report.seed} "
              f"wall {report.wall_time:.1f}s")
        for n, factor in sorted(report.agreement().items()):
            print(f"  n={n:3d} max-ratio agreement factor across epsilons: {factor:.3f}")
    print(f"wrote {base}.csv / {base}.dat" + ("" if args.no_plot else f" / {base}.png"))
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "measure":
            return cmd_measure(args)
        if args.command == "recover":
            return cmd_recover(args)
        if args.command == "certify":
            return cmd_certify(args)
        if args.command == "bench":
            return cmd_bench(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


def main() -> None:
    sys.exit(cli_main())
