"""Command-line interface.

Each subcommand reads a JSON config file and writes CSV artifacts plus a
``manifest.json`` into ``--out-dir``.  The manifest embeds the config hash
and seed and contains no timestamps, so re-running a command with the same
inputs reproduces every output byte for byte.  Exit code is 0 only if all
replications completed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .crossval import cross_validate_delta, write_crossval_csv
from .experiments import (
    PhaseDiagramConfig,
    run_coherence_table,
    run_external_recovery,
    run_phase_diagram,
    run_surface_reaction_study,
    write_bootstrap_csv,
    write_coherence_csv,
    write_phase_csv,
)
from .l1_solver import SolverOptions
from .model_problems import (
    load_external_samples,
    manufacture_signal,
    reference_coefficients,
    surface_reaction_qoi,
    write_coefficients_csv,
)
from .poly_basis import BasisSpec
from .sampler import McmcConfig, SampleBatch, Strategy, export_batch, sample, weight_of


def _read_config(path) -> tuple[dict, str]:
    with open(path, "rb") as fh:
        raw = fh.read()
    return json.loads(raw.decode("utf-8")), hashlib.sha256(raw).hexdigest()


def _spec_from(obj: dict) -> BasisSpec:
    return BasisSpec(
        family=obj["family"], dimension=int(obj["dimension"]), degree=int(obj["degree"])
    )


def _mcmc_from(obj: dict | None) -> McmcConfig | None:
    if obj is None:
        return None
    kwargs = {}
    for key in ("burn_in", "thinning", "chunk"):
        if key in obj:
            kwargs[key] = int(obj[key])
    if "proposal" in obj:
        kwargs["proposal"] = obj["proposal"]
    return McmcConfig(**kwargs)


def _solver_from(obj: dict | None) -> SolverOptions | None:
    if obj is None:
        return None
    kwargs = {}
    for key in ("opt_tol", "bp_rel_tol", "step_min", "step_max"):
        if key in obj:
            kwargs[key] = float(obj[key])
    for key in ("max_matvec", "history"):
        if key in obj:
            kwargs[key] = int(obj[key])
    return SolverOptions(**kwargs)


def _write_manifest(out_dir, command, config_hash, seed, threads, outputs, summary):
    manifest = {
        "command": command,
        "config_sha256": config_hash,
        "seed": seed,
        "threads": threads,
        "version": __version__,
        "outputs": sorted(outputs),
        "summary": summary,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_coherence(cfg, args, config_hash) -> int:
    specs = [_spec_from(s) for s in cfg["specs"]]
    strategies = tuple(cfg.get("strategies", [s.value for s in Strategy]))
    rows = run_coherence_table(
        specs,
        strategies=strategies,
        n_draws=int(cfg.get("n_draws", 100_000)),
        seed=args.seed,
        mcmc=_mcmc_from(cfg.get("mcmc")),
    )
    out = os.path.join(args.out_dir, "coherence.csv")
    write_coherence_csv(out, rows)
    _write_manifest(
        args.out_dir, "coherence", config_hash, args.seed, args.threads,
        ["coherence.csv"], {"rows": len(rows)},
    )
    return 0


def _cmd_phase_diagram(cfg, args, config_hash) -> int:
    config = PhaseDiagramConfig(
        spec=_spec_from(cfg["spec"]),
        strategies=tuple(cfg.get("strategies", [s.value for s in Strategy])),
        n_steps=int(cfg.get("n_steps", 30)),
        s_steps=int(cfg.get("s_steps", 30)),
        replications=int(cfg.get("replications", 50)),
        success_threshold=float(cfg.get("success_threshold", 0.01)),
        seed=args.seed,
        mcmc=_mcmc_from(cfg.get("mcmc")),
        solver_opts=_solver_from(cfg.get("solver")) or SolverOptions(max_matvec=3000),
    )
    result = run_phase_diagram(config, threads=args.threads)
    outputs = []
    for strategy in config.strategies:
        name = f"phase_{strategy.value}.csv"
        write_phase_csv(os.path.join(args.out_dir, name), result, strategy)
        outputs.append(name)
    _write_manifest(
        args.out_dir, "phase-diagram", config_hash, args.seed, args.threads,
        outputs,
        {
            "basis_size": config.spec.size,
            "cells": int(np.sum(result.sparsities >= 1)),
            "replications": config.replications,
        },
    )
    return 0


def _cmd_surface_reaction(cfg, args, config_hash) -> int:
    spec = (
        _spec_from(cfg["spec"])
        if "spec" in cfg
        else BasisSpec(family="hermite", dimension=2, degree=32)
    )
    levels = tuple(int(v) for v in cfg.get("quadrature_levels", (40, 48, 56, 64)))
    reference = reference_coefficients(spec, levels=levels)
    report = run_surface_reaction_study(
        n_list=[int(n) for n in cfg["n_list"]],
        strategies=tuple(cfg.get("strategies", [s.value for s in Strategy])),
        replications=int(cfg.get("replications", 20)),
        seed=args.seed,
        spec=spec,
        reference=reference,
        mcmc=_mcmc_from(cfg.get("mcmc")),
        solver_opts=_solver_from(cfg.get("solver")),
        resamples=int(cfg.get("resamples", 1000)),
        threads=args.threads,
    )
    outputs = ["surface_reaction.csv", "reference_coefficients.csv"]
    write_bootstrap_csv(os.path.join(args.out_dir, outputs[0]), report)
    write_coefficients_csv(
        os.path.join(args.out_dir, outputs[1]), spec, reference.coefficients
    )
    failures = sum(e.n_failed for e in report.entries)
    _write_manifest(
        args.out_dir, "surface-reaction", config_hash, args.seed, args.threads,
        outputs,
        {
            "failures": failures,
            "reference_converged": reference.converged,
            "reference_n_1d": reference.n_1d,
        },
    )
    return 0 if failures == 0 else 1


def _cmd_recover_external(cfg, args, config_hash) -> int:
    spec = _spec_from(cfg["spec"])
    pool = load_external_samples(
        cfg["sample_file"], family=cfg.get("family"), strategy=cfg.get("strategy")
    )
    report = run_external_recovery(
        pool,
        spec,
        strategy=cfg.get("strategy"),
        n_list=[int(n) for n in cfg["n_list"]],
        replications=int(cfg.get("replications", 20)),
        seed=args.seed,
        solver_opts=_solver_from(cfg.get("solver")),
        resamples=int(cfg.get("resamples", 1000)),
        threads=args.threads,
    )
    out = "external_recovery.csv"
    write_bootstrap_csv(os.path.join(args.out_dir, out), report)
    failures = sum(e.n_failed for e in report.entries)
    _write_manifest(
        args.out_dir, "recover-external", config_hash, args.seed, args.threads,
        [out], {"failures": failures, "pool_rows": len(pool)},
    )
    return 0 if failures == 0 else 1


def _cmd_crossval_curve(cfg, args, config_hash) -> int:
    spec = _spec_from(cfg["spec"])
    strategy = Strategy(cfg.get("strategy", "standard"))
    if "sample_file" in cfg:
        pool = load_external_samples(cfg["sample_file"])
        if pool.dimension != spec.dimension:
            raise ValueError("sample file dimension does not match spec")
        batch = SampleBatch(
            spec=spec,
            strategy=strategy,
            points=pool.points,
            weights=weight_of(strategy, spec, pool.points),
            seed=args.seed,
        )
        values = pool.values
    else:
        n = int(cfg["n"])
        batch = sample(spec, strategy, n, args.seed, _mcmc_from(cfg.get("mcmc")))
        qoi = cfg.get("qoi", "surface-reaction")
        if qoi == "surface-reaction":
            values = surface_reaction_qoi(batch.points)
        elif qoi == "manufactured":
            signal = manufacture_signal(
                spec, int(cfg["sparsity"]), int(cfg.get("signal_seed", args.seed + 1))
            )
            values = signal.evaluate(batch.points)
        else:
            raise ValueError(f"unknown qoi {qoi!r}")
    result = cross_validate_delta(
        batch, values, _solver_from(cfg.get("solver")), seed=args.seed
    )
    out = "crossval_curve.csv"
    write_crossval_csv(os.path.join(args.out_dir, out), result)
    _write_manifest(
        args.out_dir, "crossval-curve", config_hash, args.seed, args.threads,
        [out],
        {"chosen_delta0": result.chosen_delta0, "delta_star": result.delta_star},
    )
    return 0


def _cmd_sample_export(cfg, args, config_hash) -> int:
    spec = _spec_from(cfg["spec"])
    strategy = Strategy(cfg.get("strategy", "standard"))
    batch = sample(spec, strategy, int(cfg["n"]), args.seed, _mcmc_from(cfg.get("mcmc")))
    out = "samples.csv"
    export_batch(batch, os.path.join(args.out_dir, out))
    summary = {"n": int(cfg["n"]), "strategy": strategy.value}
    if batch.acceptance_rate is not None:
        summary["acceptance_rate"] = batch.acceptance_rate
        summary["chain_steps"] = batch.chain_steps
    _write_manifest(
        args.out_dir, "sample-export", config_hash, args.seed, args.threads,
        [out], summary,
    )
    return 0


_COMMANDS = {
    "coherence": _cmd_coherence,
    "phase-diagram": _cmd_phase_diagram,
    "surface-reaction": _cmd_surface_reaction,
    "recover-external": _cmd_recover_external,
    "crossval-curve": _cmd_crossval_curve,
    "sample-export": _cmd_sample_export,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsepc",
        description="Sparse polynomial chaos recovery experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="path to a JSON config file")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--out-dir", default=".", help="directory for output artifacts")
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg, config_hash = _read_config(args.config)
    if args.seed is None:
        args.seed = int(cfg.get("seed", 0))
    os.makedirs(args.out_dir, exist_ok=True)
    return _COMMANDS[args.command](cfg, args, config_hash)


if __name__ == "__main__":
    sys.exit(main())
