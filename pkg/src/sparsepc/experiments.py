"""Experiment drivers: phase diagrams, the surface-reaction study, and
external-pool recovery, each with seeded replications and bootstrap moments.

Every replication derives its own RNG stream from (seed, purpose salt, task
indices), so results are independent of execution order and of the thread
count used to run them.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coherence import estimate_mu, theoretical_mu_bound
from .crossval import cross_validate_delta, final_recovery
from .l1_solver import MeasurementSystem, SolverOptions, solve_bpdn
from .model_problems import (
    ExternalSampleSet,
    ReferenceResult,
    manufacture_signal,
    reference_coefficients,
    surface_reaction_qoi,
)
from .poly_basis import BasisSpec, basis_row_matrix
from .sampler import McmcConfig, SampleBatch, Strategy, make_rng, sample, weight_of

# RNG purpose salts; a replication's stream is keyed by (seed, salt, indices...)
_SALT_SAMPLE = 0
_SALT_SIGNAL = 1
_SALT_CROSSVAL = 2
_SALT_POOL = 3
_SALT_BOOTSTRAP = 4


def _child_seed(*path: int) -> int:
    """Collapse an integer path to a single integer seed."""
    ss = np.random.SeedSequence(tuple(int(x) for x in path))
    return int(ss.generate_state(1, np.uint64)[0])


def _run_tasks(fn, tasks, threads: int):
    if threads <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, tasks, chunksize=1))


def bootstrap_std_of_mean(values, resamples: int, rng: np.random.Generator) -> float:
    """Bootstrap estimate of the standard deviation of the sample mean."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size < 2 or resamples < 2:
        return 0.0
    idx = rng.integers(0, vals.size, size=(resamples, vals.size))
    return float(np.std(vals[idx].mean(axis=1), ddof=1))


@dataclass(frozen=True)
class PhaseDiagramConfig:
    """Sweep of recovery success over the (N/P, s/N) plane."""

    spec: BasisSpec
    strategies: tuple[Strategy, ...] = (
        Strategy.STANDARD,
        Strategy.ASYMPTOTIC,
        Strategy.COHERENCE_OPTIMAL,
    )
    n_steps: int = 30
    s_steps: int = 30
    replications: int = 50
    success_threshold: float = 0.01
    seed: int = 0
    mcmc: McmcConfig | None = None
    solver_opts: SolverOptions = SolverOptions(max_matvec=3000)

    def __post_init__(self):
        if self.n_steps < 2 or self.s_steps < 2:
            raise ValueError("grid needs at least 2 steps per axis")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.success_threshold <= 0.0:
            raise ValueError("success_threshold must be > 0")
        object.__setattr__(
            self, "strategies", tuple(Strategy(s) for s in self.strategies)
        )


@dataclass(frozen=True)
class PhaseDiagramResult:
    config: PhaseDiagramConfig
    n_fractions: np.ndarray = field(repr=False)
    s_fractions: np.ndarray = field(repr=False)
    # success[i, j]: N/P = n_fractions[i], s/N = s_fractions[j]; NaN = undefined
    grids: dict = field(repr=False)
    sample_sizes: np.ndarray = field(repr=False)
    sparsities: np.ndarray = field(repr=False)


def _phase_cell(task):
    (spec, strategy, mcmc, opts, threshold, seed, k_strat, i, j, n, s, reps) = task
    successes = 0
    for r in range(reps):
        batch = sample(spec, strategy, n, _child_seed(seed, _SALT_SAMPLE, k_strat, i, j, r), mcmc)
        signal = manufacture_signal(spec, s, make_rng(seed, _SALT_SIGNAL, k_strat, i, j, r))
        psi = basis_row_matrix(spec, batch.points)
        system = MeasurementSystem(
            psi=psi, weights=batch.weights, values=psi @ signal.coefficients
        )
        res = solve_bpdn(system, 0.0, opts)
        rel = np.linalg.norm(res.coefficients - signal.coefficients) / np.linalg.norm(
            signal.coefficients
        )
        successes += rel <= threshold
    return successes / reps


def run_phase_diagram(config: PhaseDiagramConfig, threads: int = 1) -> PhaseDiagramResult:
    """Success probability of exact recovery per (N/P, s/N) cell.

    Per cell and replication: draw a fresh sample batch and a fresh
    manufactured signal, solve with delta = 0, count success when the
    relative coefficient error is at most the threshold.  Cells whose
    implied sparsity falls below 1 (or above P) are NaN, not 0.
    """
    spec = config.spec
    p_total = spec.size
    n_fracs = np.linspace(0.1, 1.0, config.n_steps)
    s_fracs = np.linspace(0.1, 1.0, config.s_steps)
    n_values = np.maximum(np.rint(n_fracs * p_total).astype(int), 1)
    sparsities = np.full((config.n_steps, config.s_steps), -1, dtype=int)
    for i, n in enumerate(n_values):
        for j, frac in enumerate(s_fracs):
            raw = frac * n
            if raw < 1.0:
                continue
            s = int(round(raw))
            if 1 <= s <= p_total:
                sparsities[i, j] = s

    grids = {}
    for k_strat, strategy in enumerate(config.strategies):
        tasks = []
        for i, n in enumerate(n_values):
            for j in range(config.s_steps):
                s = sparsities[i, j]
                if s < 1:
                    continue
                tasks.append(
                    (
                        spec,
                        strategy,
                        config.mcmc,
                        config.solver_opts,
                        config.success_threshold,
                        config.seed,
                        k_strat,
                        i,
                        j,
                        int(n),
                        int(s),
                        config.replications,
                    )
                )
        values = _run_tasks(_phase_cell, tasks, threads)
        grid = np.full((config.n_steps, config.s_steps), np.nan)
        pos = 0
        for i in range(config.n_steps):
            for j in range(config.s_steps):
                if sparsities[i, j] >= 1:
                    grid[i, j] = values[pos]
                    pos += 1
        grids[strategy.value] = grid
    return PhaseDiagramResult(
        config=config,
        n_fractions=n_fracs,
        s_fractions=s_fracs,
        grids=grids,
        sample_sizes=n_values,
        sparsities=sparsities,
    )


def write_phase_csv(path, result: PhaseDiagramResult, strategy) -> None:
    """One diagram as CSV: axis metadata in '#' comments, then the matrix."""
    strategy = Strategy(strategy)
    grid = result.grids[strategy.value]
    with open(path, "w", newline="") as fh:
        fh.write(f"# strategy: {strategy.value}\n")
        fh.write(f"# rows: N/P fractions: {','.join(repr(float(v)) for v in result.n_fractions)}\n")
        fh.write(f"# cols: s/N fractions: {','.join(repr(float(v)) for v in result.s_fractions)}\n")
        fh.write(f"# sample sizes per row: {','.join(str(int(v)) for v in result.sample_sizes)}\n")
        for row in grid:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True)
class BootstrapEntry:
    strategy: str
    n_samples: int
    n_completed: int
    n_failed: int
    error_mean: float
    error_std: float
    error_mean_bootstrap_std: float
    delta_mean: float
    delta_std: float
    delta_mean_bootstrap_std: float
    degenerate: bool


@dataclass(frozen=True)
class BootstrapReport:
    entries: tuple[BootstrapEntry, ...]
    replications: int
    resamples: int
    seed: int

    def entry(self, strategy, n_samples: int) -> BootstrapEntry:
        key = Strategy(strategy).value
        for e in self.entries:
            if e.strategy == key and e.n_samples == n_samples:
                return e
        raise KeyError(f"no entry for ({key}, {n_samples})")


def _stats_entry(strategy, n, errors, deltas, n_failed, resamples, rng) -> BootstrapEntry:
    errors = np.asarray(errors, dtype=np.float64)
    deltas = np.asarray(deltas, dtype=np.float64)
    degenerate = errors.size < 2

    def _std(x):
        return float(np.std(x, ddof=1)) if x.size > 1 else 0.0

    return BootstrapEntry(
        strategy=Strategy(strategy).value,
        n_samples=int(n),
        n_completed=int(errors.size),
        n_failed=int(n_failed),
        error_mean=float(np.mean(errors)) if errors.size else float("nan"),
        error_std=_std(errors),
        error_mean_bootstrap_std=bootstrap_std_of_mean(errors, resamples, rng),
        delta_mean=float(np.mean(deltas)) if deltas.size else float("nan"),
        delta_std=_std(deltas),
        delta_mean_bootstrap_std=bootstrap_std_of_mean(deltas, resamples, rng),
        degenerate=degenerate,
    )


def _surface_rep(task):
    (spec, strategy, mcmc, opts, seed, k_strat, k_n, n, r, ref_coeff) = task
    try:
        batch = sample(spec, strategy, n, _child_seed(seed, _SALT_SAMPLE, k_strat, k_n, r), mcmc)
        u = surface_reaction_qoi(batch.points)
        cv = cross_validate_delta(
            batch, u, opts, seed=_child_seed(seed, _SALT_CROSSVAL, k_strat, k_n, r)
        )
        res = final_recovery(batch, u, cv.delta_star, opts)
        err = np.linalg.norm(res.coefficients - ref_coeff) / np.linalg.norm(ref_coeff)
        return float(err), float(cv.delta_star), None
    except (RuntimeError, ValueError) as exc:
        return None, None, f"{type(exc).__name__}: {exc}"


def run_surface_reaction_study(
    n_list,
    strategies=(Strategy.STANDARD, Strategy.ASYMPTOTIC, Strategy.COHERENCE_OPTIMAL),
    replications: int = 20,
    seed: int = 0,
    spec: BasisSpec | None = None,
    reference: ReferenceResult | None = None,
    mcmc: McmcConfig | None = None,
    solver_opts: SolverOptions | None = None,
    resamples: int = 1000,
    threads: int = 1,
) -> BootstrapReport:
    """Recovery error of the surface-reaction QoI versus sample count.

    Per (strategy, N) replication: sample, integrate the ODE at the sample
    points, cross-validate the tolerance, recover, and score the relative
    l2 coefficient error against the quadrature reference.  Failed
    replications are recorded, not fatal.
    """
    spec = spec or BasisSpec(family="hermite", dimension=2, degree=32)
    strategies = tuple(Strategy(s) for s in strategies)
    opts = solver_opts or SolverOptions()
    if reference is None:
        reference = reference_coefficients(spec)
    # a ladder that stalls above its tolerance still yields the best
    # available reference; callers can inspect reference.converged
    ref_coeff = reference.coefficients

    tasks = []
    for k_strat, strategy in enumerate(strategies):
        for k_n, n in enumerate(n_list):
            for r in range(replications):
                tasks.append(
                    (spec, strategy, mcmc, opts, seed, k_strat, k_n, int(n), r, ref_coeff)
                )
    results = _run_tasks(_surface_rep, tasks, threads)

    entries = []
    pos = 0
    for k_strat, strategy in enumerate(strategies):
        for k_n, n in enumerate(n_list):
            errors, deltas, failures = [], [], []
            for _ in range(replications):
                err, dstar, failure = results[pos]
                pos += 1
                if failure is None:
                    errors.append(err)
                    deltas.append(dstar)
                else:
                    failures.append(failure)
            rng = make_rng(seed, _SALT_BOOTSTRAP, k_strat, k_n)
            entries.append(
                _stats_entry(strategy, n, errors, deltas, len(failures), resamples, rng)
            )
    return BootstrapReport(
        entries=tuple(entries), replications=replications, resamples=resamples, seed=seed
    )


def _external_rep(task):
    (spec, strategy, opts, seed, k_n, n, r, points, values) = task
    try:
        rng = make_rng(seed, _SALT_POOL, k_n, r)
        idx = rng.choice(points.shape[0], size=n, replace=False)
        mask = np.zeros(points.shape[0], dtype=bool)
        mask[idx] = True
        batch = SampleBatch(
            spec=spec,
            strategy=strategy,
            points=points[idx],
            weights=weight_of(strategy, spec, points[idx]),
            seed=_child_seed(seed, _SALT_POOL, k_n, r),
        )
        u = values[idx]
        cv = cross_validate_delta(
            batch, u, opts, seed=_child_seed(seed, _SALT_CROSSVAL, k_n, r)
        )
        res = final_recovery(batch, u, cv.delta_star, opts)
        held_pts, held_u = points[~mask], values[~mask]
        if held_pts.shape[0] == 0:
            raise RuntimeError("no held-out rows to validate against")
        pred = basis_row_matrix(spec, held_pts) @ res.coefficients
        err = np.linalg.norm(pred - held_u) / np.linalg.norm(held_u)
        return float(err), float(cv.delta_star), None
    except (RuntimeError, ValueError) as exc:
        return None, None, f"{type(exc).__name__}: {exc}"


def run_external_recovery(
    pool: ExternalSampleSet,
    spec: BasisSpec,
    strategy: Strategy | str | None = None,
    n_list=(100,),
    replications: int = 20,
    seed: int = 0,
    solver_opts: SolverOptions | None = None,
    resamples: int = 1000,
    threads: int = 1,
) -> BootstrapReport:
    """Subsample an external (xi, u) pool, recover, and score on held-out rows.

    The error per replication is the relative l2 misfit of the recovered
    expansion on the pool rows not used for training.
    """
    opts = solver_opts or SolverOptions()
    strategy = Strategy(strategy) if strategy is not None else pool.strategy
    if strategy is None:
        raise ValueError("no sampling strategy declared for the external pool")
    if pool.family is not None and pool.family != spec.family:
        raise ValueError(
            f"pool declares family {pool.family!r} but spec is {spec.family!r}"
        )
    if pool.dimension != spec.dimension:
        raise ValueError(
            f"pool dimension {pool.dimension} does not match spec dimension {spec.dimension}"
        )
    n_max = max(int(n) for n in n_list)
    if n_max > len(pool):
        raise ValueError(f"pool has {len(pool)} rows, need at least {n_max}")

    tasks = []
    for k_n, n in enumerate(n_list):
        for r in range(replications):
            tasks.append(
                (spec, strategy, opts, seed, k_n, int(n), r, pool.points, pool.values)
            )
    results = _run_tasks(_external_rep, tasks, threads)

    entries = []
    pos = 0
    for k_n, n in enumerate(n_list):
        errors, deltas, failures = [], [], []
        for _ in range(replications):
            err, dstar, failure = results[pos]
            pos += 1
            if failure is None:
                errors.append(err)
                deltas.append(dstar)
            else:
                failures.append(failure)
        rng = make_rng(seed, _SALT_BOOTSTRAP, 0, k_n)
        entries.append(
            _stats_entry(strategy, n, errors, deltas, len(failures), resamples, rng)
        )
    return BootstrapReport(
        entries=tuple(entries), replications=replications, resamples=resamples, seed=seed
    )


def write_bootstrap_csv(path, report: BootstrapReport) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(
            "strategy,n_samples,n_completed,n_failed,error_mean,error_std,"
            "error_mean_bootstrap_std,delta_mean,delta_std,delta_mean_bootstrap_std,degenerate\n"
        )
        for e in report.entries:
            fh.write(
                f"{e.strategy},{e.n_samples},{e.n_completed},{e.n_failed},"
                f"{e.error_mean!r},{e.error_std!r},{e.error_mean_bootstrap_std!r},"
                f"{e.delta_mean!r},{e.delta_std!r},{e.delta_mean_bootstrap_std!r},"
                f"{int(e.degenerate)}\n"
            )


@dataclass(frozen=True)
class CoherenceTableRow:
    strategy: str
    family: str
    dimension: int
    degree: int
    mu_estimate: float
    mu_bound: float | None
    bound_asymptotic_only: bool | None
    n_draws: int


def run_coherence_table(
    spec_grid,
    strategies=(Strategy.STANDARD, Strategy.ASYMPTOTIC, Strategy.COHERENCE_OPTIMAL),
    n_draws: int = 100_000,
    seed: int = 0,
    mcmc: McmcConfig | None = None,
) -> tuple[CoherenceTableRow, ...]:
    """Empirical coherence and the matching theoretical bound per (spec, strategy)."""
    rows = []
    for k, spec in enumerate(spec_grid):
        for m, strategy in enumerate(tuple(Strategy(s) for s in strategies)):
            est = estimate_mu(
                spec, strategy, n_draws, _child_seed(seed, _SALT_SAMPLE, k, m), mcmc
            )
            bound = theoretical_mu_bound(spec, strategy)
            rows.append(
                CoherenceTableRow(
                    strategy=strategy.value,
                    family=spec.family,
                    dimension=spec.dimension,
                    degree=spec.degree,
                    mu_estimate=est.mu_hat,
                    mu_bound=bound.value,
                    bound_asymptotic_only=None if bound.value is None else bound.asymptotic_only,
                    n_draws=n_draws,
                )
            )
    return tuple(rows)


def write_coherence_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("strategy,family,dimension,degree,mu_estimate,mu_bound,bound_asymptotic_only,n_draws\n")
        for r in rows:
            bound = "" if r.mu_bound is None else repr(float(r.mu_bound))
            asym = "" if r.bound_asymptotic_only is None else int(r.bound_asymptotic_only)
            fh.write(
                f"{r.strategy},{r.family},{r.dimension},{r.degree},"
                f"{r.mu_estimate!r},{bound},{asym},{r.n_draws}\n"
            )
