"""Two-fold cross-validation for the BPDN tolerance.

The samples are split once into two equal halves by a seeded random
permutation.  For every tolerance on a fixed 121-point logarithmic grid the
solver is trained on one half and scored by the validation residual
``||W_val (Psi_val c - u_val)||_2`` on the other half, then the folds swap
roles.  The tolerance minimizing the summed residuals is scaled by sqrt(2)
to account for the held-out half of the data.  The residual is taken in the
weighted norm of the regression system itself: with ball-restricted
sampling the raw basis values grow like exp(r^2/4) at held-out points, and
an unweighted score would force the selected tolerance toward the trivial
zero solution.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .l1_solver import MeasurementSystem, RecoveryResult, SolverOptions, assemble_system, solve_bpdn
from .poly_basis import basis_row_matrix
from .sampler import SampleBatch, make_rng


def delta_grid() -> np.ndarray:
    """The 121 tolerances 10^x, x = -5, -4.95, ..., 0.95, 1, in ascending order.

    Ascending storage makes ``argmin`` ties resolve toward the smaller
    (tighter) tolerance.  Built with scalar pow so the endpoints are the
    literals 1e-05 and 10.0 (the vectorized pow differs by one ulp on a
    few entries).
    """
    return np.array([10.0 ** (i / 20.0) for i in range(-100, 21)])


@dataclass(frozen=True)
class CrossValResult:
    delta_star: float
    chosen_delta0: float
    delta_grid: np.ndarray = field(repr=False)
    fold_errors: tuple[np.ndarray, np.ndarray] = field(repr=False)

    @property
    def error_sum(self) -> np.ndarray:
        return self.fold_errors[0] + self.fold_errors[1]


def _fold_curve(
    train: MeasurementSystem,
    psi_val: np.ndarray,
    u_val: np.ndarray,
    grid: np.ndarray,
    opts: SolverOptions,
) -> np.ndarray:
    """Validation residuals over the grid; walks the grid from the largest
    tolerance down so each solve warm-starts from the previous (sparser)
    solution.  A solution whose residual is already <= the next smaller
    tolerance stays optimal there (smaller feasible set, identical objective
    attained), so the tail below the training-fold noise floor is free."""
    errors = np.empty(grid.size)
    warm = None
    res = None
    for j in range(grid.size - 1, -1, -1):
        if res is None or res.residual_norm > grid[j]:
            res = solve_bpdn(train, float(grid[j]), opts, x0=warm)
            warm = res.coefficients
        errors[j] = np.linalg.norm(psi_val @ res.coefficients - u_val)
    return errors


def cross_validate_delta(
    batch: SampleBatch,
    qoi_values,
    solver_opts: SolverOptions | None = None,
    seed: int = 0,
) -> CrossValResult:
    """Select the BPDN tolerance by two-fold hold-out cross-validation."""
    opts = solver_opts or SolverOptions()
    u = np.asarray(qoi_values, dtype=np.float64)
    n = batch.points.shape[0]
    if u.shape != (n,):
        raise ValueError("qoi_values must be a vector with one entry per sample")
    if n < 4:
        raise ValueError(f"need at least 4 samples, got {n}")
    if n % 2 != 0:
        raise ValueError(f"sample count must be even for two equal folds, got {n}")

    psi = basis_row_matrix(batch.spec, batch.points)
    perm = make_rng(seed, 1).permutation(n)
    half = n // 2
    folds = (perm[:half], perm[half:])
    grid = delta_grid()

    errors = []
    for train_idx, val_idx in (folds, folds[::-1]):
        train = MeasurementSystem(
            psi=psi[train_idx], weights=batch.weights[train_idx], values=u[train_idx]
        )
        # validate in the same weighted norm the training solve uses; with
        # ball-restricted sampling the unweighted basis values grow like
        # exp(r^2/4) at the validation points and would drown the curve
        w_val = batch.weights[val_idx]
        errors.append(
            _fold_curve(train, w_val[:, None] * psi[val_idx], w_val * u[val_idx], grid, opts)
        )
    e1, e2 = errors
    j = int(np.argmin(e1 + e2))
    delta0 = float(grid[j])
    return CrossValResult(
        delta_star=math.sqrt(2.0) * delta0,
        chosen_delta0=delta0,
        delta_grid=grid,
        fold_errors=(e1, e2),
    )


def final_recovery(
    batch: SampleBatch,
    qoi_values,
    delta_star: float,
    solver_opts: SolverOptions | None = None,
) -> RecoveryResult:
    """Solve the weighted BPDN problem on all samples at the chosen tolerance."""
    return solve_bpdn(assemble_system(batch, qoi_values), delta_star, solver_opts)


def write_crossval_csv(path, result: CrossValResult) -> None:
    """Write the (delta, fold-1 error, fold-2 error) curve."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta", "eps_fold1", "eps_fold2"])
        for d, a, b in zip(result.delta_grid, *result.fold_errors):
            writer.writerow([repr(float(d)), repr(float(a)), repr(float(b))])
