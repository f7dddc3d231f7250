"""Quantities of interest used by the experiments.

Three sources of data:

* manufactured expansions with a random sparse coefficient vector, for
  phase-diagram studies where the truth is known exactly;
* a two-parameter surface-reaction ODE whose steady coverage at ``t = 4``
  is the QoI, with a tensor Gauss-Hermite reference projection;
* externally computed ``(xi, u)`` sample files loaded from CSV, standing in
  for solver pipelines that live outside this package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .poly_basis import BasisSpec, basis_row_matrix, gauss_rule
from .sampler import Strategy, make_rng


@dataclass(frozen=True)
class ManufacturedSignal:
    """Sparse coefficient vector with known support.

    ``coefficients`` is dense of length P with exactly ``len(support)``
    non-zeros; support indices are drawn uniformly without replacement and
    the non-zero values are i.i.d. standard normal.
    """

    spec: BasisSpec
    coefficients: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)
    seed: int | None = None

    @property
    def sparsity(self) -> int:
        return int(self.support.size)

    def evaluate(self, points) -> np.ndarray:
        """u(xi) = sum_k c_k psi_k(xi), exact (no noise)."""
        return basis_row_matrix(self.spec, points) @ self.coefficients


def manufacture_signal(
    spec: BasisSpec, sparsity: int, seed: int | np.random.Generator
) -> ManufacturedSignal:
    """Draw a random ``sparsity``-sparse signal in the given basis."""
    p_total = spec.size
    if not 1 <= sparsity <= p_total:
        raise ValueError(f"sparsity must be in [1, {p_total}], got {sparsity}")
    if isinstance(seed, np.random.Generator):
        rng, seed_out = seed, None
    else:
        rng, seed_out = make_rng(int(seed)), int(seed)
    support = np.sort(rng.choice(p_total, size=sparsity, replace=False))
    coefficients = np.zeros(p_total)
    coefficients[support] = rng.standard_normal(sparsity)
    return ManufacturedSignal(
        spec=spec, coefficients=coefficients, support=support, seed=seed_out
    )


@dataclass(frozen=True)
class SurfaceReactionConfig:
    """Parameters of the coverage ODE d(rho)/dt = alpha(1-rho) - gamma rho - kappa (1-rho)^2 rho."""

    kappa: float = 10.0
    rho0: float = 0.9
    t_final: float = 4.0
    rtol: float = 1e-10
    atol: float = 1e-12


def surface_reaction_rhs(rho, alpha, gamma, kappa):
    """Right-hand side of the coverage equation (elementwise)."""
    return alpha * (1.0 - rho) - gamma * rho - kappa * (1.0 - rho) ** 2 * rho


def surface_reaction_qoi(xi, config: SurfaceReactionConfig | None = None):
    """Coverage rho(t_final) for adsorption/desorption rates driven by xi.

    The two inputs set ``alpha = 0.1 + exp(0.05 xi_1)`` and
    ``gamma = 0.001 + 0.01 exp(0.05 xi_2)``.  Accepts a single point of
    shape (2,) or a batch of shape (n, 2); the batch is integrated as one
    vector ODE system (component-wise error control), which is much faster
    than a Python loop over points.
    """
    cfg = config or SurfaceReactionConfig()
    pts = np.asarray(xi, dtype=np.float64)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("xi must have shape (2,) or (n, 2)")
    if not np.all(np.isfinite(pts)):
        raise ValueError("xi must be finite")
    alpha = 0.1 + np.exp(0.05 * pts[:, 0])
    gamma = 0.001 + 0.01 * np.exp(0.05 * pts[:, 1])
    n = pts.shape[0]
    if cfg.t_final == 0.0:
        out = np.full(n, cfg.rho0)
        return float(out[0]) if single else out
    sol = solve_ivp(
        lambda _t, rho: surface_reaction_rhs(rho, alpha, gamma, cfg.kappa),
        (0.0, cfg.t_final),
        np.full(n, cfg.rho0),
        method="RK45",
        rtol=cfg.rtol,
        atol=cfg.atol,
        t_eval=(cfg.t_final,),
    )
    if not sol.success:
        raise RuntimeError(f"surface-reaction integration failed: {sol.message}")
    out = sol.y[:, -1]
    return float(out[0]) if single else out


def reference_coefficients_quadrature(spec: BasisSpec, qoi, n_1d: int) -> np.ndarray:
    """Project a QoI onto the basis with a tensor Gauss rule, n_1d nodes per dim.

    Returns c with c_k = sum_i (prod_j w_{i_j}) psi_k(x_i) qoi(x_i).  Exact
    for polynomial integrands of per-dimension degree <= 2 n_1d - 1.
    """
    if n_1d < 1:
        raise ValueError(f"n_1d must be >= 1, got {n_1d}")
    rule = gauss_rule(spec.family, n_1d)
    grids = np.meshgrid(*([rule.nodes] * spec.dimension), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([rule.weights] * spec.dimension), indexing="ij")
    w = np.ones(pts.shape[0])
    for g in wgrids:
        w = w * g.ravel()
    vals = np.asarray(qoi(pts), dtype=np.float64)
    if vals.shape != (pts.shape[0],):
        raise ValueError("qoi must return one value per quadrature point")
    return basis_row_matrix(spec, pts).T @ (w * vals)


@dataclass(frozen=True)
class ReferenceResult:
    coefficients: np.ndarray = field(repr=False)
    n_1d: int
    max_diff: float
    converged: bool
    levels: tuple[int, ...]


def reference_coefficients(
    spec: BasisSpec,
    qoi=surface_reaction_qoi,
    levels: tuple[int, ...] = (40, 48, 56, 64),
    tol: float = 1e-8,
) -> ReferenceResult:
    """Quadrature ladder: refine n_1d until max_k |c_k| changes by < tol."""
    if len(levels) < 2:
        raise ValueError("need at least two ladder levels to assess convergence")
    prev = reference_coefficients_quadrature(spec, qoi, levels[0])
    max_diff = np.inf
    for n_1d in levels[1:]:
        cur = reference_coefficients_quadrature(spec, qoi, n_1d)
        max_diff = float(np.max(np.abs(cur - prev)))
        prev = cur
        if max_diff < tol:
            return ReferenceResult(prev, n_1d, max_diff, True, tuple(levels))
    return ReferenceResult(prev, levels[-1], max_diff, False, tuple(levels))


def write_coefficients_csv(path, spec: BasisSpec, coefficients) -> None:
    """Write (multi-index, coefficient) rows for a coefficient vector."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    idx = spec.indices
    if coefficients.shape != (idx.shape[0],):
        raise ValueError("coefficient length must match the basis size")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"k_{i + 1}" for i in range(spec.dimension)] + ["coefficient"])
        for row, c in zip(idx, coefficients):
            writer.writerow([int(v) for v in row] + [repr(float(c))])


@dataclass(frozen=True)
class ExternalSampleSet:
    """Sample points and QoI values computed outside this package."""

    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    family: str | None = None
    strategy: Strategy | None = None

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])


def write_external_samples(path, points, values) -> None:
    """Write sample points and QoI values as CSV with header xi_1,...,xi_d,u."""
    points = np.asarray(points, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if points.ndim != 2 or values.shape != (points.shape[0],):
        raise ValueError("need points of shape (n, d) and one value per point")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"xi_{i + 1}" for i in range(points.shape[1])] + ["u"])
        for row, v in zip(points, values):
            writer.writerow([repr(float(x)) for x in row] + [repr(float(v))])


def load_external_samples(
    path, family: str | None = None, strategy: Strategy | str | None = None
) -> ExternalSampleSet:
    """Load a CSV with header ``xi_1,...,xi_d,u`` into an ExternalSampleSet.

    ``family``/``strategy`` are declared metadata (the file itself carries
    none); weights are recomputed from them at recovery time.  Malformed
    rows raise ValueError naming the offending line.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2 or header[-1] != "u":
            raise ValueError(f"{path}: expected header xi_1,...,xi_d,u")
        d = len(header) - 1
        if header[:d] != [f"xi_{i + 1}" for i in range(d)]:
            raise ValueError(f"{path}: expected header xi_1,...,xi_d,u")
        pts, vals = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != d + 1:
                raise ValueError(
                    f"{path}: line {lineno}: expected {d + 1} fields, got {len(row)}"
                )
            try:
                numbers = [float(v) for v in row]
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric field") from None
            if not all(np.isfinite(v) for v in numbers):
                raise ValueError(f"{path}: line {lineno}: non-finite value")
            pts.append(numbers[:d])
            vals.append(numbers[d])
    if not pts:
        raise ValueError(f"{path}: no data rows")
    return ExternalSampleSet(
        points=np.asarray(pts, dtype=np.float64),
        values=np.asarray(vals, dtype=np.float64),
        family=family,
        strategy=Strategy(strategy) if strategy is not None else None,
    )
