"""Weighted basis pursuit denoising by Pareto root finding.

``solve_bpdn`` solves ``min ||c||_1  s.t.  ||W u - W Psi c||_2 <= delta`` with
a spectral projected-gradient method on l1-ball subproblems, updating the
ball radius by Newton steps on the Pareto curve ``phi(tau) = ||r(tau)||_2``
(whose slope at the solution is ``-||A^T r||_inf / ||r||_2``).  ``delta = 0``
solves the equality-constrained basis pursuit problem.

``solve_lasso_regularized`` solves the companion penalized form
``min 1/2 ||W u - W Psi c||_2^2 + lambda ||c||_1`` by pathwise coordinate
descent followed by a least-squares refit on the identified support.

All stopping rules are relative, so the iterations commute with rescaling of
``(u, delta)``; solves are single-threaded and deterministic.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .poly_basis import BasisSpec, basis_row_matrix

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and budgets shared by both solvers."""

    opt_tol: float = 1e-6
    bp_rel_tol: float = 1e-9
    max_matvec: int = 10_000
    history: int = 10
    step_min: float = 1e-16
    step_max: float = 1e5


@dataclass
class MeasurementSystem:
    """Basis rows Psi, diagonal weights, and observed values.

    Stored unweighted so that the weighted rows can be reproduced exactly and
    so that validation residuals can be formed without the weights.
    """

    psi: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    spec: BasisSpec | None = None
    strategy: object = None

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        n, _ = self.psi.shape
        if self.weights.shape != (n,) or self.values.shape != (n,):
            raise ValueError("weights and values must match the number of rows of psi")
        if not (
            np.all(np.isfinite(self.psi))
            and np.all(np.isfinite(self.weights))
            and np.all(np.isfinite(self.values))
        ):
            raise ValueError("measurement system contains non-finite entries")
        if np.any(self.weights <= 0.0):
            raise ValueError("weights must be strictly positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.psi.shape

    @property
    def matrix(self) -> np.ndarray:
        """W Psi, the measurement matrix the solvers act on."""
        return self.weights[:, None] * self.psi

    @property
    def rhs(self) -> np.ndarray:
        """W u."""
        return self.weights * self.values

    def weighted(self) -> tuple[np.ndarray, np.ndarray]:
        """(W Psi, W u)."""
        return self.matrix, self.rhs


def assemble_system(batch, values) -> MeasurementSystem:
    """Build the weighted measurement system for a sample batch."""
    values = np.asarray(values, dtype=np.float64)
    spec: BasisSpec = batch.spec
    if values.shape != (batch.points.shape[0],):
        raise ValueError("values must be a vector with one entry per sample point")
    return MeasurementSystem(
        psi=basis_row_matrix(spec, batch.points),
        weights=batch.weights,
        values=values,
        spec=spec,
        strategy=batch.strategy,
    )


@dataclass(frozen=True)
class RecoveryResult:
    coefficients: np.ndarray = field(repr=False)
    residual_norm: float
    l1_norm: float
    n_matvec: int
    converged: bool
    mode: str
    delta: float | None = None
    lam: float | None = None

    @property
    def iterations(self) -> int:
        """Work counter; one unit is one matrix-vector product."""
        return self.n_matvec

    @property
    def delta_or_lambda(self) -> float:
        return self.delta if self.mode == "bpdn" else self.lam


def project_l1(v: np.ndarray, tau: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball of radius tau (exact, sort-based)."""
    if tau <= 0.0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= tau:
        return v.copy()
    u = np.sort(a)[::-1]
    cssv = np.cumsum(u) - tau
    j = np.arange(1, u.size + 1)
    rho = np.nonzero(u - cssv / j > 0.0)[0][-1]
    lam = cssv[rho] / (rho + 1.0)
    return np.sign(v) * np.maximum(a - lam, 0.0)


def solve_bpdn(
    system: MeasurementSystem,
    delta: float,
    options: SolverOptions | None = None,
    x0: np.ndarray | None = None,
) -> RecoveryResult:
    """Minimize ``||c||_1`` subject to ``||W(u - Psi c)||_2 <= delta``."""
    opts = options or SolverOptions()
    if not np.isfinite(delta) or delta < 0.0:
        raise ValueError(f"delta must be finite and >= 0, got {delta}")
    a_mat, b = system.weighted()
    p = a_mat.shape[1]
    bnorm = float(np.linalg.norm(b))
    nmv = 0

    def result(x, rnorm, converged):
        return RecoveryResult(
            coefficients=x,
            residual_norm=rnorm,
            l1_norm=float(np.abs(x).sum()),
            n_matvec=nmv,
            converged=converged,
            mode="bpdn",
            delta=delta,
        )

    if bnorm <= delta or bnorm == 0.0:
        return result(np.zeros(p), bnorm, True)

    if delta == 0.0 and p <= a_mat.shape[0]:
        # consistent square or tall full-rank system: the interpolant is
        # unique, so it is the minimizer for any norm
        coef, _, rank, _ = np.linalg.lstsq(a_mat, b, rcond=None)
        r0 = b - a_mat @ coef
        nmv += 1
        rnorm0 = float(np.linalg.norm(r0))
        if rank == p and rnorm0 <= opts.bp_rel_tol * bnorm:
            return result(coef, rnorm0, True)

    if x0 is not None:
        x = np.asarray(x0, dtype=np.float64).copy()
        if x.shape != (p,):
            raise ValueError(f"x0 must have shape ({p},)")
        tau = float(np.abs(x).sum())
        r = b - a_mat @ x
        nmv += 1
    else:
        x = np.zeros(p)
        tau = 0.0
        r = b.copy()
    f = 0.5 * float(r @ r)
    g = -(a_mat.T @ r)
    nmv += 1
    rnorm = float(np.linalg.norm(r))

    alpha = 1.0
    fresh = True
    fmem: deque = deque([f], maxlen=opts.history)
    converged = False
    since_refresh = 0
    f_best = f
    stalled = 0

    while nmv < opts.max_matvec:
        gnorm = float(np.max(np.abs(g))) if p else 0.0
        gap = float(r @ (r - b)) + tau * gnorm
        rgap = abs(gap) / max(f, _TINY)
        if delta == 0.0:
            # near the root the subproblems must be solved tightly or the
            # Newton slope overshoots the minimal ball radius
            rerror = rnorm / max(bnorm, _TINY)
            root_found = rnorm <= opts.bp_rel_tol * bnorm
        else:
            rerror = abs(rnorm - delta) / max(rnorm, _TINY)
            root_found = rerror <= opts.opt_tol
        # a subproblem whose objective has flatlined cannot sharpen its own
        # duality gap at useful speed; move the radius with the slope at hand
        sub_done = rgap <= max(opts.opt_tol, 0.1 * rerror) or stalled >= 10

        if root_found and (delta == 0.0 or rgap <= opts.opt_tol):
            converged = True
            break
        if sub_done:
            # Newton step on phi(tau) = rnorm toward phi = delta
            if gnorm <= 0.0:
                break
            tau_new = tau + (rnorm - delta) * rnorm / gnorm
            if not np.isfinite(tau_new) or (rnorm > delta and tau_new <= tau):
                break
            tau = tau_new
            x = project_l1(x, tau)
            r = b - a_mat @ x
            g = -(a_mat.T @ r)
            nmv += 2
            f = 0.5 * float(r @ r)
            rnorm = float(np.linalg.norm(r))
            fmem = deque([f], maxlen=opts.history)
            since_refresh = 0
            f_best = f
            stalled = 0
            continue

        d = project_l1(x - alpha * g, tau) - x
        dd = float(d @ d)
        if dd == 0.0:
            # stationary for this tau but duality gap not yet tight: the
            # projected gradient cannot improve, treat subproblem as solved
            if gnorm <= 0.0:
                break
            tau_new = tau + (rnorm - delta) * rnorm / gnorm
            if not np.isfinite(tau_new) or tau_new == tau:
                break
            tau = tau_new
            x = project_l1(x, tau)
            r = b - a_mat @ x
            g = -(a_mat.T @ r)
            nmv += 2
            f = 0.5 * float(r @ r)
            rnorm = float(np.linalg.norm(r))
            fmem = deque([f], maxlen=opts.history)
            since_refresh = 0
            f_best = f
            stalled = 0
            continue

        ad = a_mat @ d
        nmv += 1
        gd = float(g @ d)
        curv = float(ad @ ad)

        if fresh and curv > 0.0:
            theta = min(1.0, max(-gd / curv, 0.0))
            if theta == 0.0:
                theta = 1.0
            fresh = False
        else:
            theta = 1.0
        fmax = max(fmem)
        accepted = False
        for _ in range(32):
            f_new = f + theta * gd + 0.5 * theta**2 * curv
            if f_new <= fmax + 1e-4 * theta * gd:
                accepted = True
                break
            theta *= 0.5
        if not accepted:
            if curv <= 0.0:
                break
            theta = min(1.0, max(-gd / curv, 0.0))
            if theta <= 0.0:
                break
            f_new = f + theta * gd + 0.5 * theta**2 * curv

        s = theta * d
        x = x + s
        r = r - theta * ad
        since_refresh += 1
        if since_refresh >= 100:
            r = b - a_mat @ x
            nmv += 1
            since_refresh = 0
        g_new = -(a_mat.T @ r)
        nmv += 1
        y = g_new - g
        g = g_new
        f = 0.5 * float(r @ r)
        rnorm = float(np.linalg.norm(r))
        fmem.append(f)
        if f < f_best * (1.0 - 1e-4):
            f_best = f
            stalled = 0
        else:
            stalled += 1
        sy = float(s @ y)
        if sy > 0.0:
            alpha = min(opts.step_max, max(opts.step_min, float(s @ s) / sy))
        else:
            alpha = opts.step_max

    if delta == 0.0 and np.any(x != 0.0):
        x, rnorm, feasible = _polish_interpolant(a_mat, b, x, rnorm, opts.bp_rel_tol * bnorm)
        converged = converged or feasible
    return result(x, rnorm, converged)


def _polish_interpolant(a_mat, b, x, rnorm, feas_tol):
    """Exact endgame on the detected support for the delta=0 mode.

    The Pareto root search can stop slightly off the minimal ball radius in
    either direction: an overshot radius leaves spurious mass behind, an
    undershot one leaves the iterate marginally infeasible.  Candidate
    supports are refit by least squares and kept only when feasible and no
    worse than the iterate's l1 norm (rel 1e-6 slack); the best feasible
    point is then walked to a vertex of the interpolation polytope, which
    removes the spurious mass an overshot radius leaves behind.
    """
    n = a_mat.shape[0]
    absx = np.abs(x)
    scale = float(absx.max())
    order = np.argsort(absx)[::-1]
    sizes = {
        int(np.count_nonzero(absx > 1e-5 * scale)),
        min(n, int(np.count_nonzero(absx > 1e-10 * scale))),
    }
    l1_x = float(absx.sum())
    best_x, best_r = x, rnorm
    feasible = rnorm <= feas_tol

    def consider(keep):
        nonlocal best_x, best_r, feasible
        coef, *_ = np.linalg.lstsq(a_mat[:, keep], b, rcond=None)
        rnorm_pol = float(np.linalg.norm(b - a_mat[:, keep] @ coef))
        l1_pol = float(np.abs(coef).sum())
        if rnorm_pol > feas_tol or l1_pol > l1_x * (1.0 + 1e-6):
            return
        if not feasible or l1_pol < float(np.abs(best_x).sum()):
            best_x = np.zeros_like(x)
            best_x[keep] = coef
            best_r = rnorm_pol
            feasible = True

    for k in sorted(sizes):
        if k > 0:
            consider(order[:k])
    # The walk is only worthwhile when the support excess over the row
    # count is small (the overshoot signature); a dense failed recovery
    # would pay one SVD per removed coordinate for nothing.
    if feasible and np.count_nonzero(best_x) - n <= 16:
        walked = _vertex_descent(a_mat, _reduce_to_basic(a_mat, best_x))
        support = np.flatnonzero(walked)
        if support.size and float(np.abs(walked).sum()) < float(np.abs(best_x).sum()):
            consider(support)
    return best_x, best_r, feasible


def _reduce_to_basic(a_mat, x):
    """Shrink the support of a feasible point to linear independence.

    Any null vector of the active columns is a direction along which the
    residual is constant and the l1 norm is piecewise linear; stepping to
    the first kink on the non-increasing side zeroes at least one
    coordinate per pass without degrading the objective.
    """
    x = x.copy()
    for _ in range(x.size):
        s = np.flatnonzero(x)
        if s.size == 0:
            return x
        null = scipy.linalg.null_space(a_mat[:, s])
        if null.shape[1] == 0:
            return x
        v = null[:, 0]
        if float(np.sign(x[s]) @ v) > 0.0:
            v = -v
        with np.errstate(divide="ignore", invalid="ignore"):
            steps = -x[s] / v
        steps[~np.isfinite(steps)] = np.inf
        positive = steps[steps > 0.0]
        if positive.size == 0:
            return x
        t = float(positive.min())
        xs = x[s] + t * v
        xs[np.abs(xs) <= 1e-12 * max(1.0, float(np.abs(xs).max()))] = 0.0
        x[s] = xs
    return x


def _vertex_descent(a_mat, x, max_pivots=64):
    """Pivot a basic feasible point toward the minimum-l1 interpolant.

    Entering an inactive column whose direction stays inside the affine
    feasible set changes the l1 norm at a linear rate; the most negative
    rate is followed to its first kink, which is a strict improvement.
    Stops at a vertex with no descending neighbour or at the pivot cap.
    """
    x = x.copy()
    col_norm = np.linalg.norm(a_mat, axis=0)
    for _ in range(max_pivots):
        s = np.flatnonzero(x)
        if s.size == 0:
            return x
        a_s = a_mat[:, s]
        dirs, *_ = np.linalg.lstsq(a_s, a_mat, rcond=None)
        misfit = np.linalg.norm(a_s @ dirs - a_mat, axis=0)
        reachable = misfit <= 1e-10 * np.maximum(col_norm, 1.0)
        reachable[s] = False
        if not np.any(reachable):
            return x
        sgn = np.sign(x[s])
        proj = sgn @ dirs
        rate_plus = np.where(reachable, 1.0 - proj, np.inf)
        rate_minus = np.where(reachable, 1.0 + proj, np.inf)
        j_plus = int(np.argmin(rate_plus))
        j_minus = int(np.argmin(rate_minus))
        if rate_plus[j_plus] <= rate_minus[j_minus]:
            j, sigma, rate = j_plus, 1.0, float(rate_plus[j_plus])
        else:
            j, sigma, rate = j_minus, -1.0, float(rate_minus[j_minus])
        if rate >= -1e-10:
            return x
        with np.errstate(divide="ignore", invalid="ignore"):
            steps = x[s] / (sigma * dirs[:, j])
        steps[~np.isfinite(steps)] = np.inf
        positive = steps[steps > 0.0]
        if positive.size == 0:
            return x
        t = float(positive.min())
        trial = x.copy()
        trial[s] = x[s] - sigma * t * dirs[:, j]
        trial[j] = sigma * t
        trial[np.abs(trial) <= 1e-12 * max(1.0, float(np.abs(trial).max()))] = 0.0
        if float(np.abs(trial).sum()) >= float(np.abs(x).sum()):
            return x
        x = trial
    return x


def solve_lasso_regularized(
    system: MeasurementSystem, lam: float, options: SolverOptions | None = None
) -> RecoveryResult:
    """Minimize ``1/2 ||W(u - Psi c)||_2^2 + lam ||c||_1``.

    Pathwise coordinate descent: warm-started sweeps along a geometric
    sequence of penalty levels down to ``lam``, then an exact least-squares
    refit on the identified support (with the penalty folded into the normal
    equations) certified against the full subgradient conditions.  Small
    penalties are therefore resolved to near machine precision even though
    the objective is almost flat across the null space.
    """
    opts = options or SolverOptions()
    if not np.isfinite(lam) or lam <= 0.0:
        raise ValueError(f"lam must be finite and > 0, got {lam}")
    a_mat, b = system.weighted()
    n, p = a_mat.shape
    nmv = 0

    h0 = a_mat.T @ b
    nmv += 1
    h0norm = float(np.max(np.abs(h0))) if p else 0.0

    def result(x, converged):
        r = b - a_mat @ x
        return RecoveryResult(
            coefficients=x,
            residual_norm=float(np.linalg.norm(r)),
            l1_norm=float(np.abs(x).sum()),
            n_matvec=nmv,
            converged=converged,
            mode="lasso",
            lam=lam,
        )

    if h0norm <= lam:
        return result(np.zeros(p), True)

    col_sq = np.einsum("ij,ij->j", a_mat, a_mat)
    active_cols = col_sq > 0.0
    bscale = float(np.linalg.norm(b))

    def sweep(x, r, level, tol):
        # one pass of cyclic coordinate minimization; returns max step size
        nonlocal nmv
        moved = 0.0
        for _ in range(512):
            delta_max = 0.0
            for j in range(p):
                if not active_cols[j]:
                    continue
                corr = float(a_mat[:, j] @ r) + col_sq[j] * x[j]
                new = math.copysign(max(abs(corr) - level, 0.0), corr) / col_sq[j]
                step_j = new - x[j]
                if step_j != 0.0:
                    r -= step_j * a_mat[:, j]
                    x[j] = new
                    delta_max = max(delta_max, abs(step_j) * math.sqrt(col_sq[j]))
            nmv += 2
            moved = delta_max
            if delta_max <= tol * max(bscale, _TINY) or nmv >= opts.max_matvec:
                break
        return moved

    x = np.zeros(p)
    r = b.copy()
    # geometric descent of the penalty, roughly three points per e-fold
    n_seg = max(1, int(math.ceil(3.0 * math.log(h0norm / lam))))
    for k in range(1, n_seg + 1):
        level = h0norm * (lam / h0norm) ** (k / n_seg)
        sweep(x, r, level, 1e-4)
        if nmv >= opts.max_matvec:
            break

    converged = False
    while nmv < opts.max_matvec:
        sweep(x, r, lam, 1e-8)
        support = np.nonzero(x)[0]
        if support.size == 0:
            converged = True
            break
        signs = np.sign(x[support])
        sub = a_mat[:, support]
        coef, *_ = np.linalg.lstsq(
            sub.T @ sub, sub.T @ b - lam * signs, rcond=None
        )
        nmv += 1
        if np.any(np.sign(coef) * signs < 0.0):
            continue
        refit = np.zeros(p)
        refit[support] = coef
        g = a_mat.T @ (a_mat @ refit) - h0
        nmv += 2
        off = np.ones(p, dtype=bool)
        off[support] = False
        off_ok = not off.any() or float(np.max(np.abs(g[off]))) <= lam * (
            1.0 + opts.opt_tol
        ) + 1e-12 * h0norm
        if off_ok:
            x = refit
            converged = True
            break
        r = b - a_mat @ x
        nmv += 1
    return result(x, converged)
