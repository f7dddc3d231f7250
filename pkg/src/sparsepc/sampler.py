"""Sampling strategies and importance weights for weighted l1 recovery.

Three strategies per family:

* ``standard``: draw from the orthogonality measure itself (Gaussian or
  uniform), unit weights.
* ``asymptotic``: draw from the large-degree envelope of the basis, i.e.
  uniform on the d-ball of radius ``sqrt(2) * sqrt(2p + 1)`` for Hermite and
  per-coordinate Chebyshev for Legendre, with the matching weights.
* ``coherence_optimal``: Markov chain Monte Carlo on the unnormalized density
  ``f(xi) * B(xi)**2`` restricted to the truncation support, weights ``1/B``.

All draws are reproducible: a batch is a pure function of
``(spec, strategy, n, seed)`` plus the MCMC configuration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import backends
from .poly_basis import BasisSpec

_CODES = {"hermite": backends.HERMITE, "legendre": backends.LEGENDRE}


class Strategy(str, Enum):
    STANDARD = "standard"
    ASYMPTOTIC = "asymptotic"
    COHERENCE_OPTIMAL = "coherence_optimal"


@dataclass(frozen=True)
class McmcConfig:
    """Chain controls for the coherence-optimal sampler.

    ``proposal`` is ``"auto"`` (asymptotic when p > d, standard otherwise),
    ``"standard"``, or ``"asymptotic"``.  ``thinning`` states how many chain
    steps separate two kept samples; ``burn_in`` initial steps are discarded.
    """

    burn_in: int = 1000
    thinning: int = 100
    proposal: str = "auto"
    chunk: int = 8192

    def __post_init__(self):
        if self.burn_in < 0 or self.thinning < 1 or self.chunk < 1:
            raise ValueError("burn_in >= 0, thinning >= 1, chunk >= 1 required")
        if self.proposal not in ("auto", "standard", "asymptotic"):
            raise ValueError(f"unknown proposal {self.proposal!r}")


@dataclass(frozen=True)
class SampleBatch:
    """Points, weights, and provenance of one sampling run."""

    spec: BasisSpec
    strategy: Strategy
    points: np.ndarray
    weights: np.ndarray
    seed: int
    acceptance_rate: float | None = None
    chain_steps: int | None = None


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """Deterministic generator for (seed, sub-stream path)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, *path))))


def hermite_ball_radius(degree: int) -> float:
    """Truncation/sampling radius sqrt(2) * sqrt(2p + 1) for Hermite degree p."""
    return math.sqrt(2.0) * math.sqrt(2.0 * degree + 1.0)


def _standard_points(spec: BasisSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.family == "hermite":
        return rng.standard_normal((n, spec.dimension))
    return rng.uniform(-1.0, 1.0, size=(n, spec.dimension))


def _chebyshev_points(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((n, d))
    # u == 0 would land exactly on an endpoint where the weight vanishes.
    while True:
        zero = u == 0.0
        if not zero.any():
            break
        u[zero] = rng.random(int(zero.sum()))
    return np.cos(np.pi * u)


def _ball_points(n: int, d: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, d))
    u = rng.random(n)
    norms = np.linalg.norm(z, axis=1)
    return z * (radius * u ** (1.0 / d) / norms)[:, None]


def _asymptotic_points(spec: BasisSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.family == "hermite":
        if spec.degree < 1:
            raise ValueError("asymptotic Hermite sampling requires degree >= 1")
        return _ball_points(n, spec.dimension, hermite_ball_radius(spec.degree), rng)
    return _chebyshev_points(n, spec.dimension, rng)


def weight_of(strategy: Strategy, spec: BasisSpec, points) -> np.ndarray:
    """Sampling weights w(xi) for existing points under a declared strategy."""
    strategy = Strategy(strategy)
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != spec.dimension:
        raise ValueError(f"points must have shape (n, {spec.dimension})")
    if spec.family == "legendre" and np.any(np.abs(pts) > 1.0):
        raise ValueError("Legendre points must lie in [-1, 1]^d")
    if strategy is Strategy.STANDARD:
        return np.ones(pts.shape[0])
    if strategy is Strategy.ASYMPTOTIC:
        if spec.family == "hermite":
            return np.exp(-np.sum(pts**2, axis=1) / 4.0)
        return np.prod((1.0 - pts**2) ** 0.25, axis=1)
    b = backends.envelope(np.ascontiguousarray(pts), spec.degree, _CODES[spec.family])
    return 1.0 / b


def _chain_proposal_kind(spec: BasisSpec, config: McmcConfig) -> str:
    if config.proposal != "auto":
        return config.proposal
    return "asymptotic" if spec.degree > spec.dimension else "standard"


def _chain_scores(spec: BasisSpec, kind: str, pts: np.ndarray) -> np.ndarray:
    """log target - log proposal density per point, shared constants dropped.

    Target is f * B^2 restricted to the support S: the ball of radius
    sqrt(2)*sqrt(2p+1) for Hermite with p > d, all of R^d for Hermite with
    p <= d, and [-1, 1]^d for Legendre.
    """
    code = _CODES[spec.family]
    logb = np.log(backends.envelope(np.ascontiguousarray(pts), spec.degree, code))
    if spec.family == "hermite":
        if kind == "asymptotic":
            # uniform-ball proposal, Gaussian target on the ball
            return 2.0 * logb - 0.5 * np.sum(pts**2, axis=1)
        score = 2.0 * logb
        if spec.degree > spec.dimension:
            outside = np.sum(pts**2, axis=1) > hermite_ball_radius(spec.degree) ** 2
            score[outside] = -np.inf
        return score
    if kind == "asymptotic":
        # Chebyshev proposal, uniform target on the cube; a draw that rounds
        # onto the cube boundary gets score -inf (the proposal density
        # diverges there), which is the correct rejection behavior
        with np.errstate(divide="ignore"):
            return 2.0 * logb + 0.5 * np.sum(np.log1p(-(pts**2)), axis=1)
    return 2.0 * logb


def _sample_coherence_optimal(
    spec: BasisSpec, n: int, rng: np.random.Generator, config: McmcConfig
) -> tuple[np.ndarray, float, int]:
    kind = _chain_proposal_kind(spec, config)
    draw = _asymptotic_points if kind == "asymptotic" else _standard_points
    cur_point = draw(spec, 1, rng)
    cur_score = _chain_scores(spec, kind, cur_point)[0]

    total = config.burn_in + n * config.thinning
    kept = np.empty((n, spec.dimension))
    n_kept = 0
    n_accept = 0
    done = 0
    while done < total:
        m = min(config.chunk, total - done)
        proposals = draw(spec, m, rng)
        scores = _chain_scores(spec, kind, proposals)
        log_u = np.log(rng.random(m))
        state, acc, cur_score = backends.mh_scan(scores, log_u, cur_score)
        n_accept += int(acc)
        # steps done+1 .. done+m; keep burn_in + thinning, burn_in + 2*thinning, ...
        steps = np.arange(done + 1, done + m + 1)
        keep = np.nonzero((steps > config.burn_in) & ((steps - config.burn_in) % config.thinning == 0))[0]
        if keep.size:
            idx = state[keep]
            block = proposals[np.maximum(idx, 0)]
            if idx[0] < 0:
                block[idx < 0] = cur_point[0]
            kept[n_kept : n_kept + keep.size] = block
            n_kept += keep.size
        if state[m - 1] >= 0:
            cur_point = proposals[state[m - 1]][None, :].copy()
        done += m
    assert n_kept == n
    return kept, n_accept / total, total


def sample(
    spec: BasisSpec,
    strategy: Strategy | str,
    n: int,
    seed: int,
    mcmc: McmcConfig | None = None,
) -> SampleBatch:
    """Draw a reproducible sample batch with its importance weights."""
    strategy = Strategy(strategy)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = make_rng(seed)
    acceptance_rate = None
    chain_steps = None
    if strategy is Strategy.STANDARD:
        pts = _standard_points(spec, n, rng)
    elif strategy is Strategy.ASYMPTOTIC:
        pts = _asymptotic_points(spec, n, rng)
    else:
        pts, acceptance_rate, chain_steps = _sample_coherence_optimal(
            spec, n, rng, mcmc or McmcConfig()
        )
    weights = weight_of(strategy, spec, pts)
    return SampleBatch(
        spec=spec,
        strategy=strategy,
        points=pts,
        weights=weights,
        seed=seed,
        acceptance_rate=acceptance_rate,
        chain_steps=chain_steps,
    )


def write_sample_csv(path, points, weights) -> None:
    """Write points/weights as CSV with shortest round-trip decimal reprs."""
    points = np.asarray(points, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    d = points.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"xi_{i + 1}" for i in range(d)] + ["weight"])
        for row, w in zip(points, weights):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(w))])


def export_batch(batch: SampleBatch, path) -> None:
    write_sample_csv(path, batch.points, batch.weights)


def read_sample_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a points/weights CSV written by :func:`write_sample_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2 or header[-1] != "weight":
            raise ValueError(f"{path}: expected header xi_1,...,xi_d,weight")
        d = len(header) - 1
        if header[:d] != [f"xi_{i + 1}" for i in range(d)]:
            raise ValueError(f"{path}: expected header xi_1,...,xi_d,weight")
        pts, ws = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != d + 1:
                raise ValueError(f"{path}: line {lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
            pts.append(vals[:d])
            ws.append(vals[d])
    return np.asarray(pts, dtype=np.float64).reshape(len(pts), d), np.asarray(ws)
