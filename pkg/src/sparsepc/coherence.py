"""Coherence estimation, theoretical bounds, truncation checks, sample advisories.

The coherence of a sampling strategy is ``mu = sup |w(xi) psi_k(xi)|**2`` over
the basis and the sampling support, with weights normalized so that the
weighted basis is orthonormal in expectation.  The empirical estimate takes
the max over Monte Carlo draws of ``(w(xi) B(xi))**2`` using the envelope
``B(xi) = max_k |psi_k(xi)|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc
from scipy.stats import chi

from . import backends
from .poly_basis import BasisSpec, eta_k
from .sampler import McmcConfig, SampleBatch, Strategy, hermite_ball_radius, make_rng, sample

_CODES = {"hermite": backends.HERMITE, "legendre": backends.LEGENDRE}


@dataclass(frozen=True)
class CoherenceEstimate:
    spec: BasisSpec
    strategy: Strategy
    n_draws: int
    mu_hat: float
    seed: int


def _ball_volume(d: int, radius: float) -> float:
    return math.pi ** (d / 2.0) * radius**d / math.gamma(d / 2.0 + 1.0)


def weight_normalization(spec: BasisSpec, strategy: Strategy) -> float | None:
    """Factor making the sampler's weights orthonormalizing in expectation.

    Standard and asymptotic strategies admit closed forms; the
    coherence-optimal normalization has no closed form (None) and is
    estimated from the draws in :func:`estimate_mu`.
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.STANDARD:
        return 1.0
    if strategy is Strategy.ASYMPTOTIC:
        d = spec.dimension
        if spec.family == "hermite":
            vol = _ball_volume(d, hermite_ball_radius(spec.degree))
            return math.sqrt(vol) * (2.0 * math.pi) ** (-d / 4.0)
        return (math.pi / 2.0) ** (d / 2.0)
    return None


def estimate_mu(
    spec: BasisSpec,
    strategy: Strategy | str,
    n_draws: int,
    seed: int,
    mcmc: McmcConfig | None = None,
) -> CoherenceEstimate:
    """Empirical coherence from ``n_draws`` draws of the given strategy.

    The estimate is the max over draws of ``(w_norm(xi) * B(xi))**2``.  For
    the coherence-optimal strategy the normalization is self-estimated as
    ``1 / sqrt(mean(w**2))`` (the weighted constant function has unit second
    moment), so only the unnormalized max is monotone in ``n_draws``.
    """
    strategy = Strategy(strategy)
    if n_draws < 1000:
        raise ValueError(f"n_draws must be >= 1000 for a stable sup, got {n_draws}")
    batch = sample(spec, strategy, n_draws, seed, mcmc=mcmc)
    return estimate_mu_from_batch(batch)


def estimate_mu_from_batch(batch: SampleBatch) -> CoherenceEstimate:
    spec = batch.spec
    b = backends.envelope(
        np.ascontiguousarray(batch.points), spec.degree, _CODES[spec.family]
    )
    factor = weight_normalization(spec, batch.strategy)
    if factor is None:
        factor = 1.0 / math.sqrt(float(np.mean(batch.weights**2)))
    mu_hat = float(np.max(factor * batch.weights * b) ** 2)
    return CoherenceEstimate(
        spec=spec,
        strategy=batch.strategy,
        n_draws=batch.points.shape[0],
        mu_hat=mu_hat,
        seed=batch.seed,
    )


@dataclass(frozen=True)
class MuBound:
    """A theoretical coherence bound; ``value`` is None when no closed form exists."""

    value: float | None
    asymptotic_only: bool


def theoretical_mu_bound(spec: BasisSpec, strategy: Strategy | str) -> MuBound:
    """Closed-form coherence bounds per family and strategy.

    Legendre: ``min(3**p, (2p/d + 1)**d)`` for standard sampling (exact) and
    ``3**d`` for Chebyshev sampling (exact).  Hermite: ``exp((2 - log 2) p)``
    for standard sampling and ``(2p)**(d/2) / Gamma(d/2 + 1)`` for ball
    sampling, both valid asymptotically in p only.  Coherence-optimal
    sampling has no closed form; by optimality it is bounded by the others.
    """
    strategy = Strategy(strategy)
    d, p = spec.dimension, spec.degree
    if strategy is Strategy.COHERENCE_OPTIMAL:
        return MuBound(value=None, asymptotic_only=False)
    if spec.family == "legendre":
        if strategy is Strategy.STANDARD:
            return MuBound(value=min(3.0**p, (2.0 * p / d + 1.0) ** d), asymptotic_only=False)
        return MuBound(value=3.0**d, asymptotic_only=False)
    if strategy is Strategy.STANDARD:
        return MuBound(value=math.exp((2.0 - math.log(2.0)) * p), asymptotic_only=True)
    return MuBound(
        value=(2.0 * p) ** (d / 2.0) / math.gamma(d / 2.0 + 1.0), asymptotic_only=True
    )


@dataclass(frozen=True)
class TruncationReport:
    """The two truncation conditions for a candidate support radius.

    ``satisfied`` is True iff ``prob_complement < 1/(N*P)`` and
    ``orth_defect_sum <= P**-0.5 / 20``.  ``analytic_defect_bound`` reports
    the erfc tail expression (per-order bound at k = p, scaled by P, in the
    physicists' scale) alongside the Monte Carlo estimate; it is None where
    its own validity conditions fail.
    """

    radius: float
    n_samples: int
    basis_size: int
    prob_complement: float
    prob_threshold: float
    orth_defect_sum: float
    defect_threshold: float
    analytic_defect_bound: float | None
    satisfied: bool
    weighted: bool
    n_draws: int
    seed: int


def _tail_rows_sq_sum(
    spec: BasisSpec, pts: np.ndarray, weighted: bool
) -> np.ndarray:
    """sum_k (w psi_k)(xi)**2 per point, w = exp(-||xi||^2/4) or 1."""
    d = spec.dimension
    tables = [
        backends.poly_table(np.ascontiguousarray(pts[:, i]), spec.degree, backends.HERMITE)
        for i in range(d)
    ]
    if weighted:
        for i in range(d):
            tables[i] = tables[i] * np.exp(-(pts[:, i] ** 2) / 4.0)[:, None]
    idx = spec.indices
    rows = tables[0][:, idx[:, 0]]
    for i in range(1, d):
        rows = rows * tables[i][:, idx[:, i]]
    return np.sum(rows**2, axis=1)


def check_truncation(
    spec: BasisSpec,
    n_samples: int,
    basis_size: int,
    radius: float,
    *,
    weighted: bool = True,
    n_draws: int = 10**6,
    seed: int = 0,
    delta_p: float = 0.0,
) -> TruncationReport:
    """Evaluate the truncation conditions for the Hermite ball of radius ``radius``.

    ``prob_complement`` is the standard-Gaussian probability of leaving the
    ball (chi tail in d dimensions).  ``orth_defect_sum`` is a Monte Carlo
    estimate of ``sum_k E[(w psi_k)(Xi)**2 1_outside]`` from tail-conditioned
    draws; ``weighted=True`` uses the Hermite-function weight
    ``w = exp(-||xi||^2/4)``, ``weighted=False`` the bare polynomials.
    """
    if spec.family != "hermite":
        raise ValueError("truncation analysis applies to the hermite family")
    if n_samples < 1 or basis_size < 1:
        raise ValueError("n_samples and basis_size must be >= 1")
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    d = spec.dimension
    dist = chi(df=d)
    prob_complement = float(dist.sf(radius))
    prob_threshold = 1.0 / (n_samples * basis_size)

    if prob_complement == 0.0 or math.isinf(radius):
        defect = 0.0
    else:
        rng = make_rng(seed, 0xC0)
        sf_r = prob_complement
        acc = 0.0
        left = n_draws
        chunk = 65536
        while left > 0:
            m = min(chunk, left)
            v = rng.random(m)
            while True:
                zero = v == 0.0
                if not zero.any():
                    break
                v[zero] = rng.random(int(zero.sum()))
            radii = dist.isf(v * sf_r)
            z = rng.standard_normal((m, d))
            pts = z * (radii / np.linalg.norm(z, axis=1))[:, None]
            acc += float(np.sum(_tail_rows_sq_sum(spec, pts, weighted)))
            left -= m
        defect = prob_complement * acc / n_draws

    defect_threshold = basis_size**-0.5 / 20.0
    analytic = None
    if spec.degree >= 1 and math.isfinite(radius):
        r_phys = radius / math.sqrt(2.0)
        if r_phys**2 > 2.0 * spec.degree:
            eta = eta_k(spec.degree, r_phys)
            if 1.0 - 2.0 * eta > 0.0:
                analytic = float(
                    basis_size
                    * (1.0 + delta_p)
                    * erfc(math.sqrt((1.0 - 2.0 * eta) * r_phys**2))
                    / math.sqrt(1.0 - 2.0 * eta)
                )
    return TruncationReport(
        radius=radius,
        n_samples=n_samples,
        basis_size=basis_size,
        prob_complement=prob_complement,
        prob_threshold=prob_threshold,
        orth_defect_sum=defect,
        defect_threshold=defect_threshold,
        analytic_defect_bound=analytic,
        satisfied=(prob_complement < prob_threshold) and (defect <= defect_threshold),
        weighted=weighted,
        n_draws=n_draws,
        seed=seed,
    )


def sample_count_advisory(
    mu: float, sparsity: int, basis_size: int, beta: float = 1.0, c: float = 1.0
) -> int:
    """Advisory sample count ``ceil(c (1+beta) mu s log P)``, natural log.

    Returns 0 for ``sparsity == 0``.
    """
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    if sparsity < 0:
        raise ValueError(f"sparsity must be >= 0, got {sparsity}")
    if basis_size < 1:
        raise ValueError(f"basis_size must be >= 1, got {basis_size}")
    if beta < 0.0 or c <= 0.0:
        raise ValueError("beta must be >= 0 and c > 0")
    if sparsity == 0:
        return 0
    return math.ceil(c * (1.0 + beta) * mu * sparsity * math.log(basis_size))


def lambda_rule(basis_size: int, n_samples: int) -> float:
    """Regularization weight ``10 sqrt(log(P) / N)``, natural log."""
    if basis_size < 1 or n_samples < 1:
        raise ValueError("basis_size and n_samples must be >= 1")
    return 10.0 * math.sqrt(math.log(basis_size) / n_samples)
