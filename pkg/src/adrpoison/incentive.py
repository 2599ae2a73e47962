"""Exploitation stage: the aggregator's optimal DR incentive.

The aggregator minimises (per customer, in expectation) a quadratic penalty
on missing its commitment ``D``, minus revenue ``gamma`` per kW, plus the
customers' discomfort.  Introducing ``Q = sum(x)`` and dualising gives the
normalised multiplier ``lambda_hat``; the price actually broadcast is
``N * lambda_hat``.

``brute_force_incentive_oracle`` minimises the primal objective numerically
and reads the multiplier off the ``Q`` stationarity condition.  It never
touches the closed form and exists to check it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import optimize

from .errors import InvalidInputError, InvalidParameterError, SingularConfigurationError
from .model import BetaParams

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class AggregatorParams:
    kappa: float = 1.0
    gamma: float = 0.0
    commitment_D: float = 0.0
    n_customers: int = 1

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be > 0, got {self.kappa}")
        if not self.gamma >= 0:
            raise InvalidParameterError(f"gamma must be >= 0, got {self.gamma}")
        if not self.commitment_D >= 0:
            raise InvalidParameterError(f"commitment must be >= 0, got {self.commitment_D}")
        if not self.n_customers >= 1:
            raise InvalidParameterError(f"n_customers must be >= 1, got {self.n_customers}")


@dataclass(frozen=True)
class IncentiveResult:
    lambda_hat: float
    lambda_broadcast: float
    expected_per_customer: Mapping[str, float] = field(default_factory=dict)
    expected_total: float = 0.0
    clamped: bool = False
    unstable_estimate: bool = False


def broadcast_incentive(sum_beta1, sum_beta0, commitment, kappa, gamma):
    """Broadcast price from aggregate estimates, clamped at zero.

    Vectorised; this is ``N * lambda_hat`` written without the ``N``.
    """
    sum_beta1 = np.asarray(sum_beta1, dtype=float)
    raw = kappa * (commitment - gamma * sum_beta1 - sum_beta0) / (1.0 + kappa * sum_beta1)
    return np.maximum(raw, 0.0)


def design_incentive(betas: Mapping[str, BetaParams], params: AggregatorParams) -> IncentiveResult:
    if not betas:
        raise InvalidInputError("at least one customer estimate is required")
    n = params.n_customers
    # sort so the reduction is order independent to the last bit
    ids = sorted(betas)
    s1 = float(np.sum(np.sort([betas[i].beta1 for i in ids])))
    s0 = float(np.sum(np.sort([betas[i].beta0 for i in ids])))
    kappa, gamma, d = params.kappa, params.gamma, params.commitment_D

    denom = 1.0 + kappa * s1
    if abs(denom) < SINGULAR_TOL:
        raise SingularConfigurationError("1 + kappa * sum(beta1) vanishes")
    raw = (kappa * d - gamma * kappa * s1 - kappa * s0) / (n * denom)
    lam_hat = max(raw, 0.0)

    expected = {i: betas[i].beta1 * (n * lam_hat + gamma) + betas[i].beta0 for i in ids}
    return IncentiveResult(
        lambda_hat=lam_hat,
        lambda_broadcast=n * lam_hat,
        expected_per_customer=expected,
        expected_total=float(sum(expected.values())),
        clamped=raw < 0,
        unstable_estimate=s1 < 0,
    )


def closed_form_response(betas: Mapping[str, BetaParams], params: AggregatorParams) -> dict:
    """Per-customer optimum written directly in terms of ``D`` (no multiplier)."""
    kappa, gamma, d = params.kappa, params.gamma, params.commitment_D
    s1 = sum(b.beta1 for b in betas.values())
    s0 = sum(b.beta0 for b in betas.values())
    level = (kappa * d + gamma - kappa * s0) / (1.0 + kappa * s1)
    return {i: b.beta1 * level + b.beta0 for i, b in betas.items()}


def aggregator_objective(x, alpha1, alpha0, params: AggregatorParams, noise_sigma: float = 0.0) -> float:
    """Expected normalised aggregator cost for curtailment vector ``x``.

    Expectations over independent zero-mean noise are taken analytically, so
    ``noise_sigma`` only adds x-independent constants.
    """
    x = np.asarray(x, dtype=float)
    n = params.n_customers
    kappa, gamma, d = params.kappa, params.gamma, params.commitment_D
    var = noise_sigma**2
    q = x.sum()
    penalty = kappa / (2 * n) * ((q - d) ** 2 + len(x) * var)
    revenue = gamma / n * q
    discomfort = np.sum(0.5 * alpha1 * (x**2 + var) + alpha0 * x) / n
    return float(penalty - revenue + discomfort)


def brute_force_incentive_oracle(
    betas: Mapping[str, BetaParams],
    params: AggregatorParams,
    noise_sigma: float = 0.0,
    grid_points: int = 401,
):
    """Numerically minimise the aggregator problem; return ``(lambda_hat, x_star)``.

    A dense grid over a common curtailment level seeds a quasi-Newton
    refinement over the full vector.  The multiplier follows from the
    ``Q`` stationarity condition ``kappa * (Q - D) / N + lambda_hat = 0``.
    """
    ids = sorted(betas)
    if len(ids) > 10:
        raise InvalidInputError("oracle is intended for N <= 10")
    b1 = np.array([betas[i].beta1 for i in ids])
    b0 = np.array([betas[i].beta0 for i in ids])
    if np.any(b1 <= 0):
        raise InvalidParameterError("oracle needs strictly positive beta1 (convex discomfort)")
    alpha1 = 1.0 / b1
    alpha0 = -b0 / b1
    n = params.n_customers

    def f(x):
        return aggregator_objective(x, alpha1, alpha0, params, noise_sigma)

    def grad(x):
        q = x.sum()
        return (params.kappa * (q - params.commitment_D) - params.gamma + alpha1 * x + alpha0) / n

    hi = max(params.commitment_D, float(np.abs(b0).max()), 1.0) * 2.0
    levels = np.linspace(-hi, hi, grid_points)
    start_vals = [f(np.full(len(ids), c / len(ids))) for c in levels]
    x0 = np.full(len(ids), levels[int(np.argmin(start_vals))] / len(ids))

    scale = 1.0 + params.kappa * len(ids) + alpha1.max()
    res = optimize.minimize(
        lambda x: f(x) * n / scale,
        x0,
        jac=lambda x: grad(x) * n / scale,
        method="BFGS",
        options={"gtol": 1e-13, "maxiter": 10_000},
    )
    x_star = res.x
    lam_hat = params.kappa * (params.commitment_D - x_star.sum()) / n
    if lam_hat < 0:
        # the price cannot go negative: customers fall back to their zero-price response
        lam_hat = 0.0
        x_star = b1 * params.gamma + b0
    return float(lam_hat), dict(zip(ids, x_star.tolist()))
