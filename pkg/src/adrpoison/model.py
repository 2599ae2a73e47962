"""Customer behavioural model.

A DR customer trades a quadratic utility of its curtailment against the
reward ``lambda * x``.  The minimiser is linear in the incentive, so every
customer is summarised by a slope/intercept pair (``BetaParams``).  The
realised curtailment adds Gaussian noise and is clipped to the physical
range ``[0, x_max]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import InvalidInputError, InvalidParameterError

DEFAULT_NOISE_SIGMA = 0.5
DEFAULT_X_MAX = 50.0


@dataclass(frozen=True)
class AlphaParams:
    """Utility coefficients: ``U(x) = alpha1 * x**2 / 2 + alpha0 * x``."""

    alpha1: float
    alpha0: float

    def __post_init__(self):
        if not self.alpha1 > 0:
            raise InvalidParameterError(f"alpha1 must be > 0, got {self.alpha1}")


@dataclass(frozen=True)
class BetaParams:
    """Linear price response ``x = beta1 * lambda + beta0`` (kW)."""

    beta1: float
    beta0: float

    def as_array(self) -> np.ndarray:
        """Return ``[beta0, beta1]``, the ordering used by the OGD update."""
        return np.array([self.beta0, self.beta1], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "BetaParams":
        return cls(beta1=float(arr[1]), beta0=float(arr[0]))

    def __add__(self, other: "BetaParams") -> "BetaParams":
        return BetaParams(self.beta1 + other.beta1, self.beta0 + other.beta0)

    def scaled(self, factor: float) -> "BetaParams":
        return BetaParams(self.beta1 * factor, self.beta0 * factor)


@dataclass(frozen=True)
class CustomerTruth:
    id: str
    beta: BetaParams
    x_max: float = DEFAULT_X_MAX
    noise_sigma: float = DEFAULT_NOISE_SIGMA

    def __post_init__(self):
        if not self.x_max > 0:
            raise InvalidParameterError(f"x_max must be > 0, got {self.x_max}")
        if not self.noise_sigma >= 0:
            raise InvalidParameterError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True)
class DREventRecord:
    """One DR event: the broadcast incentive and every customer's curtailment."""

    event_index: int
    lam: float
    curtailments: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.lam >= 0:
            raise InvalidInputError(f"event {self.event_index}: incentive must be >= 0, got {self.lam}")
        for cid, x in self.curtailments.items():
            if not x >= 0:
                raise InvalidInputError(
                    f"event {self.event_index}: curtailment of {cid} must be >= 0, got {x}"
                )

    @property
    def total(self) -> float:
        return float(sum(self.curtailments.values()))


def alpha_to_beta(alpha: AlphaParams) -> BetaParams:
    if not alpha.alpha1 > 0:
        raise InvalidParameterError(f"alpha1 must be > 0, got {alpha.alpha1}")
    return BetaParams(beta1=1.0 / alpha.alpha1, beta0=-alpha.alpha0 / alpha.alpha1)


def beta_to_alpha(beta: BetaParams) -> AlphaParams:
    if not beta.beta1 > 0:
        raise InvalidParameterError(f"beta1 must be > 0 to invert, got {beta.beta1}")
    return AlphaParams(alpha1=1.0 / beta.beta1, alpha0=-beta.beta0 / beta.beta1)


def customer_utility(alpha: AlphaParams, x):
    """Quadratic (dis)satisfaction of curtailing ``x`` kW."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * alpha.alpha1 * x**2 + alpha.alpha0 * x
    return float(out) if out.ndim == 0 else out


def optimal_response(beta: BetaParams, lam: float, x_max: float | None = None) -> float:
    """Curtailment minimising ``U(x) - lam * x``; clipped to ``[0, x_max]`` when a capacity is given."""
    if not lam >= 0:
        raise InvalidParameterError(f"incentive must be >= 0, got {lam}")
    x = beta.beta1 * lam + beta.beta0
    if x_max is not None:
        x = min(max(x, 0.0), x_max)
    return float(x)


def realized_response(truth: CustomerTruth, lam: float, rng: np.random.Generator) -> float:
    x = optimal_response(truth.beta, lam)
    if truth.noise_sigma > 0:
        x += rng.normal(0.0, truth.noise_sigma)
    return float(min(max(x, 0.0), truth.x_max))


def responses(beta1, beta0, lam, x_max=None, noise=None):
    """Vectorised responses for arrays of customers (broadcasts over leading axes)."""
    x = np.asarray(beta1) * np.asarray(lam)[..., None] + np.asarray(beta0)
    if noise is not None:
        x = x + noise
    if x_max is not None:
        x = np.clip(x, 0.0, x_max)
    return x
