"""Exploration stage: estimate customer price responses from DR history.

Two estimators are provided.  ``batch_ols`` is the closed-form least-squares
fit on the whole history; ``ogd_step`` is the streaming gradient update the
aggregator applies after every event.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .model import BetaParams, DREventRecord

DEGENERATE_VAR_TOL = 1e-12
DEFAULT_ETA = 0.01


@dataclass(frozen=True)
class CustomerHistory:
    """Ordered ``(lambda, x)`` pairs observed for one customer."""

    pairs: tuple

    def __init__(self, pairs: Iterable[Sequence[float]]):
        object.__setattr__(self, "pairs", tuple((float(l), float(x)) for l, x in pairs))

    def __len__(self):
        return len(self.pairs)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs], dtype=float)

    @property
    def curtailments(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=float)

    def subset(self, indices) -> "CustomerHistory":
        return CustomerHistory(self.pairs[i] for i in indices)

    @classmethod
    def from_records(cls, records: Sequence[DREventRecord], customer_id: str) -> "CustomerHistory":
        return cls((r.lam, r.curtailments[customer_id]) for r in records if customer_id in r.curtailments)

    @classmethod
    def aggregate(cls, records: Sequence[DREventRecord]) -> "CustomerHistory":
        """Public aggregate series ``(lambda_t, X_t)``."""
        return cls((r.lam, r.total) for r in records)


@dataclass
class LearnerState:
    estimates: dict
    eta: float = DEFAULT_ETA
    events_seen: int = 0

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidParameterError(f"learning rate must be > 0, got {self.eta}")

    def aggregate(self) -> BetaParams:
        b1 = sum(b.beta1 for b in self.estimates.values())
        b0 = sum(b.beta0 for b in self.estimates.values())
        return BetaParams(b1, b0)

    def update(self, lam: float, curtailments: Mapping[str, float]) -> "LearnerState":
        """Apply one OGD step to every customer present in ``curtailments``."""
        new = dict(self.estimates)
        for cid, x in curtailments.items():
            new[cid] = ogd_step(new[cid], lam, x, self.eta)
        return LearnerState(new, self.eta, self.events_seen + 1)

    def as_arrays(self, ids: Sequence[str]):
        """``(beta1, beta0)`` arrays in the order of ``ids``."""
        b1 = np.array([self.estimates[i].beta1 for i in ids], dtype=float)
        b0 = np.array([self.estimates[i].beta0 for i in ids], dtype=float)
        return b1, b0

    @classmethod
    def fit(cls, records: Sequence[DREventRecord], ids: Sequence[str], eta: float = DEFAULT_ETA):
        """Initialise every customer estimate by batch OLS on ``records``."""
        est = {cid: batch_ols(CustomerHistory.from_records(records, cid)) for cid in ids}
        return cls(est, eta, 0)


def _check_nonempty(history: CustomerHistory):
    if len(history) == 0:
        raise InvalidInputError("history must contain at least one event")


def empirical_loss(history: CustomerHistory, beta: BetaParams) -> float:
    """Half mean squared residual of ``beta`` on ``history`` (kW^2)."""
    _check_nonempty(history)
    resid = history.curtailments - beta.beta1 * history.lambdas - beta.beta0
    return float(0.5 * np.mean(resid**2))


def batch_ols(history: CustomerHistory) -> BetaParams:
    """Closed-form least squares; falls back to a flat mean for degenerate designs."""
    _check_nonempty(history)
    lam = history.lambdas
    x = history.curtailments
    lam_bar = lam.mean()
    x_bar = x.mean()
    var = np.mean((lam - lam_bar) ** 2)
    if var < DEGENERATE_VAR_TOL:
        return BetaParams(0.0, float(x_bar))
    beta1 = np.mean((lam - lam_bar) * (x - x_bar)) / var
    return BetaParams(float(beta1), float(x_bar - beta1 * lam_bar))


def ogd_step(state_beta: BetaParams, lam: float, x: float, eta: float) -> BetaParams:
    """One gradient step on the squared residual; both coefficients move."""
    if not eta > 0:
        raise InvalidParameterError(f"learning rate must be > 0, got {eta}")
    if not lam >= 0:
        raise InvalidParameterError(f"incentive must be >= 0, got {lam}")
    resid = state_beta.beta0 + state_beta.beta1 * lam - x
    return BetaParams(
        beta1=state_beta.beta1 - eta * resid * lam,
        beta0=state_beta.beta0 - eta * resid,
    )


def ogd_fit(history: CustomerHistory, eta: float, init: BetaParams | None = None, passes: int = 1) -> BetaParams:
    """Stream ``history`` through ``ogd_step`` ``passes`` times."""
    beta = init if init is not None else BetaParams(0.0, 0.0)
    for _ in range(passes):
        for lam, x in history.pairs:
            beta = ogd_step(beta, lam, x, eta)
    return beta
