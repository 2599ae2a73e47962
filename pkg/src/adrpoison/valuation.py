"""Data valuation of DR events and DR customers.

Events are scored with a permutation Shapley estimate whose gain function is
``U(S) = L(H, beta_H) / L(H, beta_S)``: the full-history loss of the full fit
over the full-history loss of the fit on ``S``.  As in the original
Monte-Carlo procedure, an event that opens a permutation contributes zero, so
the values are not efficient in the classical sense.

Customers are scored by a loss ratio on the public aggregate series.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError, SizeLimitError
from .learner import DEGENERATE_VAR_TOL, CustomerHistory, batch_ols, empirical_loss
from .model import BetaParams

U_CAP = 1e6
LOSS_FLOOR = 1e-12
EXACT_MAX_EVENTS = 8
_CHUNK = 512


@dataclass
class EventValueReport:
    values: dict
    permutations_used: int
    convergence_trace: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    trace_counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    capped: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([self.values[k] for k in sorted(self.values)])

    def ranking(self) -> list:
        """Event positions sorted from most to least valuable (stable on ties)."""
        keys = sorted(self.values)
        return sorted(keys, key=lambda k: -self.values[k])


@dataclass
class CustomerValueReport:
    values: dict
    capped: tuple = ()

    def ranking(self) -> list:
        return sorted(self.values, key=lambda k: (-self.values[k], k))


def _gain(full_loss: float, subset_loss: float) -> tuple[float, bool]:
    if subset_loss < LOSS_FLOOR:
        return U_CAP, True
    return full_loss / subset_loss, False


# -- Monte-Carlo path: all prefix fits of a batch of permutations at once ----------


def _prefix_gains(lam, x, perms, full_loss):
    """Gain of every prefix (length 1..T) of each permutation, shape ``(B, T)``."""
    lp = lam[perms]
    xp = x[perms]
    counts = np.arange(1, lam.size + 1, dtype=float)
    lam_mean = np.cumsum(lp, axis=1) / counts
    x_mean = np.cumsum(xp, axis=1) / counts
    # centred second moments via the one-pass update so prefix fits agree with batch_ols
    d_lam = lp - lam_mean
    d_x = xp - x_mean
    prev_lam = np.concatenate([np.zeros_like(lam_mean[:, :1]), lam_mean[:, :-1]], axis=1)
    prev_x = np.concatenate([np.zeros_like(x_mean[:, :1]), x_mean[:, :-1]], axis=1)
    s_ll = np.cumsum((lp - prev_lam) * d_lam, axis=1)
    s_lx = np.cumsum((lp - prev_lam) * d_x, axis=1)
    var = s_ll / counts
    degenerate = var < DEGENERATE_VAR_TOL
    slope = np.where(degenerate, 0.0, s_lx / np.where(degenerate, 1.0, s_ll))
    intercept = x_mean - slope * lam_mean
    resid = x[None, None, :] - slope[..., None] * lam[None, None, :] - intercept[..., None]
    loss = 0.5 * np.mean(resid**2, axis=2)
    small = loss < LOSS_FLOOR
    gains = np.where(small, U_CAP, full_loss / np.where(small, 1.0, loss))
    return gains, bool(small.any())


def shapley_events_mc(history: CustomerHistory, m_permutations: int, seed: int | None = 0,
                      trace_points: int = 100) -> EventValueReport:
    """Monte-Carlo permutation estimate of every event's value."""
    if m_permutations < 1:
        raise InvalidParameterError("at least one permutation is required")
    if len(history) == 0:
        raise InvalidInputError("history must contain at least one event")
    lam = history.lambdas
    x = history.curtailments
    t = lam.size
    full_loss = empirical_loss(history, batch_ols(history))
    rng = np.random.default_rng(seed)

    totals = np.zeros(t)
    capped = False
    every = max(1, m_permutations // trace_points)
    trace, counts = [], []
    done = 0
    while done < m_permutations:
        b = min(_CHUNK, m_permutations - done)
        perms = rng.permuted(np.tile(np.arange(t), (b, 1)), axis=1)
        gains, hit = _prefix_gains(lam, x, perms, full_loss)
        capped |= hit
        marg = np.zeros_like(gains)
        marg[:, 1:] = gains[:, 1:] - gains[:, :-1]
        contrib = np.zeros((b, t))
        np.put_along_axis(contrib, perms, marg, axis=1)
        # running totals in fixed order so the trace is reproducible
        cum = totals + np.cumsum(contrib, axis=0)
        for j in range(b):
            n_done = done + j + 1
            if n_done % every == 0 or n_done == m_permutations:
                trace.append(cum[j] / n_done)
                counts.append(n_done)
        totals = cum[-1]
        done += b

    phi = totals / m_permutations
    return EventValueReport(
        values={k: float(phi[k]) for k in range(t)},
        permutations_used=m_permutations,
        convergence_trace=np.array(trace),
        trace_counts=np.array(counts, dtype=int),
        capped=capped,
    )


# -- Exact path: explicit enumeration with per-subset fits -------------------------


def shapley_events_exact(history: CustomerHistory) -> EventValueReport:
    """Average the marginal gains over all ``T!`` orderings (``T <= 8``)."""
    t = len(history)
    if t == 0:
        raise InvalidInputError("history must contain at least one event")
    if t > EXACT_MAX_EVENTS:
        raise SizeLimitError(f"exact enumeration limited to {EXACT_MAX_EVENTS} events, got {t}")
    full_loss = empirical_loss(history, batch_ols(history))
    cache: dict = {}
    capped = False

    def gain(subset: frozenset) -> float:
        nonlocal capped
        if subset not in cache:
            beta = batch_ols(history.subset(sorted(subset)))
            cache[subset], hit = _gain(full_loss, empirical_loss(history, beta))
            capped |= hit
        return cache[subset]

    totals = np.zeros(t)
    n_perm = 0
    for perm in itertools.permutations(range(t)):
        n_perm += 1
        for pos in range(1, t):
            before = frozenset(perm[:pos])
            totals[perm[pos]] += gain(before | {perm[pos]}) - gain(before)
    phi = totals / n_perm
    return EventValueReport(
        values={k: float(phi[k]) for k in range(t)},
        permutations_used=n_perm,
        convergence_trace=phi[None, :].copy(),
        trace_counts=np.array([n_perm]),
        capped=capped,
    )


def top_k_loss_curve(history: CustomerHistory, values: EventValueReport, fractions: Sequence[float]) -> dict:
    """Relative full-history loss when refitting on the top-valued fraction of events."""
    t = len(history)
    full = empirical_loss(history, batch_ols(history))
    ranking = values.ranking()
    curve = {}
    for frac in fractions:
        if not 0 < frac <= 1:
            raise InvalidInputError(f"fraction must lie in (0, 1], got {frac}")
        k = int(math.floor(frac * t + 1e-9))
        if k < 1:
            raise InvalidInputError(f"fraction {frac} keeps no events out of {t}")
        loss = empirical_loss(history, batch_ols(history.subset(sorted(ranking[:k]))))
        if full < LOSS_FLOOR:
            curve[frac] = 1.0 if loss < LOSS_FLOOR else math.inf
        else:
            curve[frac] = loss / full
    return curve


def rank_customers(per_customer_betas: Mapping[str, BetaParams], aggregate_history: CustomerHistory,
                   aggregate_beta: BetaParams) -> CustomerValueReport:
    """Loss ratio of the aggregate fit to each individual fit on the per-customer-normalised series."""
    if len(aggregate_history) == 0:
        raise InvalidInputError("aggregate history must be nonempty")
    n = len(per_customer_betas)
    if n == 0:
        raise InvalidInputError("at least one customer is required")
    normalised = CustomerHistory(zip(aggregate_history.lambdas, aggregate_history.curtailments / n))
    agg_loss = empirical_loss(normalised, aggregate_beta.scaled(1.0 / n))
    values, capped = {}, []
    for cid, beta in per_customer_betas.items():
        loss = empirical_loss(normalised, beta)
        if loss < LOSS_FLOOR:
            values[cid] = U_CAP if agg_loss >= LOSS_FLOOR else 1.0
            capped.append(cid)
        else:
            values[cid] = agg_loss / loss
    return CustomerValueReport(values, tuple(capped))
