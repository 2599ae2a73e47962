"""Causative poisoning of the aggregator's learner.

The attacker controls the curtailments reported (and delivered) by a set of
compromised customers.  Online, those values are injected event by event
while the aggregator keeps learning by OGD and pricing by its closed-form
incentive; offline, the stored history is rewritten before a batch refit.
Either way the attacker picks the fake curtailments to steer the learned
aggregate response towards a target while keeping the delivered aggregate
within a tolerance of the commitment.

The planner unrolls the closed loop and runs projected gradient descent on
the fake curtailments.  Gradients come from central differences; every
perturbed rollout is evaluated in one vectorised batch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .incentive import broadcast_incentive
from .learner import CustomerHistory, LearnerState, batch_ols
from .model import BetaParams
from .scenario import Scenario
from .valuation import rank_customers

log = logging.getLogger(__name__)

_BATCH = 4096


@dataclass(frozen=True)
class AttackSpec:
    compromised_ids: frozenset
    horizon: tuple
    target_beta: BetaParams
    delta: tuple
    mode: str = "online"

    def __post_init__(self):
        object.__setattr__(self, "compromised_ids", frozenset(self.compromised_ids))
        object.__setattr__(self, "horizon", tuple(int(h) for h in self.horizon))
        delta = np.broadcast_to(np.asarray(self.delta, dtype=float), (len(self.horizon),))
        object.__setattr__(self, "delta", tuple(float(d) for d in delta))
        if not self.horizon:
            raise InvalidInputError("attack horizon must be nonempty")
        if any(d < 0 for d in self.delta):
            raise InvalidParameterError("delta must be >= 0")
        if self.mode not in ("online", "offline"):
            raise InvalidParameterError(f"mode must be 'online' or 'offline', got {self.mode!r}")


@dataclass(frozen=True)
class AttackOptions:
    max_iters: int = 5000
    tol: float = 1e-8
    penalty_mu: float = 10.0
    plan_margin: float = 0.8
    path_weight: float = 0.0
    fd_rel_step: float = 1e-4
    success_tol: float = 0.01

    @classmethod
    def from_config(cls, cfg: Mapping) -> "AttackOptions":
        return cls(**{k: cfg[k] for k in cls.__dataclass_fields__ if k in cfg})


@dataclass
class AttackPlan:
    spec: AttackSpec
    learner_init: LearnerState
    fake_curtailments: dict
    objective_trajectory: list
    deviation_trajectory: list
    converged: bool
    residual: float
    infeasible: bool = False
    iterations: int = 0
    planned_lambdas: np.ndarray = field(default_factory=lambda: np.zeros(0))
    planned_aggregate: np.ndarray = field(default_factory=lambda: np.zeros(0))
    planned_terminal: BetaParams | None = None

    def fake_matrix(self, ids: Sequence[str]) -> np.ndarray:
        """Fake curtailments as ``(len(horizon), len(ids))``."""
        return np.array([[self.fake_curtailments[(t, c)] for c in ids] for t in self.spec.horizon])


@dataclass
class AttackTrace:
    events: np.ndarray
    commitments: np.ndarray
    delta: np.ndarray
    lambda_benign: np.ndarray
    lambda_attacked: np.ndarray
    aggregate_benign: np.ndarray
    aggregate_attacked: np.ndarray
    estimates_benign: np.ndarray
    estimates_attacked: np.ndarray
    monetary_delta: float

    def __len__(self):
        return len(self.events)


# -- public-data estimate and target ---------------------------------------------


def estimate_aggregate_behavior(aggregate_history) -> BetaParams:
    """Fit the aggregate response on the public ``(lambda, X_total)`` series."""
    if not isinstance(aggregate_history, CustomerHistory):
        aggregate_history = CustomerHistory(aggregate_history)
    return batch_ols(aggregate_history)


def monetary_target(aggregate: BetaParams, beta1_factor: float = 0.95, beta0_factor: float = 1.0) -> BetaParams:
    """Target that makes DR look less price-sensitive, hence more expensive."""
    return BetaParams(aggregate.beta1 * beta1_factor, aggregate.beta0 * beta0_factor)


def select_compromised(scenario: Scenario, fraction: float, learner: LearnerState | None = None,
                       how: str = "value", seed: int | None = None) -> list:
    """Pick ``round(fraction * N)`` customers, by aggregate-loss value or at random."""
    if not 0 <= fraction <= 1:
        raise InvalidParameterError(f"fraction must lie in [0, 1], got {fraction}")
    k = int(round(fraction * scenario.n))
    if how == "random":
        rng = np.random.default_rng(seed)
        return sorted(rng.choice(scenario.ids, size=k, replace=False).tolist())
    if how != "value":
        raise InvalidParameterError(f"unknown selection {how!r}")
    learner = learner or scenario.initial_learner()
    agg_hist = scenario.aggregate_history()
    report = rank_customers(learner.estimates, agg_hist, estimate_aggregate_behavior(agg_hist))
    return sorted(report.ranking()[:k])


def default_delta(commitments, frac: float = 0.05) -> np.ndarray:
    return frac * np.asarray(commitments, dtype=float)


def build_spec(scenario: Scenario, compromised_ids, target: BetaParams, mode: str = "online",
               horizon: int | None = None, delta_frac: float = 0.05) -> AttackSpec:
    """Convenience constructor covering the scenario's future events (online) or its history (offline)."""
    if mode == "offline":
        ordinals = [r.event_index for r in scenario.history]
        d = default_delta(scenario.history_commitments, delta_frac)
    else:
        ordinals = scenario.future_ordinals()
        d = default_delta(scenario.future_commitments, delta_frac)
        if horizon is not None:
            if horizon > len(ordinals):
                raise InvalidParameterError(f"horizon {horizon} exceeds the {len(ordinals)} scheduled events")
            ordinals, d = ordinals[:horizon], d[:horizon]
    return AttackSpec(frozenset(compromised_ids), tuple(ordinals), target, tuple(d), mode)


# -- closed-loop model ------------------------------------------------------------


@dataclass
class _Loop:
    """Arrays describing one closed-loop problem; customers ordered as the scenario."""

    b1_init: np.ndarray
    b0_init: np.ndarray
    true_b1: np.ndarray
    true_b0: np.ndarray
    x_max: np.ndarray
    commitments: np.ndarray
    comp: np.ndarray
    eta: float
    kappa: float
    gamma: float

    @classmethod
    def build(cls, scenario: Scenario, spec: AttackSpec, learner: LearnerState):
        ids = scenario.ids
        unknown = spec.compromised_ids - set(ids)
        if unknown:
            raise InvalidInputError(f"compromised customers not in scenario: {sorted(unknown)}")
        future = scenario.future_ordinals()
        pos = {o: k for k, o in enumerate(future)}
        missing = [h for h in spec.horizon if h not in pos]
        if missing:
            raise InvalidInputError(f"online horizon events {missing} have no scheduled commitment")
        b1, b0 = learner.as_arrays(ids)
        tb1, tb0, xmax, _ = scenario.true_arrays()
        return cls(
            b1_init=b1, b0_init=b0, true_b1=tb1, true_b0=tb0, x_max=xmax,
            commitments=np.array([scenario.future_commitments[pos[h]] for h in spec.horizon]),
            comp=np.array([i for i, c in enumerate(ids) if c in spec.compromised_ids], dtype=int),
            eta=learner.eta, kappa=scenario.aggregator.kappa, gamma=scenario.aggregator.gamma,
        )

    @property
    def horizon(self) -> int:
        return len(self.commitments)


def _rollout(loop: _Loop, fake=None, noise=None, record=False):
    """Run the learning/pricing loop for a batch of fake-curtailment schedules.

    ``fake`` has shape ``(B, H, n_comp)`` (or ``None`` for the honest loop),
    ``noise`` shape ``(H, N)``.  Returns terminal aggregate estimates
    ``(s, b)`` each ``(B,)``, delivered aggregates ``(B, H)`` and, with
    ``record``, the per-event prices and aggregate estimates.
    """
    bsz = 1 if fake is None else fake.shape[0]
    n = loop.b1_init.size
    b1 = np.tile(loop.b1_init, (bsz, 1))
    b0 = np.tile(loop.b0_init, (bsz, 1))
    delivered = np.empty((bsz, loop.horizon))
    lams = np.empty((bsz, loop.horizon)) if record else None
    path = np.empty((bsz, loop.horizon + 1, 2))
    for k in range(loop.horizon):
        s = b1.sum(axis=1)
        b = b0.sum(axis=1)
        path[:, k, 0], path[:, k, 1] = b, s
        lam = broadcast_incentive(s, b, loop.commitments[k], loop.kappa, loop.gamma)
        x = loop.true_b1 * lam[:, None] + loop.true_b0
        if noise is not None:
            x = x + noise[k]
        x = np.clip(x, 0.0, loop.x_max)
        if fake is not None and loop.comp.size:
            x[:, loop.comp] = fake[:, k, :]
        delivered[:, k] = x.sum(axis=1)
        resid = b0 + b1 * lam[:, None] - x
        b0 -= loop.eta * resid
        b1 -= loop.eta * resid * lam[:, None]
        if record:
            lams[:, k] = lam
    path[:, -1, 0], path[:, -1, 1] = b0.sum(axis=1), b1.sum(axis=1)
    return path, delivered, lams


# -- solver -----------------------------------------------------------------------


def _projected_gradient(objective, x0, upper, opts: AttackOptions, step, monitor=None):
    """Monotone projected gradient with Barzilai-Borwein steps and Armijo backtracking.

    ``objective`` maps a batch ``(B, n)`` to ``(B,)``.  Returns the final point,
    the accepted objective values, ``monitor`` evaluated at every accepted
    point, and the iteration count.
    """
    n = x0.size
    x = np.clip(x0, 0.0, upper)
    f = float(objective(x[None])[0])
    traj = [f]
    watch = [monitor(x)] if monitor else []
    if n == 0:
        return x, traj, watch, 0

    def grad(z):
        out = np.empty(n)
        eye_step = step
        for lo in range(0, n, _BATCH // 2):
            hi = min(n, lo + _BATCH // 2)
            m = hi - lo
            pert = np.tile(z, (2 * m, 1))
            idx = np.arange(m)
            pert[idx, lo + idx] += eye_step[lo:hi]
            pert[m + idx, lo + idx] -= eye_step[lo:hi]
            vals = objective(pert)
            out[lo:hi] = (vals[:m] - vals[m:]) / (2 * eye_step[lo:hi])
        return out

    g = grad(x)
    alpha = 1.0 / max(np.abs(g).max(), 1e-12)
    it = 0
    for it in range(1, opts.max_iters + 1):
        accepted = False
        while alpha > 1e-14:
            x_new = np.clip(x - alpha * g, 0.0, upper)
            d = x_new - x
            if not np.any(d):
                break
            f_new = float(objective(x_new[None])[0])
            if f_new <= f + 1e-4 * float(g @ d):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        traj.append(f_new)
        if monitor:
            watch.append(monitor(x_new))
        change = f - f_new
        x, f = x_new, f_new
        if change < opts.tol:
            break
        g_new = grad(x)
        y = g_new - g
        sy = float(d @ y)
        alpha = float(d @ d) / sy if sy > 1e-16 else alpha * 2.0
        g = g_new
    return x, traj, watch, it


def _deviation(path_end, target: BetaParams):
    return np.hypot(path_end[..., 0] - target.beta0, path_end[..., 1] - target.beta1)


def _penalty(delivered, commitments, band, mu):
    excess = np.maximum(np.abs(commitments - delivered) - band, 0.0)
    return mu * np.sum(excess**2, axis=-1)


def plan_attack(scenario: Scenario, spec: AttackSpec, learner_init: LearnerState | None = None,
                options: AttackOptions | None = None) -> AttackPlan:
    """Optimise the fake curtailments of the compromised customers."""
    opts = options or AttackOptions()
    learner_init = learner_init or scenario.initial_learner()
    if spec.mode == "offline":
        return _plan_offline(scenario, spec, learner_init, opts)

    loop = _Loop.build(scenario, spec, learner_init)
    ids = scenario.ids
    comp_ids = [ids[i] for i in loop.comp]
    nc = loop.comp.size
    delta = np.array(spec.delta)
    band = opts.plan_margin * delta
    target = spec.target_beta

    # honest expected loop: the baseline the fake schedule starts from
    _, delivered0, lams0 = _rollout(loop, record=True)
    base = np.clip(loop.true_b1 * lams0[0][:, None] + loop.true_b0, 0.0, loop.x_max)
    x0 = base[:, loop.comp].reshape(-1)

    benign_only = delivered0[0] - base[:, loop.comp].sum(axis=1)
    cap = loop.x_max[loop.comp].sum()
    infeasible = bool(np.any((benign_only > loop.commitments + delta) |
                             (benign_only + cap < loop.commitments - delta)))

    upper = np.tile(loop.x_max[loop.comp], loop.horizon)
    h = loop.horizon

    def objective(batch):
        fake = batch.reshape(batch.shape[0], h, nc)
        path, delivered, _ = _rollout(loop, fake)
        val = _deviation(path[:, -1], target)
        if opts.path_weight:
            val = val + opts.path_weight * _deviation(path[:, 1:], target).mean(axis=1)
        return val + _penalty(delivered, loop.commitments, band, opts.penalty_mu)

    def terminal_deviation(z):
        path, _, _ = _rollout(loop, z.reshape(1, h, nc) if nc else None)
        return float(_deviation(path[0, -1], target))

    step = opts.fd_rel_step * upper
    x_opt, traj, dev_traj, iters = _projected_gradient(objective, x0, upper, opts, step, terminal_deviation)

    fake = x_opt.reshape(1, h, nc) if nc else None
    path, delivered, lams = _rollout(loop, fake, record=True)
    residual = float(_deviation(path[0, -1], target))
    terminal = BetaParams(float(path[0, -1, 1]), float(path[0, -1, 0]))
    fake_map = {(t, c): float(x_opt.reshape(h, nc)[k, j])
                for k, t in enumerate(spec.horizon) for j, c in enumerate(comp_ids)}
    norm = float(np.hypot(target.beta0, target.beta1))
    log.info("online attack: %d iterations, residual %.4g (%.3g%% of target)", iters, residual,
             100 * residual / max(norm, 1e-300))
    return AttackPlan(
        spec=spec,
        learner_init=learner_init,
        fake_curtailments=fake_map,
        objective_trajectory=traj,
        deviation_trajectory=dev_traj,
        converged=residual <= opts.success_tol * norm,
        residual=residual,
        infeasible=infeasible,
        iterations=iters,
        planned_lambdas=lams[0],
        planned_aggregate=delivered[0],
        planned_terminal=terminal,
    )


def _plan_offline(scenario: Scenario, spec: AttackSpec, learner_init: LearnerState, opts: AttackOptions):
    hist_ordinals = [r.event_index for r in scenario.history]
    if list(spec.horizon) != hist_ordinals:
        raise InvalidInputError("offline attacks rewrite the whole history: horizon must equal it")
    ids = scenario.ids
    comp = np.array([i for i, c in enumerate(ids) if c in spec.compromised_ids], dtype=int)
    comp_ids = [ids[i] for i in comp]
    lam = scenario.history_lambdas()
    x_hist = scenario.curtailment_matrix()
    commitments = np.asarray(scenario.history_commitments, dtype=float)
    delta = np.array(spec.delta)
    band = opts.plan_margin * delta
    target = spec.target_beta
    _, _, xmax, _ = scenario.true_arrays()
    t, nc = lam.size, comp.size

    benign_sum = x_hist.sum(axis=1) - x_hist[:, comp].sum(axis=1)
    lam_c = lam - lam.mean()
    var = np.mean(lam_c**2)

    def agg_fit(fake):
        # OLS is linear in the responses, so the summed fit is the fit of the summed series
        total = benign_sum + fake.sum(axis=-1)
        if var < 1e-12:
            return np.zeros(total.shape[:-1]), total.mean(axis=-1)
        s = (total - total.mean(axis=-1, keepdims=True)) @ lam_c / (t * var)
        return s, total.mean(axis=-1) - s * lam.mean()

    def objective(batch):
        fake = batch.reshape(batch.shape[0], t, nc)
        s, b = agg_fit(fake)
        total = benign_sum + fake.sum(axis=-1)
        return np.hypot(b - target.beta0, s - target.beta1) + _penalty(total, commitments, band, opts.penalty_mu)

    upper = np.tile(xmax[comp], t)
    x0 = x_hist[:, comp].reshape(-1)
    cap = xmax[comp].sum()
    infeasible = bool(np.any((benign_sum > commitments + delta) | (benign_sum + cap < commitments - delta)))
    def terminal_deviation(z):
        s, b = agg_fit(z.reshape(1, t, nc))
        return float(np.hypot(b[0] - target.beta0, s[0] - target.beta1))

    x_opt, traj, dev_traj, iters = _projected_gradient(objective, x0, upper, opts, opts.fd_rel_step * upper,
                                                       terminal_deviation)

    fake = x_opt.reshape(t, nc)
    s, b = agg_fit(fake[None])
    residual = float(np.hypot(b[0] - target.beta0, s[0] - target.beta1))
    norm = float(np.hypot(target.beta0, target.beta1))
    return AttackPlan(
        spec=spec,
        learner_init=learner_init,
        fake_curtailments={(o, c): float(fake[k, j]) for k, o in enumerate(spec.horizon) for j, c in enumerate(comp_ids)},
        objective_trajectory=traj,
        deviation_trajectory=dev_traj,
        converged=residual <= opts.success_tol * norm,
        residual=residual,
        infeasible=infeasible,
        iterations=iters,
        planned_lambdas=lam.copy(),
        planned_aggregate=benign_sum + fake.sum(axis=1),
        planned_terminal=BetaParams(float(s[0]), float(b[0])),
    )


def apply_offline(scenario: Scenario, plan: AttackPlan) -> list:
    """History with the compromised rows rewritten."""
    out = []
    for rec in scenario.history:
        cur = dict(rec.curtailments)
        for cid in plan.spec.compromised_ids:
            cur[cid] = plan.fake_curtailments[(rec.event_index, cid)]
        out.append(type(rec)(rec.event_index, rec.lam, cur))
    return out


# -- execution --------------------------------------------------------------------


def simulate_attack(plan: AttackPlan, scenario: Scenario, seed: int | None = 0) -> AttackTrace:
    """Roll the loop out with noisy benign responses, with and without the fake schedule.

    Both rollouts share the same noise draws, so the difference is the attack alone.
    """
    spec = plan.spec
    if spec.mode == "offline":
        return _simulate_offline(plan, scenario)
    loop = _Loop.build(scenario, spec, plan.learner_init)
    ids = scenario.ids
    _, _, _, sigma = scenario.true_arrays()
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((loop.horizon, len(ids))) * sigma

    comp_ids = [ids[i] for i in loop.comp]
    fake = plan.fake_matrix(comp_ids)[None] if loop.comp.size else None
    path_b, deliv_b, lam_b = _rollout(loop, None, noise, record=True)
    path_a, deliv_a, lam_a = _rollout(loop, fake, noise, record=True)
    delta_money = float(np.sum(lam_a[0] * deliv_a[0] - lam_b[0] * deliv_b[0]))
    return AttackTrace(
        events=np.array(spec.horizon),
        commitments=loop.commitments.copy(),
        delta=np.array(spec.delta),
        lambda_benign=lam_b[0],
        lambda_attacked=lam_a[0],
        aggregate_benign=deliv_b[0],
        aggregate_attacked=deliv_a[0],
        estimates_benign=path_b[0, 1:],
        estimates_attacked=path_a[0, 1:],
        monetary_delta=delta_money,
    )


def _simulate_offline(plan: AttackPlan, scenario: Scenario) -> AttackTrace:
    hist = scenario.history
    poisoned = apply_offline(scenario, plan)
    lam = np.array([r.lam for r in hist])
    xb = np.array([r.total for r in hist])
    xa = np.array([r.total for r in poisoned])
    est_b = np.empty((len(hist), 2))
    est_a = np.empty((len(hist), 2))
    for k in range(len(hist)):
        fb = batch_ols(CustomerHistory.aggregate(hist[: k + 1]))
        fa = batch_ols(CustomerHistory.aggregate(poisoned[: k + 1]))
        est_b[k] = fb.beta0, fb.beta1
        est_a[k] = fa.beta0, fa.beta1
    return AttackTrace(
        events=np.array(plan.spec.horizon),
        commitments=np.asarray(scenario.history_commitments, dtype=float).copy(),
        delta=np.array(plan.spec.delta),
        lambda_benign=lam,
        lambda_attacked=lam.copy(),
        aggregate_benign=xb,
        aggregate_attacked=xa,
        estimates_benign=est_b,
        estimates_attacked=est_a,
        monetary_delta=float(np.sum(lam * xa - lam * xb)),
    )


def monetary_impact(trace: AttackTrace) -> dict:
    per_event = trace.lambda_attacked * trace.aggregate_attacked - trace.lambda_benign * trace.aggregate_benign
    return {
        "benign_payout": float(np.sum(trace.lambda_benign * trace.aggregate_benign)),
        "attacked_payout": float(np.sum(trace.lambda_attacked * trace.aggregate_attacked)),
        "total_delta": float(np.sum(per_event)),
        "per_event_delta": per_event,
    }
