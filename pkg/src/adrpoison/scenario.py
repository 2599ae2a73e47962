"""Scenario configuration, synthetic data generation and flat-file I/O.

The synthetic recipe follows the published case-study ranges: per-customer
curtailments between 5 and 50 kW for incentives between 1 and 2 $/kWh, 50
customers, 20 historical events.  Commitments for future events are drawn so
that the benign incentive also lands in the incentive range.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, HistoryParseError, OrderingError, ReferentialError
from .incentive import AggregatorParams
from .learner import CustomerHistory, LearnerState, batch_ols
from .model import BetaParams, CustomerTruth, DREventRecord

DEFAULT_SEED = 0

# learning rate and path-averaged attack objective used for the case-study replication
CASE_STUDY_PRESET = {
    "learner": {"eta": 0.05},
    "attack": {"path_weight": 1.0},
}

DEFAULT_CONFIG = {
    "customers": {
        "n": 50,
        "beta1_range": [2.0, 20.0],
        "curtailment_range": [5.0, 50.0],
        "x_max": 50.0,
        "noise_sigma": 0.5,
        "noise_margin": 3.0,
    },
    "events": {
        "n_history": 20,
        "lambda_range": [1.0, 2.0],
        "n_future": 65,
    },
    "aggregator": {
        "kappa": 1.0,
        "gamma": 0.0,
    },
    "learner": {
        "eta": 0.01,
        "init": "ols",
    },
    "attack": {
        "mode": "online",
        "compromised_frac": 0.3,
        "horizon": 65,
        "target_beta1_factor": 0.95,
        "target_beta0_factor": 1.0,
        "delta_frac": 0.05,
        "plan_margin": 0.8,
        "penalty_mu": 10.0,
        "path_weight": 0.0,
        "max_iters": 5000,
        "tol": 1e-8,
        "fd_rel_step": 1e-4,
        "success_tol": 0.01,
        "selection": "value",
    },
    "valuation": {
        "customer": None,
        "m_per_event": 1000,
        "m_permutations": None,
        "fractions": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
    },
    "incentive": {
        "betas": None,
        "commitment": None,
    },
    "grid": {
        "base_mva": 13.4,
        "inertia_h": 4.0,
        "damping_d": 1.0,
        "droop_r": 0.05,
        "governor_tc": 0.5,
        "dt": 0.01,
        "duration_s": 30.0,
        "start_step_mw": -7.68,
        "end_step_mw": 10.8,
        "lambda_factor": 50.0,
        "window_hours": [11, 15],
        "peak_demand_mw": 11.5,
    },
}


def default_config() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def merge_config(overrides: dict | None, base: dict | None = None) -> dict:
    """Deep-merge ``overrides`` onto ``base`` (the defaults), rejecting unknown keys."""
    cfg = copy.deepcopy(base) if base is not None else default_config()
    for section, values in (overrides or {}).items():
        if section not in cfg:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        for key, val in values.items():
            if key not in cfg[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            cfg[section][key] = val
    return cfg


def read_config(path) -> dict:
    """Raw (unmerged) config document."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return raw


def load_config(path) -> dict:
    return merge_config(read_config(path))


def config_hash(cfg: dict, *extra) -> str:
    blob = json.dumps([cfg, *extra], sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class Scenario:
    customers: tuple
    history: tuple
    aggregator: AggregatorParams
    history_commitments: np.ndarray
    future_commitments: np.ndarray
    eta: float = 0.01
    init: str = "ols"
    seed: int | None = None

    def __post_init__(self):
        ids = [c.id for c in self.customers]
        if len(set(ids)) != len(ids):
            raise ConfigError("customer ids must be unique")
        validate_history(self.history, ids)

    @property
    def ids(self) -> list:
        return [c.id for c in self.customers]

    @property
    def n(self) -> int:
        return len(self.customers)

    def customer(self, cid: str) -> CustomerTruth:
        for c in self.customers:
            if c.id == cid:
                return c
        raise ReferentialError(f"unknown customer {cid!r}")

    def true_arrays(self):
        """``(beta1, beta0, x_max, noise_sigma)`` arrays in customer order."""
        return (
            np.array([c.beta.beta1 for c in self.customers]),
            np.array([c.beta.beta0 for c in self.customers]),
            np.array([c.x_max for c in self.customers]),
            np.array([c.noise_sigma for c in self.customers]),
        )

    def true_aggregate(self) -> BetaParams:
        b1, b0, _, _ = self.true_arrays()
        return BetaParams(float(b1.sum()), float(b0.sum()))

    def customer_history(self, cid: str) -> CustomerHistory:
        return CustomerHistory.from_records(self.history, cid)

    def aggregate_history(self) -> CustomerHistory:
        return CustomerHistory.aggregate(self.history)

    def curtailment_matrix(self) -> np.ndarray:
        return np.array([[r.curtailments[c] for c in self.ids] for r in self.history])

    def history_lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.history])

    def initial_learner(self) -> LearnerState:
        if self.init == "ols":
            return LearnerState.fit(self.history, self.ids, self.eta)
        if self.init == "zero":
            return LearnerState({c: BetaParams(0.0, 0.0) for c in self.ids}, self.eta)
        if self.init == "truth":
            return LearnerState({c.id: c.beta for c in self.customers}, self.eta)
        raise ConfigError(f"unknown learner init {self.init!r}")

    def future_ordinals(self) -> list:
        start = self.history[-1].event_index + 1 if self.history else 1
        return list(range(start, start + len(self.future_commitments)))

    def with_history(self, history) -> "Scenario":
        return replace(self, history=tuple(history))


def commitment_for(lam_target, true_agg: BetaParams, params: AggregatorParams):
    """Commitment ``D`` whose benign incentive (true aggregate) equals ``lam_target``."""
    kappa, gamma = params.kappa, params.gamma
    s, b = true_agg.beta1, true_agg.beta0
    return (1.0 + kappa * s) * np.asarray(lam_target) / kappa + gamma * s + b


def synth_scenario(config: dict | None = None, seed: int | None = DEFAULT_SEED) -> Scenario:
    cfg = merge_config(config)
    cc, ec = cfg["customers"], cfg["events"]
    n = int(cc["n"])
    n_hist = int(ec["n_history"])
    if n < 1 or n_hist < 1 or int(ec["n_future"]) < 0:
        raise ConfigError("need at least one customer and one historical event")
    b1_lo, b1_hi = map(float, cc["beta1_range"])
    x_lo, x_hi = map(float, cc["curtailment_range"])
    l_lo, l_hi = map(float, ec["lambda_range"])
    sigma = float(cc["noise_sigma"])
    margin = float(cc["noise_margin"]) * sigma
    if not (0 < b1_lo <= b1_hi and 0 <= x_lo < x_hi and 0 <= l_lo <= l_hi):
        raise ConfigError("ranges must be ordered and nonnegative")
    if x_hi > float(cc["x_max"]):
        raise ConfigError("curtailment range exceeds x_max")
    # beta0 box: x_lo + margin <= beta0 + beta1 * l_lo and beta0 + beta1 * l_hi <= x_hi - margin
    slack = x_hi - x_lo - 2 * margin
    b1_feasible_max = np.inf if l_hi == l_lo else slack / (l_hi - l_lo)
    if slack < 0 or b1_lo > b1_feasible_max:
        raise ConfigError("curtailment and incentive ranges admit no customer parameters")
    b1_hi = min(b1_hi, b1_feasible_max)

    ss = np.random.SeedSequence(seed)
    rng_cust, rng_hist, rng_future = (np.random.default_rng(s) for s in ss.spawn(3))

    width = max(3, len(str(n - 1)))
    customers = []
    for i in range(n):
        b1 = rng_cust.uniform(b1_lo, b1_hi)
        lo = x_lo + margin - b1 * l_lo
        hi = x_hi - margin - b1 * l_hi
        b0 = rng_cust.uniform(lo, hi)
        customers.append(CustomerTruth(f"c{i:0{width}d}", BetaParams(float(b1), float(b0)), float(cc["x_max"]), sigma))

    b1s = np.array([c.beta.beta1 for c in customers])
    b0s = np.array([c.beta.beta0 for c in customers])
    lams = rng_hist.uniform(l_lo, l_hi, n_hist)
    noise = rng_hist.normal(0.0, 1.0, (n_hist, n)) * sigma
    x = np.clip(b1s * lams[:, None] + b0s + noise, 0.0, float(cc["x_max"]))
    x = np.clip(x, x_lo, x_hi)
    history = tuple(
        DREventRecord(t + 1, float(lams[t]), {c.id: float(x[t, i]) for i, c in enumerate(customers)})
        for t in range(n_hist)
    )

    future_lams = rng_future.uniform(l_lo, l_hi, int(ec["n_future"]))
    return _assemble(cfg, customers, history, future_lams, seed)


def _assemble(cfg, customers, history, future_lams, seed) -> Scenario:
    agg = AggregatorParams(float(cfg["aggregator"]["kappa"]), float(cfg["aggregator"]["gamma"]), 0.0, len(customers))
    true_agg = BetaParams(float(sum(c.beta.beta1 for c in customers)), float(sum(c.beta.beta0 for c in customers)))
    lams = np.array([r.lam for r in history])
    return Scenario(
        customers=tuple(customers),
        history=tuple(history),
        aggregator=agg,
        history_commitments=commitment_for(lams, true_agg, agg),
        future_commitments=commitment_for(future_lams, true_agg, agg),
        eta=float(cfg["learner"]["eta"]),
        init=str(cfg["learner"]["init"]),
        seed=seed,
    )


def scenario_from_data(customers: Sequence[CustomerTruth], history: Sequence[DREventRecord],
                       config: dict | None = None, seed: int | None = DEFAULT_SEED) -> Scenario:
    """Scenario over given customers and history; future commitments are drawn as in synthesis."""
    cfg = merge_config(config)
    if not customers or not history:
        raise ConfigError("need at least one customer and one historical event")
    l_lo, l_hi = map(float, cfg["events"]["lambda_range"])
    rng_future = np.random.default_rng(np.random.SeedSequence(seed).spawn(3)[2])
    future_lams = rng_future.uniform(l_lo, l_hi, int(cfg["events"]["n_future"]))
    return _assemble(cfg, list(customers), list(history), future_lams, seed)


def validate_history(history: Sequence[DREventRecord], ids: Sequence[str] | None = None):
    known = set(ids) if ids is not None else None
    prev = None
    for rec in history:
        if prev is not None and rec.event_index <= prev:
            raise OrderingError(f"event index {rec.event_index} follows {prev}")
        prev = rec.event_index
        if known is not None:
            for cid in rec.curtailments:
                if cid not in known:
                    raise ReferentialError(f"event {rec.event_index} references unknown customer {cid!r}")


# -- flat files --------------------------------------------------------------------

HISTORY_HEADER = ["event_index", "lambda_usd_per_kwh", "customer_id", "curtailment_kw"]
CUSTOMER_HEADER = ["customer_id", "beta1", "beta0", "x_max_kw", "noise_sigma_kw"]


def save_history(history: Sequence[DREventRecord], path):
    """Long-format CSV, one row per (event, customer); floats written losslessly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_HEADER)
        for rec in history:
            for cid, x in rec.curtailments.items():
                w.writerow([rec.event_index, repr(float(rec.lam)), cid, repr(float(x))])


def load_history(path, customer_ids: Sequence[str] | None = None) -> list:
    events: dict = {}
    order: list = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HistoryParseError("empty file", 1) from None
        if [h.strip() for h in header] != HISTORY_HEADER:
            raise HistoryParseError(f"expected header {','.join(HISTORY_HEADER)}", 1)
        last = None
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise HistoryParseError(f"expected 4 fields, got {len(row)}", lineno)
            try:
                idx = int(row[0])
                lam = float(row[1])
                cid = row[2].strip()
                x = float(row[3])
            except ValueError as exc:
                raise HistoryParseError(str(exc), lineno) from None
            if not cid:
                raise HistoryParseError("empty customer id", lineno)
            if not np.isfinite(lam) or lam < 0:
                raise HistoryParseError(f"incentive must be finite and >= 0, got {row[1]}", lineno)
            if not np.isfinite(x) or x < 0:
                raise HistoryParseError(f"curtailment must be finite and >= 0, got {row[3]}", lineno)
            if last is not None and idx < last:
                raise OrderingError(f"line {lineno}: event index {idx} after {last}")
            if last is not None and idx != last and idx in events:
                raise OrderingError(f"line {lineno}: event {idx} is not contiguous")
            if customer_ids is not None and cid not in customer_ids:
                raise ReferentialError(f"line {lineno}: unknown customer {cid!r}")
            if idx not in events:
                events[idx] = (lam, {})
                order.append(idx)
            elif events[idx][0] != lam:
                raise HistoryParseError(f"event {idx} has conflicting incentives", lineno)
            if cid in events[idx][1]:
                raise HistoryParseError(f"duplicate row for event {idx}, customer {cid}", lineno)
            events[idx][1][cid] = x
            last = idx
    return [DREventRecord(i, events[i][0], events[i][1]) for i in order]


def save_customers(customers: Sequence[CustomerTruth], path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CUSTOMER_HEADER)
        for c in customers:
            w.writerow([c.id, repr(c.beta.beta1), repr(c.beta.beta0), repr(c.x_max), repr(c.noise_sigma)])


def load_customers(path) -> list:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CUSTOMER_HEADER:
            raise HistoryParseError(f"expected header {','.join(CUSTOMER_HEADER)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(CustomerTruth(row[0].strip(), BetaParams(float(row[1]), float(row[2])),
                                         float(row[3]), float(row[4])))
            except (ValueError, IndexError) as exc:
                raise HistoryParseError(str(exc), lineno) from None
    return out
