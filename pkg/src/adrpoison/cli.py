"""Command-line entry point and scenario orchestration.

Every subcommand resolves a full configuration (defaults, then the optional
JSON file, then flag overrides), runs one pipeline and writes its tables plus a
``run_report.json`` into the output directory.  Numbers in emitted tables are
rounded to 9 significant digits; nothing time- or host-dependent is written,
so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import attack as atk
from .errors import ADRError, ConfigError, InvalidInputError
from .gridfreq import (GridParams, attack_demand_profile, baseline_profile, simulate_frequency,
                       window_curtailment)
from .incentive import AggregatorParams, brute_force_incentive_oracle, design_incentive
from .learner import CustomerHistory, LearnerState, batch_ols, empirical_loss, ogd_fit
from .model import BetaParams
from .scenario import (CASE_STUDY_PRESET, DEFAULT_SEED, load_customers, load_history, merge_config,
                       read_config, save_customers, save_history, scenario_from_data, synth_scenario)
from .valuation import EXACT_MAX_EVENTS, rank_customers, shapley_events_mc, top_k_loss_curve

log = logging.getLogger(__name__)

SUBCOMMANDS = ("synth", "learn", "incentive", "attack", "value-events", "value-customers",
               "gridsim", "replicate-case-study")

EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION = 0, 1, 2


@dataclass
class RunReport:
    subcommand: str
    artifacts: list
    summary: dict
    config: dict
    seed: int
    input_hash: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "seed": self.seed,
            "input_hash": self.input_hash,
            "artifacts": [Path(p).name for p in self.artifacts],
            "summary": _clean(self.summary),
            "config": self.config,
        }


# -- formatting ---------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return str(v)


def _clean(obj):
    """JSON-ready copy with floats rounded to 9 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.9g}")
    return obj


class _Writer:
    def __init__(self, out_dir: Path, fmt: str):
        self.out = out_dir
        self.fmt = fmt
        self.paths: list = []

    def table(self, name: str, header, rows) -> Path:
        if self.fmt == "json":
            path = self.out / f"{name}.json"
            data = [dict(zip(header, row)) for row in rows]
            self._json(path, data)
        else:
            path = self.out / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for row in rows:
                    w.writerow([_fmt(v) for v in row])
        self.paths.append(path)
        return path

    def json(self, name: str, data) -> Path:
        path = self.out / f"{name}.json"
        self._json(path, data)
        self.paths.append(path)
        return path

    def raw(self, path: Path) -> Path:
        self.paths.append(path)
        return path

    @staticmethod
    def _json(path, data):
        with open(path, "w") as fh:
            json.dump(_clean(data), fh, indent=2, sort_keys=True)
            fh.write("\n")


# -- inputs -------------------------------------------------------------------------


def resolve_config(subcommand: str, overrides: dict | None = None, **flags) -> dict:
    """Defaults (plus the case-study preset where relevant), then ``overrides``, then flags."""
    base = merge_config(CASE_STUDY_PRESET) if subcommand == "replicate-case-study" else None
    cfg = merge_config(overrides, base)
    if flags.get("m_permutations") is not None:
        cfg["valuation"]["m_permutations"] = int(flags["m_permutations"])
    if flags.get("horizon") is not None:
        cfg["attack"]["horizon"] = int(flags["horizon"])
    if flags.get("compromised_frac") is not None:
        cfg["attack"]["compromised_frac"] = float(flags["compromised_frac"])
    if flags.get("lambda_factor") is not None:
        cfg["grid"]["lambda_factor"] = float(flags["lambda_factor"])
    return cfg


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class _Inputs:
    """Lazily built scenario (or bare records) for one run."""

    def __init__(self, cfg, seed, history_path=None, customers_path=None):
        self.cfg, self.seed = cfg, seed
        self.history_path, self.customers_path = history_path, customers_path
        self._scenario = None

    def scenario(self):
        if self._scenario is None:
            if self.customers_path is not None:
                customers = load_customers(self.customers_path)
                if self.history_path is None:
                    raise ConfigError("--customers requires --history")
                history = load_history(self.history_path, [c.id for c in customers])
                self._scenario = scenario_from_data(customers, history, self.cfg, self.seed)
            elif self.history_path is not None:
                synth = synth_scenario(self.cfg, self.seed)
                history = load_history(self.history_path, synth.ids)
                self._scenario = scenario_from_data(synth.customers, history, self.cfg, self.seed)
            else:
                self._scenario = synth_scenario(self.cfg, self.seed)
        return self._scenario

    def records(self):
        """``(records, ids)``; a bare history file needs no customer table."""
        if self.history_path is not None and self.customers_path is None:
            records = load_history(self.history_path)
            if not records:
                raise InvalidInputError("history file holds no events")
            ids = sorted({c for r in records for c in r.curtailments})
            return records, ids
        sc = self.scenario()
        return list(sc.history), sc.ids


# -- pipelines ----------------------------------------------------------------------


def _synth(w: _Writer, inp: _Inputs) -> dict:
    sc = inp.scenario()
    save_customers(sc.customers, w.raw(w.out / "customers.csv"))
    save_history(sc.history, w.raw(w.out / "history.csv"))
    rows = [("history", r.event_index, r.lam, d) for r, d in zip(sc.history, sc.history_commitments)]
    rows += [("future", e, float("nan"), d) for e, d in zip(sc.future_ordinals(), sc.future_commitments)]
    w.table("commitments", ["phase", "event_index", "lambda_usd_per_kwh", "commitment_kw"], rows)
    x = sc.curtailment_matrix()
    agg = sc.true_aggregate()
    return {
        "n_customers": sc.n,
        "n_history": len(sc.history),
        "n_future": len(sc.future_commitments),
        "curtailment_min_kw": float(x.min()),
        "curtailment_max_kw": float(x.max()),
        "lambda_min": float(sc.history_lambdas().min()),
        "lambda_max": float(sc.history_lambdas().max()),
        "true_aggregate_beta1": agg.beta1,
        "true_aggregate_beta0": agg.beta0,
    }


def _learn(w: _Writer, inp: _Inputs) -> dict:
    records, ids = inp.records()
    eta = float(inp.cfg["learner"]["eta"])
    rows = []
    for cid in ids:
        hist = CustomerHistory.from_records(records, cid)
        ols = batch_ols(hist)
        ogd = ogd_fit(hist, eta)
        rows.append((cid, len(hist), ols.beta1, ols.beta0, empirical_loss(hist, ols),
                     ogd.beta1, ogd.beta0, empirical_loss(hist, ogd)))
    w.table("estimates", ["customer_id", "n_events", "beta1_ols", "beta0_ols", "loss_ols",
                          "beta1_ogd", "beta0_ogd", "loss_ogd"], rows)
    agg_hist = CustomerHistory.aggregate(records)
    agg = batch_ols(agg_hist)
    return {
        "n_customers": len(ids),
        "n_events": len(records),
        "eta": eta,
        "aggregate_beta1_ols": agg.beta1,
        "aggregate_beta0_ols": agg.beta0,
        "aggregate_loss_ols": empirical_loss(agg_hist, agg),
        "sum_beta1_ols": sum(r[2] for r in rows),
        "sum_beta0_ols": sum(r[3] for r in rows),
    }


def _parse_betas(spec) -> dict:
    if isinstance(spec, dict):
        items = spec.items()
    elif isinstance(spec, list):
        try:
            items = [(e["id"], e) for e in spec]
        except (TypeError, KeyError):
            raise ConfigError("incentive.betas entries need an 'id'") from None
    else:
        raise ConfigError("incentive.betas must be a mapping or a list")
    out = {}
    for cid, e in items:
        try:
            if isinstance(e, dict):
                out[str(cid)] = BetaParams(float(e["beta1"]), float(e["beta0"]))
            else:
                b1, b0 = e
                out[str(cid)] = BetaParams(float(b1), float(b0))
        except (TypeError, KeyError, ValueError):
            raise ConfigError(f"bad beta entry for {cid!r}") from None
    if not out:
        raise ConfigError("incentive.betas is empty")
    return out


def _incentive(w: _Writer, inp: _Inputs) -> dict:
    cfg = inp.cfg
    ic, ac = cfg["incentive"], cfg["aggregator"]
    if ic["betas"] is not None:
        betas = _parse_betas(ic["betas"])
        if ic["commitment"] is None:
            raise ConfigError("incentive.commitment is required with incentive.betas")
        commitment = float(ic["commitment"])
        source = "config"
    else:
        sc = inp.scenario()
        betas = dict(sc.initial_learner().estimates)
        commitment = float(ic["commitment"]) if ic["commitment"] is not None else float(sc.future_commitments[0])
        source = "learner"
    params = AggregatorParams(float(ac["kappa"]), float(ac["gamma"]), commitment, len(betas))
    res = design_incentive(betas, params)
    out = {
        "source": source,
        "n_customers": len(betas),
        "commitment_kw": commitment,
        "kappa": params.kappa,
        "gamma": params.gamma,
        "lambda_hat": res.lambda_hat,
        "lambda_broadcast": res.lambda_broadcast,
        "expected_total_kw": res.expected_total,
        "clamped": res.clamped,
        "unstable_estimate": res.unstable_estimate,
    }
    if len(betas) <= 10 and all(b.beta1 > 0 for b in betas.values()):
        lam_oracle, _ = brute_force_incentive_oracle(betas, params)
        out["oracle_lambda_hat"] = lam_oracle
    w.table("incentive_responses", ["customer_id", "beta1", "beta0", "expected_kw"],
            [(c, betas[c].beta1, betas[c].beta0, res.expected_per_customer[c]) for c in sorted(betas)])
    w.json("incentive", out)
    return out


def _seed_of(sc):
    return None if sc.seed is None else int(sc.seed)


def _attack_setup(sc, cfg):
    ac = cfg["attack"]
    learner = sc.initial_learner()
    comp = atk.select_compromised(sc, float(ac["compromised_frac"]), learner, ac["selection"], _seed_of(sc))
    estimate = atk.estimate_aggregate_behavior(sc.aggregate_history())
    target = atk.monetary_target(estimate, float(ac["target_beta1_factor"]), float(ac["target_beta0_factor"]))
    spec = atk.build_spec(sc, comp, target, ac["mode"], int(ac["horizon"]), float(ac["delta_frac"]))
    return learner, spec, estimate


def _attack(w: _Writer, inp: _Inputs) -> tuple:
    sc, cfg = inp.scenario(), inp.cfg
    learner, spec, estimate = _attack_setup(sc, cfg)
    plan = atk.plan_attack(sc, spec, learner, atk.AttackOptions.from_config(cfg["attack"]))
    trace = atk.simulate_attack(plan, sc, _seed_of(sc))
    money = atk.monetary_impact(trace)

    comp_ids = sorted(spec.compromised_ids)
    fake = plan.fake_matrix(comp_ids) if comp_ids else np.zeros((len(spec.horizon), 0))
    w.table("attack_plan", ["event_index", "customer_id", "fake_curtailment_kw"],
            [(e, c, fake[k, j]) for k, e in enumerate(spec.horizon) for j, c in enumerate(comp_ids)])
    w.table("attack_trace",
            ["event_index", "commitment_kw", "delta_kw", "lambda_benign", "lambda_attacked",
             "aggregate_benign_kw", "aggregate_attacked_kw", "est_beta0_benign", "est_beta1_benign",
             "est_beta0_attacked", "est_beta1_attacked", "payout_delta"],
            [(int(trace.events[k]), trace.commitments[k], trace.delta[k], trace.lambda_benign[k],
              trace.lambda_attacked[k], trace.aggregate_benign[k], trace.aggregate_attacked[k],
              *trace.estimates_benign[k], *trace.estimates_attacked[k], money["per_event_delta"][k])
             for k in range(len(trace))])
    w.table("attack_objective", ["iteration", "objective", "terminal_deviation"],
            [(i, o, d) for i, (o, d) in enumerate(zip(plan.objective_trajectory, plan.deviation_trajectory))])

    target = spec.target_beta
    final = trace.estimates_attacked[-1]
    realized = float(np.hypot(final[0] - target.beta0, final[1] - target.beta1))
    norm = float(np.hypot(target.beta0, target.beta1))
    excess = np.abs(trace.aggregate_attacked - trace.commitments) - trace.delta
    summary = {
        "mode": spec.mode,
        "n_compromised": len(comp_ids),
        "compromised_ids": comp_ids,
        "horizon": len(spec.horizon),
        "estimate_beta1": estimate.beta1,
        "estimate_beta0": estimate.beta0,
        "target_beta1": target.beta1,
        "target_beta0": target.beta0,
        "planned_residual": plan.residual,
        "planned_relative_residual": plan.residual / norm if norm else float("nan"),
        "realized_relative_residual": realized / norm if norm else float("nan"),
        "converged": plan.converged,
        "infeasible": plan.infeasible,
        "iterations": plan.iterations,
        "max_delivery_excess_kw": float(excess.max()),
        "benign_payout": money["benign_payout"],
        "attacked_payout": money["attacked_payout"],
        "payout_delta": money["total_delta"],
    }
    return summary, trace


def _valuation_customer(records, ids, cfg, seed) -> str:
    cid = cfg["valuation"]["customer"]
    if cid is not None:
        if cid not in ids:
            raise ConfigError(f"valuation.customer {cid!r} is not in the history")
        return cid
    rng = np.random.default_rng([0 if seed is None else int(seed), 1])
    return ids[int(rng.integers(len(ids)))]


def _value_events(w: _Writer, inp: _Inputs) -> dict:
    records, ids = inp.records()
    vc = inp.cfg["valuation"]
    cid = _valuation_customer(records, ids, inp.cfg, inp.seed)
    hist = CustomerHistory.from_records(records, cid)
    t = len(hist)
    m = int(vc["m_permutations"]) if vc["m_permutations"] is not None else int(vc["m_per_event"]) * t
    rep = shapley_events_mc(hist, m, inp.seed)
    ordinals = [r.event_index for r in records if cid in r.curtailments]
    w.table("event_values", ["event_index", "lambda_usd_per_kwh", "curtailment_kw", "phi"],
            [(ordinals[k], hist.lambdas[k], hist.curtailments[k], rep.values[k]) for k in range(t)])
    w.table("event_value_convergence", ["permutations", *[f"phi_{e}" for e in ordinals]],
            [(int(n), *row) for n, row in zip(rep.trace_counts, rep.convergence_trace)])

    fractions = [f for f in vc["fractions"] if math.floor(f * t + 1e-9) >= 1]
    curve = top_k_loss_curve(hist, rep, fractions)
    w.table("loss_curve", ["fraction", "n_events", "relative_loss"],
            [(f, int(math.floor(f * t + 1e-9)), curve[f]) for f in fractions])
    ranking = rep.ranking()
    fit_rows = []
    for f in fractions:
        k = int(math.floor(f * t + 1e-9))
        b = batch_ols(hist.subset(sorted(ranking[:k])))
        fit_rows.append((f, b.beta1, b.beta0))
    w.table("top_fraction_fits", ["fraction", "beta1", "beta0"], fit_rows)
    return {
        "customer_id": cid,
        "n_events": t,
        "permutations": m,
        "capped": rep.capped,
        "exact_available": t <= EXACT_MAX_EVENTS,
        "relative_loss_top_half": curve.get(0.5),
    }


def _loss_convergence(w: _Writer, inp: _Inputs, n_checkpoints: int = 10):
    """Top-fraction loss curves as the permutation budget grows."""
    records, ids = inp.records()
    vc = inp.cfg["valuation"]
    cid = _valuation_customer(records, ids, inp.cfg, inp.seed)
    hist = CustomerHistory.from_records(records, cid)
    t = len(hist)
    m = int(vc["m_permutations"]) if vc["m_permutations"] is not None else int(vc["m_per_event"]) * t
    rep = shapley_events_mc(hist, m, inp.seed, trace_points=n_checkpoints)
    fractions = [f for f in vc["fractions"] if math.floor(f * t + 1e-9) >= 1]
    rows = []
    for n, phi in zip(rep.trace_counts, rep.convergence_trace):
        partial = type(rep)({k: float(v) for k, v in enumerate(phi)}, int(n))
        curve = top_k_loss_curve(hist, partial, fractions)
        rows += [(int(n), f, curve[f]) for f in fractions]
    w.table("loss_convergence", ["permutations", "fraction", "relative_loss"], rows)


def _value_customers(w: _Writer, inp: _Inputs) -> dict:
    records, ids = inp.records()
    learner = LearnerState.fit(records, ids, float(inp.cfg["learner"]["eta"]))
    agg_hist = CustomerHistory.aggregate(records)
    agg = batch_ols(agg_hist)
    rep = rank_customers(learner.estimates, agg_hist, agg)
    rank = {c: i + 1 for i, c in enumerate(rep.ranking())}
    w.table("customer_values", ["customer_id", "rank", "phi", "beta1", "beta0"],
            [(c, rank[c], rep.values[c], learner.estimates[c].beta1, learner.estimates[c].beta0) for c in ids])
    n = len(ids)
    return {
        "n_customers": n,
        "normalised_aggregate_beta1": agg.beta1 / n,
        "normalised_aggregate_beta0": agg.beta0 / n,
        "top_customer": rep.ranking()[0],
        "capped": list(rep.capped),
    }


def _gridsim(w: _Writer, inp: _Inputs) -> dict:
    sc, gc = inp.scenario(), inp.cfg["grid"]
    params = GridParams(float(gc["base_mva"]), float(gc["inertia_h"]), float(gc["damping_d"]),
                        float(gc["droop_r"]), float(gc["governor_tc"]))
    _, _, x_max, _ = sc.true_arrays()
    betas = [c.beta for c in sc.customers]
    lam = float(np.mean(sc.history_lambdas()))
    factor = float(gc["lambda_factor"])
    window = tuple(int(h) for h in gc["window_hours"])
    base = baseline_profile(float(gc["peak_demand_mw"]))
    benign = attack_demand_profile(base, betas, lam, 1.0, window, x_max)
    up = attack_demand_profile(base, betas, lam, factor, window, x_max)
    down = attack_demand_profile(base, betas, lam, 0.25, window, x_max)
    w.table("demand_profile", ["hour", "baseline_mw", "benign_dr_mw", "lambda_scaled_mw", "lambda_quarter_mw"],
            [(h, base[h], benign[h], up[h], down[h]) for h in range(base.size)])

    results = {}
    for name, step in (("dr_start", float(gc["start_step_mw"])), ("dr_end", float(gc["end_step_mw"]))):
        tr = simulate_frequency(params, [(1.0, step)], float(gc["duration_s"]), float(gc["dt"]))
        path = w.out / f"freq_{name}.csv"
        tr.to_csv(path)
        w.raw(path)
        lo, hi = tr.extremes
        results[name] = {"step_mw": step, "freq_min_pu": lo, "freq_max_pu": hi,
                         "final_pu": float(tr.freq[-1]),
                         "steady_state_pu": 1.0 + params.steady_state_deviation(step / params.base_mva),
                         "trips": [{"time_s": t, "relay": kind} for t, kind in tr.trips]}
    cut = {f: window_curtailment(betas, f * lam, x_max) for f in (1.0, factor, 0.25)}
    return {
        "lambda_benign": lam,
        "lambda_factor": factor,
        "window_hours": list(window),
        "curtailment_benign_kw": cut[1.0],
        "curtailment_scaled_kw": cut[factor],
        "curtailment_quarter_kw": cut[0.25],
        "curtailment_cap_kw": float(np.sum(x_max)),
        "scaled_increase_frac": cut[factor] / cut[1.0] - 1.0 if cut[1.0] > 0 else float("nan"),
        "quarter_decrease_frac": 1.0 - cut[0.25] / cut[1.0] if cut[1.0] > 0 else float("nan"),
        "frequency": results,
    }


def _replicate(w: _Writer, inp: _Inputs) -> dict:
    summary = {"synth": _synth(w, inp), "learn": _learn(w, inp)}
    summary["attack"], _ = _attack(w, inp)
    summary["value_events"] = _value_events(w, inp)
    _loss_convergence(w, inp)
    summary["value_customers"] = _value_customers(w, inp)
    summary["gridsim"] = _gridsim(w, inp)
    return summary


_PIPELINES = {
    "synth": _synth,
    "learn": _learn,
    "incentive": _incentive,
    "attack": lambda w, inp: _attack(w, inp)[0],
    "value-events": _value_events,
    "value-customers": _value_customers,
    "gridsim": _gridsim,
    "replicate-case-study": _replicate,
}


def run(subcommand: str, config: dict | None = None, out_dir=".", seed: int | None = DEFAULT_SEED,
        fmt: str = "csv", history=None, customers=None, **flags) -> RunReport:
    """Execute one pipeline and write its artifacts into ``out_dir``.

    ``config`` holds overrides on the defaults; ``flags`` are the
    ``m_permutations``, ``horizon``, ``compromised_frac`` and ``lambda_factor``
    command-line overrides.
    """
    if subcommand not in _PIPELINES:
        raise ConfigError(f"unknown subcommand {subcommand!r}; choose from {', '.join(SUBCOMMANDS)}")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be 'csv' or 'json', got {fmt!r}")
    cfg = resolve_config(subcommand, config, **flags)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    digests = [_file_digest(p) for p in (history, customers) if p is not None]
    input_hash = hashlib.sha256(json.dumps([cfg, seed, digests], sort_keys=True).encode()).hexdigest()
    writer = _Writer(out, fmt)
    inp = _Inputs(cfg, seed, history, customers)
    try:
        summary = _PIPELINES[subcommand](writer, inp)
    except ADRError as exc:
        raise type(exc)(f"{subcommand}: {exc}") from exc
    report = RunReport(subcommand, list(writer.paths), summary, copy.deepcopy(cfg), seed, input_hash)
    report_path = out / "run_report.json"
    _Writer._json(report_path, report.to_dict())
    report.artifacts.append(report_path)
    return report


# -- command line -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adrpoison", description="Demand-response poisoning experiments.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="JSON file with config overrides")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    p.add_argument("--history", help="history CSV to use instead of the synthetic one")
    p.add_argument("--customers", help="customer table CSV (requires --history)")
    p.add_argument("--m-permutations", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--compromised-frac", type=float)
    p.add_argument("--lambda-factor", type=float)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        overrides = read_config(args.config) if args.config else None
        report = run(args.subcommand, overrides, args.out, args.seed, args.fmt, args.history, args.customers,
                     m_permutations=args.m_permutations, horizon=args.horizon,
                     compromised_frac=args.compromised_frac, lambda_factor=args.lambda_factor)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ADRError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in report.artifacts:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
