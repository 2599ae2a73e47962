"""
Poisoning the learner for money
===============================

An attacker controlling 30% of the customers fakes their curtailments so
the aggregator learns a flatter price response and raises the incentive,
while total delivery keeps meeting the commitment.  The planner is capped at
a few hundred iterations here; the full replication runs to convergence.
"""

# %%
import numpy as np

from adrpoison import (AttackOptions, build_spec, estimate_aggregate_behavior, monetary_impact, monetary_target,
                       plan_attack, select_compromised, simulate_attack, synth_scenario)
from adrpoison.scenario import CASE_STUDY_PRESET, merge_config

cfg = merge_config(CASE_STUDY_PRESET)
sc = synth_scenario(cfg, seed=0)
compromised = select_compromised(sc, 0.3)
estimate = estimate_aggregate_behavior(sc.aggregate_history())
target = monetary_target(estimate, 0.95)
print(f"public estimate beta1={estimate.beta1:.1f}; target beta1={target.beta1:.1f}")

# %%
spec = build_spec(sc, compromised, target, "online", horizon=65)
plan = plan_attack(sc, spec, options=AttackOptions(max_iters=300, path_weight=1.0))
print(f"{plan.iterations} iterations, planned residual {plan.residual:.3g}")

# %%
trace = simulate_attack(plan, sc, seed=0)
money = monetary_impact(trace)
gap = trace.lambda_attacked - trace.lambda_benign
print(f"learned beta1: benign {trace.estimates_benign[-1, 1]:.1f}, attacked {trace.estimates_attacked[-1, 1]:.1f}")
print(f"price uplift per event: min {gap.min():.3f}, mean {gap.mean():.3f} $/kWh")
print(f"extra payout over 65 events: ${money['total_delta']:.0f}")
print(f"worst delivery miss beyond tolerance: {np.max(np.abs(trace.aggregate_attacked - trace.commitments) - trace.delta):.1f} kW")
