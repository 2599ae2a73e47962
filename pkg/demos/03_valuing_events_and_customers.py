"""
Which events and which customers matter
=======================================

Permutation Shapley values of past DR events for one customer, and a
loss-ratio ranking of customers against the public aggregate.
"""

# %%
import numpy as np

from adrpoison import (LearnerState, batch_ols, rank_customers, shapley_events_exact, shapley_events_mc,
                       synth_scenario, top_k_loss_curve)

sc = synth_scenario(seed=0)
hist = sc.customer_history("c026")
rep = shapley_events_mc(hist, 1000 * len(hist), seed=0)
print("five most valuable events:", rep.ranking()[:5])

# %%
# Refitting on the best events only.
curve = top_k_loss_curve(hist, rep, [0.1, 0.2, 0.3, 0.5, 1.0])
for frac, ratio in curve.items():
    print(f"top {frac:.0%} of events -> loss x{ratio:.3f}")

# %%
# On a short history the sampled values can be checked against enumeration.
short = hist.subset(range(6))
print("exact:", np.round(shapley_events_exact(short).as_array(), 4))
print("MC   :", np.round(shapley_events_mc(short, 6000, seed=0).as_array(), 4))

# %%
learner = LearnerState.fit(sc.history, sc.ids)
agg_hist = sc.aggregate_history()
cust = rank_customers(learner.estimates, agg_hist, batch_ols(agg_hist))
print("customers closest to the average behaviour:", cust.ranking()[:5])
