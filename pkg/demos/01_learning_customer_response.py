"""
Learning how customers respond to incentives
=============================================

A synthetic campus of 50 DR customers, each with a linear price response,
and the two estimators the aggregator can use on its history.
"""

# %%
import numpy as np

from adrpoison import CustomerHistory, batch_ols, ogd_fit, synth_scenario

sc = synth_scenario(seed=0)
print(f"{sc.n} customers, {len(sc.history)} past events")
print("incentives paid ($/kWh):", np.round(sc.history_lambdas(), 2))

# %%
# Pick one customer and compare the batch fit to its true parameters.
cid = sc.ids[7]
hist = sc.customer_history(cid)
truth = sc.customer(cid).beta
fit = batch_ols(hist)
print(f"{cid}: true beta1={truth.beta1:.2f} beta0={truth.beta0:.2f}")
print(f"{cid}: OLS  beta1={fit.beta1:.2f} beta0={fit.beta0:.2f}")

# %%
# Twenty events with incentives squeezed into [1, 2] $/kWh pin down the
# level of the response better than its slope.  A streaming learner started
# from zero barely moves in 20 steps; it needs a long stream.
print("OGD after the history:", ogd_fit(hist, 0.05))

rng = np.random.default_rng(1)
lam = rng.uniform(1, 2, 10_000)
stream = list(zip(lam, truth.beta1 * lam + truth.beta0))
print("OGD after 10k noise-free events:", ogd_fit(CustomerHistory(stream), 0.05))
