"""
What a large price swing does to the grid
=========================================

Scaling the broadcast incentive moves the whole DR window's demand; a
single-machine surrogate shows the frequency excursion of the resulting
load steps against the interconnection relay settings.
"""

# %%
import numpy as np

from adrpoison import (GridParams, attack_demand_profile, baseline_profile, simulate_frequency, synth_scenario,
                       window_curtailment)

sc = synth_scenario(seed=0)
betas = [c.beta for c in sc.customers]
lam = float(np.mean(sc.history_lambdas()))
for factor in (0.25, 1.0, 50.0):
    print(f"incentive x{factor:<5}: window curtailment {window_curtailment(betas, factor * lam, 50.0):7.1f} kW")

# %%
base = baseline_profile(11.5)
hacked = attack_demand_profile(base, betas, lam, 50.0, (11, 15))
print("hourly demand, MW:", np.round(hacked, 2))

# %%
grid = GridParams()
for label, step in (("DR start", -7.68), ("DR end", 10.8)):
    tr = simulate_frequency(grid, [(1.0, step)], duration=30.0)
    lo, hi = tr.extremes
    print(f"{label}: {step:+.2f} MW -> f in [{lo:.4f}, {hi:.4f}] p.u., trips {tr.trips}")
