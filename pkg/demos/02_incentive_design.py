"""
Designing the incentive
=======================

Given estimated responses the aggregator picks the price that balances its
commitment penalty against what it pays out.
"""

# %%
from adrpoison import AggregatorParams, BetaParams, brute_force_incentive_oracle, design_incentive

betas = {"a": BetaParams(1.0, 0.0), "b": BetaParams(1.0, 0.0)}
params = AggregatorParams(kappa=1.0, gamma=0.0, commitment_D=10.0, n_customers=2)
res = design_incentive(betas, params)
print(f"normalised multiplier {res.lambda_hat:.4f}, broadcast price {res.lambda_broadcast:.4f}")
print(f"expected delivery {res.expected_total:.4f} kW of a 10 kW commitment")

# %%
# The same answer from numerically minimising the aggregator's cost.
lam, x = brute_force_incentive_oracle(betas, params)
print(f"numerical optimum: multiplier {lam:.6f}, curtailments {x}")

# %%
# A stiffer penalty pushes delivery towards the commitment.
for kappa in (0.1, 1.0, 10.0, 1000.0):
    r = design_incentive(betas, AggregatorParams(kappa, 0.0, 10.0, 2))
    print(f"kappa={kappa:>7}: price {r.lambda_broadcast:8.3f}, delivery {r.expected_total:6.3f} kW")
