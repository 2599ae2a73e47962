import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adrpoison import (AggregatorParams, BetaParams, InvalidParameterError, SingularConfigurationError,
                       broadcast_incentive, brute_force_incentive_oracle, closed_form_response,
                       design_incentive)

N2 = {"a": BetaParams(1.0, 0.0), "b": BetaParams(1.0, 0.0)}


def test_two_customer_instance():
    res = design_incentive(N2, AggregatorParams(1.0, 0.0, 10.0, 2))
    assert res.lambda_hat == pytest.approx(10 / 6)
    assert res.lambda_broadcast == pytest.approx(10 / 3)
    assert res.expected_total == pytest.approx(20 / 3)
    assert not res.clamped


def test_two_customer_instance_against_oracle():
    lam, x = brute_force_incentive_oracle(N2, AggregatorParams(1.0, 0.0, 10.0, 2))
    assert lam == pytest.approx(10 / 6, rel=1e-6)
    assert sum(x.values()) == pytest.approx(20 / 3, rel=1e-6)


def _instance(draw_b1, draw_b0, n):
    return {f"c{i}": BetaParams(b1, b0) for i, (b1, b0) in enumerate(zip(draw_b1[:n], draw_b0[:n]))}


@settings(max_examples=60)
@given(st.lists(st.floats(0.5, 20), min_size=5, max_size=5), st.lists(st.floats(-10, 30), min_size=5, max_size=5),
       st.integers(1, 5), st.floats(0.1, 5), st.floats(0, 2), st.floats(0, 500))
def test_two_closed_form_paths_agree(b1, b0, n, kappa, gamma, d):
    betas = _instance(b1, b0, n)
    params = AggregatorParams(kappa, gamma, d, n)
    res = design_incentive(betas, params)
    if res.clamped:
        return
    direct = closed_form_response(betas, params)
    for cid in betas:
        assert res.expected_per_customer[cid] == pytest.approx(direct[cid], rel=1e-9, abs=1e-9)
    # multiplier from the Q stationarity condition
    assert res.lambda_hat == pytest.approx(kappa * (d - res.expected_total) / n, rel=1e-9, abs=1e-9)


def test_oracle_agrees_on_random_instances(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        betas = {f"c{i}": BetaParams(rng.uniform(1, 20), rng.uniform(-5, 20)) for i in range(n)}
        params = AggregatorParams(rng.uniform(0.2, 3), 0.0, rng.uniform(50, 300), n)
        res = design_incentive(betas, params)
        lam, x = brute_force_incentive_oracle(betas, params)
        assert lam == pytest.approx(res.lambda_hat, rel=1e-4, abs=1e-8)
        for cid in betas:
            assert x[cid] == pytest.approx(res.expected_per_customer[cid], rel=1e-4, abs=1e-6)


def test_noise_only_shifts_the_objective():
    params = AggregatorParams(1.0, 0.3, 40.0, 2)
    betas = {"a": BetaParams(3, 1), "b": BetaParams(5, 2)}
    assert brute_force_incentive_oracle(betas, params, 0.0)[0] == pytest.approx(
        brute_force_incentive_oracle(betas, params, 5.0)[0], rel=1e-7)


def test_stiff_penalty_meets_commitment():
    betas = {"a": BetaParams(3, 1), "b": BetaParams(5, 2)}
    res = design_incentive(betas, AggregatorParams(1e6, 0.0, 40.0, 2))
    assert res.expected_total == pytest.approx(40.0, rel=1e-5)


def test_clamped_when_commitment_already_met():
    res = design_incentive({"a": BetaParams(2.0, 30.0)}, AggregatorParams(1.0, 0.0, 10.0, 1))
    assert res.lambda_hat == 0.0 and res.clamped
    assert res.expected_total == 30.0


def test_singular_denominator():
    with pytest.raises(SingularConfigurationError):
        design_incentive({"a": BetaParams(-1.0, 0.0)}, AggregatorParams(1.0, 0.0, 10.0, 1))


def test_negative_slope_flagged():
    res = design_incentive({"a": BetaParams(-0.5, 0.0)}, AggregatorParams(1.0, 0.0, 10.0, 1))
    assert res.unstable_estimate


def test_parameter_validation():
    with pytest.raises(InvalidParameterError):
        AggregatorParams(0.0, 0.0, 1.0, 1)
    with pytest.raises(InvalidParameterError):
        AggregatorParams(1.0, 0.0, -1.0, 1)


def test_vectorised_broadcast_matches_design(rng):
    s1 = rng.uniform(5, 500, 50)
    s0 = rng.uniform(0, 300, 50)
    d = rng.uniform(100, 2000, 50)
    lam = broadcast_incentive(s1, s0, d, 1.0, 0.2)
    for k in range(50):
        res = design_incentive({"agg": BetaParams(s1[k], s0[k])}, AggregatorParams(1.0, 0.2, d[k], 1))
        assert lam[k] == pytest.approx(res.lambda_broadcast, rel=1e-12, abs=1e-12)


def test_broadcast_is_independent_of_ordering():
    betas = {f"c{i}": BetaParams(1.1 * i + 0.3, 0.7 * i) for i in range(5)}
    rev = dict(reversed(list(betas.items())))
    p = AggregatorParams(1.0, 0.0, 100.0, 5)
    assert design_incentive(betas, p).lambda_hat == design_incentive(rev, p).lambda_hat
    assert np.isfinite(design_incentive(betas, p).lambda_broadcast)
