import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adrpoison import (AlphaParams, BetaParams, CustomerTruth, DREventRecord, InvalidInputError,
                       InvalidParameterError, alpha_to_beta, beta_to_alpha, customer_utility,
                       optimal_response, realized_response, responses)

pos = st.floats(0.05, 50.0)
real = st.floats(-50.0, 50.0)


@given(pos, real)
def test_alpha_beta_round_trip(a1, a0):
    back = beta_to_alpha(alpha_to_beta(AlphaParams(a1, a0)))
    assert back.alpha1 == pytest.approx(a1, rel=1e-12)
    assert back.alpha0 == pytest.approx(a0, rel=1e-12, abs=1e-12)


def test_beta_from_alpha_by_hand():
    b = alpha_to_beta(AlphaParams(0.5, -3.0))
    assert (b.beta1, b.beta0) == (2.0, 6.0)


@settings(max_examples=50)
@given(pos, real, st.floats(0.0, 5.0))
def test_response_is_grid_argmin_of_net_cost(a1, a0, lam):
    # net cost U(x) - lam * x minimised on a fine grid around the analytic point
    beta = alpha_to_beta(AlphaParams(a1, a0))
    x_star = optimal_response(beta, lam)
    grid = np.linspace(x_star - 10, x_star + 10, 200001)
    cost = customer_utility(AlphaParams(a1, a0), grid) - lam * grid
    assert grid[np.argmin(cost)] == pytest.approx(x_star, abs=2e-4)


def test_response_clipped_to_capacity():
    b = BetaParams(10.0, 5.0)
    assert optimal_response(b, 10.0, x_max=50.0) == 50.0
    assert optimal_response(BetaParams(1.0, -5.0), 1.0, x_max=50.0) == 0.0
    assert optimal_response(b, 1.0, x_max=50.0) == 15.0


def test_invalid_inputs_rejected():
    with pytest.raises(InvalidParameterError):
        AlphaParams(0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        optimal_response(BetaParams(1, 0), -0.1)
    with pytest.raises(InvalidParameterError):
        beta_to_alpha(BetaParams(-1.0, 0.0))
    with pytest.raises(InvalidInputError):
        DREventRecord(1, 1.0, {"a": -0.5})
    with pytest.raises(InvalidParameterError):
        CustomerTruth("a", BetaParams(1, 1), x_max=0)


def test_realized_response_mean_matches_model(rng):
    truth = CustomerTruth("a", BetaParams(8.0, 12.0), 50.0, 0.5)
    draws = np.array([realized_response(truth, 1.5, rng) for _ in range(20000)])
    assert draws.mean() == pytest.approx(24.0, abs=0.02)
    assert draws.std() == pytest.approx(0.5, rel=0.03)
    assert draws.min() >= 0 and draws.max() <= 50


def test_realized_response_respects_capacity(rng):
    truth = CustomerTruth("a", BetaParams(30.0, 20.0), 50.0, 0.5)
    assert realized_response(truth, 2.0, rng) == 50.0


def test_vectorised_responses_match_scalar():
    b1 = np.array([2.0, 5.0, 18.0])
    b0 = np.array([3.0, -1.0, 10.0])
    lam = np.array([0.5, 1.0, 2.5])
    out = responses(b1, b0, lam, x_max=50.0)
    for i, l in enumerate(lam):
        for j in range(3):
            assert out[i, j] == optimal_response(BetaParams(b1[j], b0[j]), l, 50.0)


def test_record_total():
    assert DREventRecord(3, 1.2, {"a": 1.5, "b": 2.5}).total == 4.0
