import numpy as np
import pytest

from adrpoison import (ConfigError, DREventRecord, HistoryParseError, OrderingError, ReferentialError,
                       load_customers, load_history, merge_config, save_customers, save_history,
                       scenario_from_data, synth_scenario)
from adrpoison.scenario import commitment_for, config_hash
from adrpoison.incentive import broadcast_incentive


def test_default_scenario_ranges(default_scenario):
    sc = default_scenario
    assert sc.n == 50 and len(sc.history) == 20
    x = sc.curtailment_matrix()
    assert x.min() >= 5.0 and x.max() <= 50.0
    lam = sc.history_lambdas()
    assert lam.min() >= 1.0 and lam.max() <= 2.0
    b1, b0, _, _ = sc.true_arrays()
    assert np.all((b1 >= 2) & (b1 <= 20))
    assert np.all(b0 + b1 >= 5) and np.all(b0 + 2 * b1 <= 50)


def test_seeded_synthesis_is_bit_identical():
    a, b = synth_scenario(None, 42), synth_scenario(None, 42)
    assert a.history == b.history and a.customers == b.customers
    assert np.array_equal(a.future_commitments, b.future_commitments)
    assert synth_scenario(None, 43).history != a.history


def test_minimal_scenario():
    sc = synth_scenario({"customers": {"n": 1}, "events": {"n_history": 2}}, 0)
    assert sc.n == 1 and len(sc.history) == 2


def test_commitments_reproduce_benign_incentives(default_scenario):
    sc = default_scenario
    agg = sc.true_aggregate()
    lam = broadcast_incentive(agg.beta1, agg.beta0, sc.history_commitments, 1.0, 0.0)
    assert np.allclose(lam, sc.history_lambdas())
    assert np.allclose(commitment_for(lam, agg, sc.aggregator), sc.history_commitments)


def test_infeasible_and_unknown_config():
    with pytest.raises(ConfigError):
        synth_scenario({"customers": {"curtailment_range": [5, 6]}}, 0)
    with pytest.raises(ConfigError):
        synth_scenario({"customers": {"curtailment_range": [5, 80]}}, 0)
    with pytest.raises(ConfigError):
        merge_config({"customers": {"colour": 1}})
    with pytest.raises(ConfigError):
        merge_config({"bogus": {}})


def test_config_hash_is_stable():
    assert config_hash(merge_config({})) == config_hash(merge_config(None))
    assert config_hash(merge_config({"learner": {"eta": 0.02}})) != config_hash(merge_config(None))


def test_history_round_trip(tmp_path, default_scenario):
    path = tmp_path / "h.csv"
    save_history(default_scenario.history, path)
    assert load_history(path, default_scenario.ids) == list(default_scenario.history)


def test_customers_round_trip(tmp_path, default_scenario):
    path = tmp_path / "c.csv"
    save_customers(default_scenario.customers, path)
    assert tuple(load_customers(path)) == default_scenario.customers


HEADER = "event_index,lambda_usd_per_kwh,customer_id,curtailment_kw\n"


def _write(tmp_path, body):
    p = tmp_path / "h.csv"
    p.write_text(HEADER + body)
    return p


def test_three_row_file(tmp_path):
    recs = load_history(_write(tmp_path, "1,1.5,a,10\n1,1.5,b,12\n1,1.5,c,8.5\n"))
    assert len(recs) == 1 and len(recs[0].curtailments) == 3


def test_parse_errors_name_the_line(tmp_path):
    with pytest.raises(HistoryParseError, match="line 3"):
        load_history(_write(tmp_path, "1,1.5,a,10\n1,1.5,b,-2\n"))
    with pytest.raises(HistoryParseError, match="line 2"):
        load_history(_write(tmp_path, "1,abc,a,10\n"))
    with pytest.raises(HistoryParseError, match="line 2"):
        load_history(_write(tmp_path, "1,1.5,a\n"))
    with pytest.raises(HistoryParseError, match="line 1"):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c,d\n")
        load_history(p)


def test_ordering_and_reference_errors(tmp_path):
    with pytest.raises(OrderingError):
        load_history(_write(tmp_path, "2,1.5,a,10\n1,1.5,a,12\n"))
    with pytest.raises(ReferentialError):
        load_history(_write(tmp_path, "1,1.5,zz,10\n"), ["a"])
    with pytest.raises(HistoryParseError):
        load_history(_write(tmp_path, "1,1.5,a,10\n1,1.6,b,12\n"))


def test_scenario_validates_history(default_scenario):
    bad = [DREventRecord(1, 1.0, {"nobody": 1.0})]
    with pytest.raises(ReferentialError):
        default_scenario.with_history(bad)
    with pytest.raises(OrderingError):
        default_scenario.with_history([DREventRecord(2, 1.0, {}), DREventRecord(2, 1.0, {})])


def test_scenario_from_data_shares_future_draws(default_scenario):
    sc = scenario_from_data(default_scenario.customers, default_scenario.history, None, 0)
    assert np.allclose(sc.future_commitments, default_scenario.future_commitments)
    assert sc.ids == default_scenario.ids


def test_learner_inits(default_scenario):
    from dataclasses import replace
    assert replace(default_scenario, init="truth").initial_learner().aggregate() == default_scenario.true_aggregate()
    assert replace(default_scenario, init="zero").initial_learner().aggregate().beta1 == 0
    with pytest.raises(ConfigError):
        replace(default_scenario, init="magic").initial_learner()
