import numpy as np
import pytest

from _helpers import make_dataset, make_series
from flowrl.baselines import historical_average_forecast, last_value_forecast
from flowrl.ingest import GeneratorConfig, generate_synthetic


def test_last_value_is_persistence():
    flows = np.arange(20, dtype=float) * 3
    ds = make_dataset(1, ["a"], [], {"a": make_series("a", flows)})
    anchors = np.array([5, 9, 14])
    for h in (1, 4):
        pred = last_value_forecast(ds, "a", anchors, h)
        np.testing.assert_array_equal(pred, flows[anchors - 1])


def test_last_value_rejects_anchor_zero():
    ds = make_dataset(1, ["a"], [], {"a": make_series("a", np.arange(10))})
    with pytest.raises(ValueError, match="anchors"):
        last_value_forecast(ds, "a", [0], 1)


def test_historical_average_matches_bruteforce():
    rng = np.random.default_rng(0)
    day = 6  # toy day length so several cycles fit in the series
    flows = rng.uniform(0, 50, 40)
    ds = make_dataset(1, ["a"], [], {"a": make_series("a", flows)})
    anchors = np.array([25, 30, 33])
    h = 2
    pred = historical_average_forecast(ds, "a", anchors, h, day_steps=day)
    lo, hi = ds.splits.train
    for i, t in enumerate(anchors):
        target_pos = (t + h - 1) % day
        members = [flows[j] for j in range(lo, hi) if j % day == target_pos]
        assert pred[i] == pytest.approx(np.mean(members), rel=1e-12)


def test_historical_average_on_pure_diurnal_is_exact():
    cfg = GeneratorConfig(periods=1, initial_nodes=3, steps_per_period=288 * 3, noise_sigma=0.0)
    ds = generate_synthetic(cfg, 2)[0]
    node = sorted(ds.series)[0]
    anchors = np.arange(600, 640)
    pred = historical_average_forecast(ds, node, anchors, 3)
    actual = ds.series[node].flow[anchors + 2]
    np.testing.assert_allclose(pred, actual, atol=1e-9)
