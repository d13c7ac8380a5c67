import math
from types import SimpleNamespace

import numpy as np
import pytest

from _helpers import make_dataset, make_series
from flowrl.drift import NodeHistogram, build_histogram, detect, kl_divergence
from flowrl.ingest import DriftSpec, GeneratorConfig, generate_synthetic


def hist(masses, edges=None, node="n", period=1):
    masses = np.asarray(masses, dtype=float)
    if edges is None:
        edges = np.arange(masses.size + 1, dtype=float)
    return NodeHistogram(node_id=node, period=period, edges=edges, masses=masses)


class TestBuildHistogram:
    def test_counting_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            values = rng.uniform(0, 100, int(rng.integers(5, 200)))
            edges = np.sort(rng.uniform(0, 100, 7))
            edges[0], edges[-1] = 0.0, 100.0
            if np.any(np.diff(edges) <= 0):
                continue
            lam = float(rng.uniform(0.1, 2))
            series = make_series("x", values, np.zeros(values.size), np.zeros(values.size))
            h = build_histogram(series, edges, lam)
            counts = np.zeros(edges.size - 1)
            for v in values:  # brute-force binning, last bin closed above
                for k in range(edges.size - 1):
                    upper_ok = v < edges[k + 1] or (k == edges.size - 2 and v <= edges[-1])
                    if edges[k] <= v and upper_ok:
                        counts[k] += 1
                        break
            expected = (counts + lam) / (values.size + (edges.size - 1) * lam)
            np.testing.assert_allclose(h.masses, expected, atol=1e-12)
            assert abs(h.masses.sum() - 1) < 1e-9

    def test_single_bin_mass_approaches_one(self):
        series = make_series("x", np.full(100, 5.0))
        h = build_histogram(series, np.array([0.0, 4.0, 6.0, 10.0]), smoothing=1e-9)
        assert h.masses[1] > 0.999999

    def test_one_value_per_bin_with_unit_smoothing_is_uniform(self):
        series = make_series("x", np.array([0.5, 1.5, 2.5, 3.5, 4.5]))
        h = build_histogram(series, np.arange(6, dtype=float), smoothing=1.0)
        np.testing.assert_allclose(h.masses, 0.2)

    def test_empty_series_rejected(self):
        fake = SimpleNamespace(flow=np.array([]), sensor_id="x")
        with pytest.raises(ValueError, match="empty"):
            build_histogram(fake, np.array([0.0, 1.0, 2.0]))

    def test_bad_edges_rejected(self):
        series = make_series("x", np.arange(10))
        with pytest.raises(ValueError, match="ascending"):
            build_histogram(series, np.array([0.0, 2.0, 1.0]))


class TestKL:
    def test_identical_histograms_zero(self):
        rng = np.random.default_rng(1)
        masses = rng.dirichlet(np.ones(8))
        assert kl_divergence(hist(masses), hist(masses)) == 0.0

    def test_two_term_hand_value(self):
        p = hist([0.5, 0.5])
        q = hist([0.9, 0.1])
        assert abs(kl_divergence(p, q) - 0.5108) < 1e-4

    def test_direct_sum_oracle_and_nonnegativity(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            bins = int(rng.integers(2, 12))
            p = rng.dirichlet(np.ones(bins))
            q = rng.dirichlet(np.ones(bins))
            got = kl_divergence(hist(p), hist(q))
            expected = sum(p[k] * math.log(p[k] / q[k]) for k in range(bins))
            assert abs(got - expected) < 1e-12
            assert got >= -1e-15

    def test_mismatched_binning_rejected(self):
        with pytest.raises(ValueError, match="binned differently"):
            kl_divergence(hist([0.5, 0.5]), hist([0.2, 0.3, 0.5]))
        with pytest.raises(ValueError, match="binned differently"):
            kl_divergence(hist([0.5, 0.5]), hist([0.5, 0.5], edges=np.array([0.0, 0.5, 2.0])))

    def test_zero_mass_q_rejected(self):
        with pytest.raises(ValueError, match="zero-mass"):
            kl_divergence(hist([0.5, 0.5]), hist([1.0, 0.0]))

    def test_histogram_invariants_enforced(self):
        with pytest.raises(ValueError, match="sum"):
            hist([0.5, 0.4])
        with pytest.raises(ValueError, match="ascending"):
            hist([0.5, 0.5], edges=np.array([1.0, 1.0, 2.0]))


def two_periods(nodes, flows1, flows2, extra_nodes2=(), length=40):
    series1 = {n: make_series(n, flows1[n]) for n in nodes}
    ds1 = make_dataset(1, nodes, [(nodes[0], n) for n in nodes[1:]], series1)
    nodes2 = list(nodes) + list(extra_nodes2)
    series2 = {n: make_series(n, flows2[n]) for n in nodes2}
    ds2 = make_dataset(2, nodes2, [(nodes2[0], n) for n in nodes2[1:]], series2)
    return ds1, ds2


class TestDetect:
    def test_identical_periods_all_zero_kl(self):
        rng = np.random.default_rng(3)
        nodes = [f"n{i}" for i in range(6)]
        flows = {n: rng.uniform(0, 50, 40) for n in nodes}
        ds1, ds2 = two_periods(nodes, flows, flows)
        report = detect(ds1, ds2)
        assert all(v == 0.0 for v in report.scores.values())
        # ceil(0.1 * 6) = 1, ties resolve to the lowest node id
        assert report.top_kl_nodes == ("n0",)
        assert report.candidates == ("n0",)
        assert report.new_nodes == ()

    def test_new_nodes_always_candidates(self):
        rng = np.random.default_rng(4)
        nodes = [f"n{i}" for i in range(4)]
        flows1 = {n: rng.uniform(0, 50, 40) for n in nodes}
        flows2 = {n: flows1[n] for n in nodes}
        flows2["extra"] = rng.uniform(0, 50, 40)
        _, ds2 = two_periods(nodes, flows1, flows2, extra_nodes2=["extra"])
        ds1, _ = two_periods(nodes, flows1, flows1)
        report = detect(ds1, ds2)
        assert "extra" in report.candidates
        assert report.new_nodes == ("extra",)

    def test_single_survivor_is_candidate(self):
        rng = np.random.default_rng(5)
        flows = {"solo": rng.uniform(0, 50, 40)}
        ds1, ds2 = two_periods(["solo"], flows, flows)
        report = detect(ds1, ds2)
        assert report.candidates == ("solo",)  # ceil(0.1 * 1) = 1

    def test_candidate_count_identity(self):
        rng = np.random.default_rng(6)
        for trial in range(10):
            n = int(rng.integers(2, 15))
            nodes = [f"n{i:02d}" for i in range(n)]
            flows1 = {v: rng.uniform(0, 50, 40) for v in nodes}
            flows2 = {v: rng.uniform(0, 50, 40) for v in nodes}
            extra = [f"x{i}" for i in range(int(rng.integers(0, 4)))]
            for v in extra:
                flows2[v] = rng.uniform(0, 50, 40)
            ds1, ds2 = two_periods(nodes, flows1, flows2, extra_nodes2=extra)
            report = detect(ds1, ds2, fraction=0.10)
            assert len(report.candidates) == len(extra) + math.ceil(0.10 * n)

    def test_removed_nodes_excluded(self):
        rng = np.random.default_rng(7)
        nodes = ["keep0", "keep1", "gone"]
        flows1 = {v: rng.uniform(0, 50, 40) for v in nodes}
        series1 = {v: make_series(v, flows1[v]) for v in nodes}
        ds1 = make_dataset(1, nodes, [("keep0", "gone")], series1)
        series2 = {v: make_series(v, flows1[v]) for v in ("keep0", "keep1")}
        ds2 = make_dataset(2, ["keep0", "keep1"], [("keep0", "keep1")], series2)
        report = detect(ds1, ds2)
        assert "gone" not in report.candidates
        assert "gone" not in report.scores

    def test_relabeling_equivariance(self):
        rng = np.random.default_rng(8)
        nodes = [f"n{i}" for i in range(8)]
        flows1 = {v: rng.uniform(0, 50, 60) for v in nodes}
        flows2 = {v: f + rng.uniform(0, 3, 60) for v, f in flows1.items()}
        flows2["n3"] = flows1["n3"] + 40.0  # distinct drift so ranking has no ties
        ds1, ds2 = two_periods(nodes, flows1, flows2)
        report = detect(ds1, ds2)

        mapping = {v: f"z{9 - i}" for i, v in enumerate(nodes)}
        r_flows1 = {mapping[v]: flows1[v] for v in nodes}
        r_flows2 = {mapping[v]: flows2[v] for v in nodes}
        rds1, rds2 = two_periods([mapping[v] for v in nodes], r_flows1, r_flows2)
        r_report = detect(rds1, rds2)
        assert {mapping[v] for v in report.candidates} == set(r_report.candidates)

    def test_planted_shift_dominates_ranking(self):
        cfg = GeneratorConfig(
            periods=2, initial_nodes=10, growth_per_period=0, steps_per_period=400,
            noise_sigma=4.0, drift=(DriftSpec("s0004", 2, 45.0),), phase_jitter_steps=20.0,
        )
        ds1, ds2 = generate_synthetic(cfg, 11)
        report = detect(ds1, ds2)
        assert report.top_kl_nodes == ("s0004",)
        ranked = sorted(report.scores, key=lambda v: -report.scores[v])
        assert ranked[0] == "s0004"
        assert report.scores["s0004"] > 5 * report.scores[ranked[1]]

    def test_non_consecutive_rejected(self):
        rng = np.random.default_rng(9)
        flows = {"a": rng.uniform(0, 10, 40)}
        ds1 = make_dataset(1, ["a"], [], {"a": make_series("a", flows["a"])})
        ds3 = make_dataset(3, ["a"], [], {"a": make_series("a", flows["a"])})
        with pytest.raises(ValueError, match="consecutive"):
            detect(ds1, ds3)

    def test_json_schema(self):
        rng = np.random.default_rng(10)
        nodes = ["a", "b"]
        flows = {v: rng.uniform(0, 10, 40) for v in nodes}
        ds1, ds2 = two_periods(nodes, flows, flows)
        payload = detect(ds1, ds2).to_json_dict()
        assert set(payload) == {"period", "scores", "candidates"}
        assert payload["period"] == 2
        assert all(set(entry) == {"node", "kl"} for entry in payload["scores"])
        assert isinstance(payload["candidates"], list)


def test_drift_config_validation():
    from flowrl.drift import DriftConfig

    with pytest.raises(ValueError):
        DriftConfig(fraction=1.5)
    with pytest.raises(ValueError):
        DriftConfig(bins=1)
    with pytest.raises(ValueError):
        DriftConfig(smoothing=-0.1)
