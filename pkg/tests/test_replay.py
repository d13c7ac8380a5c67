import math

import numpy as np
import pytest

from flowrl.replay import (
    ConsolidationMemory,
    Experience,
    ReplayBuffer,
    assign_priority,
    experiences_from_arrays,
    experiences_to_arrays,
    mixed_batch,
    retain_top_fraction,
    sample,
    sampling_probabilities,
)


def exp(reward=0.5, node="n0", t=0, period=1, action=0):
    return Experience(
        state=np.array([float(t), reward]),
        action=action,
        reward=reward,
        next_state=np.array([float(t) + 1, reward]),
        terminal=False,
        node_id=node,
        period=period,
        t=t,
    )


class TestPriority:
    def test_reward_passthrough(self):
        assert assign_priority(exp(reward=0.9)) == 0.9

    def test_floor_applies_at_zero(self):
        assert assign_priority(exp(reward=0.0)) == 1e-3

    def test_elementwise_max_oracle(self):
        rng = np.random.default_rng(0)
        rewards = rng.uniform(0, 1.2, 200)
        rewards[rng.integers(0, 200, 30)] = 0.0
        got = np.array([assign_priority(exp(reward=float(r))) for r in rewards])
        np.testing.assert_array_equal(got, np.maximum(rewards, 1e-3))

    def test_negative_reward_rejected(self):
        with pytest.raises(ValueError):
            assign_priority(exp(reward=-0.1))


class TestSamplingProbabilities:
    def test_equal_priorities_uniform(self):
        p = sampling_probabilities([2.0, 2.0, 2.0, 2.0])
        np.testing.assert_allclose(p, 0.25)

    def test_three_one_split(self):
        np.testing.assert_allclose(sampling_probabilities([3.0, 1.0]), [0.75, 0.25])

    def test_omega_zero_flattens(self):
        p = sampling_probabilities([10.0, 1.0, 0.1], omega=0.0)
        np.testing.assert_allclose(p, 1 / 3)

    def test_normalization_tight(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            pr = rng.uniform(1e-3, 10, size=int(rng.integers(1, 50)))
            omega = float(rng.uniform(0, 3))
            assert abs(sampling_probabilities(pr, omega).sum() - 1.0) < 1e-12

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        pr = rng.uniform(0.1, 5, 20)
        for omega in (0.0, 0.5, 1.0, 2.0):
            p1 = sampling_probabilities(pr, omega)
            p2 = sampling_probabilities(123.456 * pr, omega)
            np.testing.assert_allclose(p1, p2, rtol=1e-12)


class TestBuffer:
    def test_fifo_eviction_and_priority_sum(self):
        rng = np.random.default_rng(3)
        buf = ReplayBuffer(capacity=10)
        inserted = []
        for i in range(50):
            e = exp(reward=float(rng.uniform(0, 1)), node=f"n{i}", t=i)
            inserted.append(e)
            buf.add(e)
            assert np.isclose(buf.priority_sum, buf.recompute_priority_sum(), rtol=1e-9)
        assert len(buf) == 10
        assert {e.node_id for e in buf.items()} == {f"n{i}" for i in range(40, 50)}

    def test_sample_distribution_three_one(self):
        buf = ReplayBuffer(capacity=4)
        buf.add(exp(reward=3.0, node="heavy"))
        buf.add(exp(reward=1.0, node="light"))
        rng = np.random.default_rng(42)
        batch = sample(buf, 100_000, 1.0, rng)
        freq = sum(1 for e in batch if e.node_id == "heavy") / len(batch)
        assert 0.74 <= freq <= 0.76

    def test_sample_deterministic_for_fixed_seed(self):
        buf = ReplayBuffer()
        for i in range(20):
            buf.add(exp(reward=0.1 * (i + 1), node=f"n{i}", t=i))
        b1 = sample(buf, 32, 1.0, np.random.default_rng(9))
        b2 = sample(buf, 32, 1.0, np.random.default_rng(9))
        assert [e.node_id for e in b1] == [e.node_id for e in b2]

    def test_empty_buffer_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            sample(ReplayBuffer(), 4, 1.0, np.random.default_rng(0))

    def test_reset_clears_everything(self):
        buf = ReplayBuffer(capacity=5)
        for i in range(7):
            buf.add(exp(node=f"n{i}"))
        buf.reset()
        assert len(buf) == 0
        assert buf.priority_sum == 0.0


class TestRetainTopFraction:
    def test_twenty_distinct_keeps_one(self):
        items = [exp(reward=0.05 * (i + 1), node=f"n{i:02d}", t=i) for i in range(20)]
        kept = retain_top_fraction(items, 0.05)
        assert len(kept) == 1
        assert kept[0].reward == 1.0

    def test_all_equal_uses_tie_order(self):
        items = [exp(reward=0.5, node=f"n{i:03d}", t=i) for i in range(100)]
        kept = retain_top_fraction(items, 0.05)
        assert [e.node_id for e in kept] == [f"n{i:03d}" for i in range(5)]

    def test_matches_iterative_selection_oracle(self):
        rng = np.random.default_rng(4)
        items = [
            exp(reward=float(rng.choice([0.2, 0.5, 0.8, 1.0])), node=f"n{rng.integers(0, 50):02d}", t=i)
            for i in range(1000)
        ]
        kept = retain_top_fraction(items, 0.05)
        # oracle: repeatedly extract the max-priority item, ties by (node_id, t)
        pool = list(items)
        expected = []
        for _ in range(math.ceil(0.05 * len(items))):
            best = None
            for e in pool:
                if best is None:
                    best = e
                    continue
                kb = (-assign_priority(best), best.node_id, best.t)
                ke = (-assign_priority(e), e.node_id, e.t)
                if ke < kb:
                    best = e
            expected.append(best)
            pool.remove(best)
        assert kept == expected

    def test_size_is_ceil_fraction(self):
        rng = np.random.default_rng(5)
        for n in range(1, 61):
            items = [exp(reward=float(rng.uniform(0, 1)), node=f"n{i}", t=i) for i in range(n)]
            assert len(retain_top_fraction(items, 0.05)) == math.ceil(0.05 * n)
            assert len(retain_top_fraction(items, 0.37)) == math.ceil(0.37 * n)

    def test_result_is_subset(self):
        items = [exp(reward=0.1 * i, node=f"n{i}", t=i) for i in range(1, 30)]
        kept = retain_top_fraction(items, 0.2)
        assert all(e in items for e in kept)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            retain_top_fraction([], 0.05)


def fill_buffer(n=40):
    buf = ReplayBuffer()
    for i in range(n):
        buf.add(exp(reward=0.5, node=f"buf{i}", t=i))
    return buf


def fill_memory(n=10):
    mem = ConsolidationMemory()
    mem.add_period(1, [exp(reward=0.9, node=f"mem{i}", t=i, period=1) for i in range(n)])
    return mem


class TestMixedBatch:
    def test_rho_zero_is_pure_buffer(self):
        batch = mixed_batch(fill_buffer(), fill_memory(), 64, 0.0, 1.0, np.random.default_rng(0))
        assert len(batch) == 64
        assert all(e.node_id.startswith("buf") for e in batch)

    def test_rho_one_is_pure_memory(self):
        batch = mixed_batch(fill_buffer(), fill_memory(), 64, 1.0, 1.0, np.random.default_rng(0))
        assert len(batch) == 64
        assert all(e.node_id.startswith("mem") for e in batch)

    def test_quarter_mix_counts_exact(self):
        buf, mem = fill_buffer(), fill_memory()
        for seed in range(20):
            batch = mixed_batch(buf, mem, 128, 0.25, 1.0, np.random.default_rng(seed))
            assert len(batch) == 128
            assert sum(1 for e in batch if e.node_id.startswith("mem")) == 32

    def test_empty_memory_falls_back_to_buffer(self):
        batch = mixed_batch(fill_buffer(), ConsolidationMemory(), 32, 0.5, 1.0, np.random.default_rng(0))
        assert len(batch) == 32
        assert all(e.node_id.startswith("buf") for e in batch)

    def test_empty_buffer_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            mixed_batch(ReplayBuffer(), fill_memory(), 8, 0.25, 1.0, np.random.default_rng(0))

    def test_batch_size_exact_for_odd_mixes(self):
        buf, mem = fill_buffer(), fill_memory()
        for b, rho in ((7, 0.3), (13, 0.5), (1, 1.0), (1, 0.0), (99, 0.77)):
            batch = mixed_batch(buf, mem, b, rho, 1.0, np.random.default_rng(1))
            assert len(batch) == b


class TestConsolidationMemory:
    def test_period_bookkeeping(self):
        mem = ConsolidationMemory()
        mem.add_period(1, [exp(node="a", period=1)])
        mem.add_period(2, [exp(node="b", period=2), exp(node="c", period=2)])
        assert mem.periods() == [1, 2]
        assert len(mem) == 3
        assert [e.node_id for e in mem.for_period(2)] == ["b", "c"]

    def test_duplicate_period_rejected(self):
        mem = ConsolidationMemory()
        mem.add_period(1, [exp()])
        with pytest.raises(ValueError):
            mem.add_period(1, [exp()])

    def test_draw_uniform_with_replacement(self):
        mem = fill_memory(3)
        drawn = mem.draw(1000, np.random.default_rng(0))
        assert len(drawn) == 1000
        ids = {e.node_id for e in drawn}
        assert ids == {"mem0", "mem1", "mem2"}


def test_experience_array_round_trip():
    items = [exp(reward=0.1 * i, node=f"n{i}", t=i, action=i % 5) for i in range(7)]
    for e in items:
        e.priority = assign_priority(e)
    back = experiences_from_arrays(experiences_to_arrays(items))
    assert len(back) == len(items)
    for a, b in zip(items, back):
        np.testing.assert_array_equal(a.state, b.state)
        np.testing.assert_array_equal(a.next_state, b.next_state)
        assert (a.action, a.reward, a.terminal, a.node_id, a.period, a.t, a.priority) == (
            b.action, b.reward, b.terminal, b.node_id, b.period, b.t, b.priority,
        )
