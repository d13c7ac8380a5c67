"""Experience storage: reward-prioritized replay plus a consolidation memory.

Priorities equal the (floored) reward; sampling probabilities are
p_i^omega / sum_k p_k^omega, drawn with replacement. After each period the
top fraction of that period's experiences by priority is retained in a
consolidation memory and replayed into later training batches to guard
old-node knowledge against forgetting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PRIORITY_FLOOR = 1e-3
CAPACITY_DEFAULT = 100_000
CONSOLIDATION_FRACTION = 0.05


@dataclass(eq=False)
class Experience:
    """One transition (s, a, r, s') tagged with its origin."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool
    node_id: str
    period: int
    t: int  # time index of the prediction step within its period
    priority: float = 0.0


def assign_priority(e: Experience, floor: float = PRIORITY_FLOOR) -> float:
    """Reward-as-priority with a positive floor so nothing starves."""
    if e.reward < 0:
        raise ValueError(f"reward must be nonnegative, got {e.reward}")
    return max(float(e.reward), floor)


class ReplayBuffer:
    """Bounded FIFO ring of experiences with an incremental priority sum."""

    def __init__(self, capacity: int = CAPACITY_DEFAULT, priority_floor: float = PRIORITY_FLOOR):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.priority_floor = priority_floor
        self._items: list[Experience] = []
        self._priorities = np.zeros(capacity)
        self._next = 0
        self._priority_sum = 0.0

    def __len__(self) -> int:
        return len(self._items)

    def add(self, e: Experience) -> None:
        p = assign_priority(e, self.priority_floor)
        e.priority = p
        if len(self._items) < self.capacity:
            self._items.append(e)
            self._priorities[len(self._items) - 1] = p
            self._priority_sum += p
        else:
            evicted = self._items[self._next]
            self._priority_sum -= evicted.priority
            self._items[self._next] = e
            self._priorities[self._next] = p
            self._priority_sum += p
            self._next = (self._next + 1) % self.capacity

    def extend(self, experiences) -> None:
        for e in experiences:
            self.add(e)

    def reset(self) -> None:
        self._items.clear()
        self._priorities[:] = 0.0
        self._next = 0
        self._priority_sum = 0.0

    @property
    def priority_sum(self) -> float:
        return self._priority_sum

    def recompute_priority_sum(self) -> float:
        return float(sum(e.priority for e in self._items))

    def priorities(self) -> np.ndarray:
        return self._priorities[: len(self._items)]

    def item(self, i: int) -> Experience:
        return self._items[i]

    def items(self) -> list[Experience]:
        return list(self._items)


def sampling_probabilities(priorities, omega: float = 1.0) -> np.ndarray:
    """Normalized sampling distribution p_i^omega / sum_k p_k^omega."""
    p = np.asarray(priorities, dtype=float)
    if p.size == 0:
        raise ValueError("no priorities to normalize")
    if np.any(p <= 0):
        raise ValueError("priorities must be positive")
    if omega < 0:
        raise ValueError(f"omega must be >= 0, got {omega}")
    w = p**omega
    return w / w.sum()


def sample(buffer: ReplayBuffer, batch_size: int, omega: float,
           rng: np.random.Generator) -> list[Experience]:
    """Draw a batch with replacement under the priority distribution."""
    if len(buffer) == 0:
        raise ValueError("cannot sample from an empty replay buffer")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    probs = sampling_probabilities(buffer.priorities(), omega)
    idx = rng.choice(len(buffer), size=batch_size, replace=True, p=probs)
    return [buffer.item(int(i)) for i in idx]


def retain_top_fraction(experiences, fraction: float = CONSOLIDATION_FRACTION) -> list[Experience]:
    """The ceil(fraction*N) highest-priority experiences of a period.

    Ties break by (node_id, t) ascending, so the retained set is
    deterministic. The result is a subset of the input.
    """
    items = list(experiences)
    if not items:
        raise ValueError("cannot retain from an empty collection")
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    k = math.ceil(fraction * len(items))
    ordered = sorted(items, key=lambda e: (-assign_priority(e), e.node_id, e.t))
    return ordered[:k]


class ConsolidationMemory:
    """Retained top-priority experiences, keyed by the period that produced them."""

    def __init__(self):
        self._by_period: dict[int, list[Experience]] = {}
        self._flat: list[Experience] = []

    def __len__(self) -> int:
        return len(self._flat)

    def periods(self) -> list[int]:
        return sorted(self._by_period)

    def for_period(self, period: int) -> list[Experience]:
        return list(self._by_period.get(period, []))

    def add_period(self, period: int, retained) -> None:
        retained = list(retained)
        if period in self._by_period:
            raise ValueError(f"period {period} already retained")
        self._by_period[period] = retained
        self._flat.extend(retained)

    def all(self) -> list[Experience]:
        return list(self._flat)

    def draw(self, count: int, rng: np.random.Generator) -> list[Experience]:
        """Uniform draw with replacement from all retained experiences."""
        if count == 0:
            return []
        if not self._flat:
            raise ValueError("consolidation memory is empty")
        idx = rng.integers(0, len(self._flat), size=count)
        return [self._flat[int(i)] for i in idx]


def mixed_batch(buffer: ReplayBuffer, memory: ConsolidationMemory, batch_size: int,
                rho: float, omega: float, rng: np.random.Generator) -> list[Experience]:
    """A batch of exactly batch_size: round(rho*B) uniform memory replays
    (skipped while the memory is empty), remainder prioritized from the
    buffer.

    Memory items are drawn first, then buffer items, so the draw order is
    reproducible for a fixed generator.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if len(buffer) == 0:
        raise ValueError("cannot build a batch from an empty replay buffer")
    n_memory = int(rho * batch_size + 0.5) if len(memory) > 0 else 0
    out = memory.draw(n_memory, rng)
    if n_memory < batch_size:
        out.extend(sample(buffer, batch_size - n_memory, omega, rng))
    return out


def experiences_to_arrays(experiences) -> dict[str, np.ndarray]:
    """Columnar arrays for an npz dump; inverse of experiences_from_arrays."""
    items = list(experiences)
    if items:
        states = np.stack([e.state for e in items])
        next_states = np.stack([e.next_state for e in items])
    else:
        states = np.zeros((0, 0))
        next_states = np.zeros((0, 0))
    return {
        "state": states,
        "action": np.array([e.action for e in items], dtype=int),
        "reward": np.array([e.reward for e in items], dtype=float),
        "next_state": next_states,
        "terminal": np.array([e.terminal for e in items], dtype=bool),
        "node_id": np.array([e.node_id for e in items], dtype=np.str_),
        "period": np.array([e.period for e in items], dtype=int),
        "t": np.array([e.t for e in items], dtype=int),
        "priority": np.array([e.priority for e in items], dtype=float),
    }


def experiences_from_arrays(arrays: dict) -> list[Experience]:
    n = len(arrays["action"])
    return [
        Experience(
            state=np.array(arrays["state"][i], dtype=float),
            action=int(arrays["action"][i]),
            reward=float(arrays["reward"][i]),
            next_state=np.array(arrays["next_state"][i], dtype=float),
            terminal=bool(arrays["terminal"][i]),
            node_id=str(arrays["node_id"][i]),
            period=int(arrays["period"][i]),
            t=int(arrays["t"][i]),
            priority=float(arrays["priority"][i]),
        )
        for i in range(n)
    ]
