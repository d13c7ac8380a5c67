"""Agent-facing view of the stream: states, discrete actions, rewards.

A state fuses a sensor's own recent window with the mean window of its
graph neighbors plus its normalized degree. Flow values are discretized
into five classes that double as the action space; the reward combines
prediction closeness with speed and (inverse) occupancy terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import degree_map, neighbors
from .ingest import PeriodDataset

N_CLASSES = 5
WINDOW_DEFAULT = 12  # one hour of 5-min steps
OCC_EPSILON_DEFAULT = 0.05
CALIBRATION_PERCENTILE = 99.5


@dataclass(frozen=True)
class RewardWeights:
    """Weights of the prediction, speed, and occupancy reward terms."""

    lambda_p: float = 1.0
    lambda_c: float = 0.1
    lambda_o: float = 0.1

    def __post_init__(self):
        if self.lambda_p < 0 or self.lambda_c < 0 or self.lambda_o < 0:
            raise ValueError("reward weights must be nonnegative")
        if self.lambda_p == self.lambda_c == self.lambda_o == 0:
            raise ValueError("at least one reward weight must be positive")

    @property
    def total(self) -> float:
        return self.lambda_p + self.lambda_c + self.lambda_o


@dataclass(frozen=True)
class Calibration:
    """Per-period normalization bounds for the flow and speed channels."""

    flow_max: float
    speed_max: float

    def __post_init__(self):
        if self.flow_max <= 0 or self.speed_max <= 0:
            raise ValueError("calibration bounds must be positive")


def fit_calibration(dataset: PeriodDataset, percentile: float = CALIBRATION_PERCENTILE) -> Calibration:
    """Fit normalization bounds on the training split, pooled over sensors."""
    flows = dataset.flows_in("train")
    lo, hi = dataset.splits.train
    speeds = np.concatenate([dataset.series[sid].speed[lo:hi] for sid in sorted(dataset.series)])
    flow_max = float(np.percentile(flows, percentile))
    speed_max = float(np.percentile(speeds, percentile))
    return Calibration(flow_max=max(flow_max, 1e-9), speed_max=max(speed_max, 1e-9))


@dataclass(frozen=True)
class Discretizer:
    """Five flow classes bounded by four ascending edges, with per-bin
    representative flows (training medians) for mapping classes back to
    continuous values."""

    edges: np.ndarray  # shape (4,), strictly increasing
    representatives: np.ndarray  # shape (5,), one per class

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        reps = np.asarray(self.representatives, dtype=float)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "representatives", reps)
        if edges.shape != (N_CLASSES - 1,):
            raise ValueError(f"expected {N_CLASSES - 1} edges, got shape {edges.shape}")
        if reps.shape != (N_CLASSES,):
            raise ValueError(f"expected {N_CLASSES} representatives, got shape {reps.shape}")
        if not np.all(np.diff(edges) > 0):
            raise ValueError(f"edges must be strictly increasing, got {edges.tolist()}")
        for k in range(N_CLASSES):
            if int(classify(self, reps[k])) != k:
                raise ValueError(
                    f"representative {reps[k]} of class {k} falls outside its bin"
                )


def fit_discretizer(training_flows) -> Discretizer:
    """Fit class edges at the 20/40/60/80th percentiles of training flows.

    Representatives are the median training flow of each bin. Degenerate
    inputs (fewer than five distinct values, or percentile ties) raise.
    """
    flows = np.asarray(training_flows, dtype=float).ravel()
    if flows.size == 0:
        raise ValueError("cannot fit discretizer on empty flows")
    distinct = np.unique(flows)
    if distinct.size < N_CLASSES:
        raise ValueError(
            f"degenerate binning: need >= {N_CLASSES} distinct flow values, got {distinct.size}"
        )
    edges = np.percentile(flows, [20, 40, 60, 80])
    if not np.all(np.diff(edges) > 0):
        raise ValueError(f"degenerate binning: percentile edges not strictly increasing: {edges.tolist()}")
    classes = np.searchsorted(edges, flows, side="right")
    reps = np.empty(N_CLASSES)
    for k in range(N_CLASSES):
        members = flows[classes == k]
        if members.size == 0:
            raise ValueError(f"degenerate binning: class {k} has no training flows")
        reps[k] = np.median(members)
    return Discretizer(edges=edges, representatives=reps)


def classify(d: Discretizer, flow):
    """Map flow value(s) to class(es): class k covers [edge_{k-1}, edge_k)."""
    return np.searchsorted(d.edges, flow, side="right")


def representative_flow(d: Discretizer, action) -> np.ndarray:
    """Continuous flow value(s) standing in for predicted class(es)."""
    return d.representatives[np.asarray(action)]


def compute_rewards(pred, actual, speed_norm, occupancy, weights: RewardWeights,
                    occ_epsilon: float = OCC_EPSILON_DEFAULT) -> np.ndarray:
    """Vectorized reward: lambda_p*r_p + lambda_c*r_c + lambda_o*r_o.

    r_p = 1 - |pred - actual| / 4 rewards small class gaps; r_c is the
    normalized speed; r_o is the occupancy reciprocal clamped at
    occ_epsilon so it stays in (0, 1].
    """
    pred = np.asarray(pred)
    actual = np.asarray(actual)
    speed_norm = np.asarray(speed_norm, dtype=float)
    occupancy = np.asarray(occupancy, dtype=float)
    if np.any(pred < 0) or np.any(pred > N_CLASSES - 1) or np.any(actual < 0) or np.any(actual > N_CLASSES - 1):
        raise ValueError("classes must lie in [0, 4]")
    if np.any(speed_norm < 0) or np.any(speed_norm > 1):
        raise ValueError("speed_norm must lie in [0, 1]")
    if np.any(occupancy < 0) or np.any(occupancy > 1):
        raise ValueError("occupancy must lie in [0, 1]")
    r_p = 1.0 - np.abs(pred.astype(float) - actual.astype(float)) / (N_CLASSES - 1)
    r_c = speed_norm
    r_o = occ_epsilon / np.maximum(occupancy, occ_epsilon)
    return weights.lambda_p * r_p + weights.lambda_c * r_c + weights.lambda_o * r_o


def compute_reward(pred: int, actual: int, speed_norm: float, occupancy: float,
                   weights: RewardWeights, occ_epsilon: float = OCC_EPSILON_DEFAULT) -> float:
    """Scalar form of compute_rewards."""
    return float(compute_rewards(pred, actual, speed_norm, occupancy, weights, occ_epsilon))


class StateAssembler:
    """Builds state vectors for one period's dataset.

    Normalized channels and neighbor means are computed lazily per node
    and cached, so repeated state construction over a split is cheap.
    Neighbor windows are averaged in sorted-id order, which makes the
    result independent of edge iteration order.
    """

    def __init__(self, dataset: PeriodDataset, window: int = WINDOW_DEFAULT,
                 calibration: Calibration | None = None):
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.dataset = dataset
        self.window = window
        self.calibration = calibration if calibration is not None else fit_calibration(dataset)
        degrees = degree_map(dataset.snapshot)
        self._degree = degrees
        self._max_degree = max(degrees.values()) if degrees else 0
        self._channels: dict[str, np.ndarray] = {}
        self._neighbor_mean: dict[str, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return 6 * self.window + 1

    def node_channels(self, v: str) -> np.ndarray:
        """(T, 3) array of normalized flow, normalized speed, raw occupancy."""
        cached = self._channels.get(v)
        if cached is not None:
            return cached
        s = self.dataset.series.get(v)
        if s is None:
            raise ValueError(f"no series for node {v!r}")
        out = np.empty((len(s), 3))
        out[:, 0] = np.clip(s.flow / self.calibration.flow_max, 0.0, 1.0)
        out[:, 1] = np.clip(s.speed / self.calibration.speed_max, 0.0, 1.0)
        out[:, 2] = s.occupancy
        self._channels[v] = out
        return out

    def _neighbor_channels(self, v: str) -> np.ndarray:
        cached = self._neighbor_mean.get(v)
        if cached is not None:
            return cached
        nbrs = sorted(neighbors(self.dataset.snapshot, v))
        if not nbrs:
            out = np.zeros((self.dataset.length, 3))
        else:
            acc = np.zeros((self.dataset.length, 3))
            for u in nbrs:
                if u not in self.dataset.series:
                    raise ValueError(f"node {v!r} has neighbor {u!r} with no series")
                acc += self.node_channels(u)
            out = acc / len(nbrs)
        self._neighbor_mean[v] = out
        return out

    def states(self, v: str, ts) -> np.ndarray:
        """State matrix for node v at each time index in ts.

        Each row is [own flow window, own speed window, own occupancy
        window, neighbor-mean windows in the same channel order, degree],
        windows covering [t - window, t) oldest first; total 6W + 1.
        """
        ts = np.asarray(ts, dtype=int)
        if v not in self.dataset.snapshot.nodes:
            raise ValueError(f"unknown node {v!r}")
        if ts.size and int(ts.min()) < self.window:
            raise ValueError(
                f"time index {int(ts.min())} < window {self.window}: not enough history"
            )
        if ts.size and int(ts.max()) > self.dataset.length:
            raise ValueError(
                f"time index {int(ts.max())} beyond series length {self.dataset.length}"
            )
        own = self.node_channels(v)
        nbr = self._neighbor_channels(v)
        deg = self._degree[v] / self._max_degree if self._max_degree > 0 else 0.0
        W = self.window
        out = np.empty((ts.size, self.dim))
        own_win = np.lib.stride_tricks.sliding_window_view(own, W, axis=0)  # (T-W+1, 3, W)
        nbr_win = np.lib.stride_tricks.sliding_window_view(nbr, W, axis=0)
        rows = ts - W
        out[:, 0 : 3 * W] = own_win[rows].reshape(ts.size, 3 * W)
        out[:, 3 * W : 6 * W] = nbr_win[rows].reshape(ts.size, 3 * W)
        out[:, 6 * W] = deg
        return out

    def state(self, v: str, t: int) -> np.ndarray:
        return self.states(v, [t])[0]


def build_state(dataset: PeriodDataset, v: str, t: int, window: int = WINDOW_DEFAULT,
                calibration: Calibration | None = None) -> np.ndarray:
    """One state vector for (node, time); see StateAssembler.states."""
    return StateAssembler(dataset, window=window, calibration=calibration).state(v, t)
