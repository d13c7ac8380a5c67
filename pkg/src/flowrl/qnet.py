"""Dueling fully-connected Q-network with exact analytic gradients.

Two rectifier hidden layers feed a scalar value head and a five-way
advantage head; Q(s, a) = V(s) + A(s, a) - mean_a A(s, a). Everything is
plain numpy: forward, backward, and the optimizer are written out so the
gradients can be checked against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

N_ACTIONS = 5
HIDDEN_DEFAULT = 64
CHECKPOINT_VERSION = 1

PARAM_NAMES = ("w1", "b1", "w2", "b2", "wv", "bv", "wa", "ba")


def dueling_aggregate(value, advantages) -> np.ndarray:
    """Combine value and advantages: V + A - mean(A).

    Computed as V + (n*A - sum(A)) / n; the scaled form keeps the
    centering exact whenever the advantage entries share a binary grid,
    so a common offset cancels bit-for-bit.
    """
    adv = np.asarray(advantages, dtype=float)
    n = adv.shape[-1]
    return np.asarray(value, dtype=float) + (n * adv - adv.sum(axis=-1, keepdims=True)) / n


@dataclass(eq=False)
class QNetwork:
    """Parameter set of the dueling net; arrays are mutated by training."""

    w1: np.ndarray  # (H, D)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H, H)
    b2: np.ndarray  # (H,)
    wv: np.ndarray  # (1, H)
    bv: np.ndarray  # (1,)
    wa: np.ndarray  # (A, H)
    ba: np.ndarray  # (A,)
    dueling: bool = True

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "QNetwork":
        return QNetwork(**{n: getattr(self, n).copy() for n in PARAM_NAMES}, dueling=self.dueling)

    @staticmethod
    def initialize(input_dim: int, hidden: int = HIDDEN_DEFAULT, seed: int = 0,
                   dueling: bool = True) -> "QNetwork":
        """Seeded uniform fan-in initialization: U(-1/sqrt(fan_in), +1/sqrt(fan_in))."""
        rng = np.random.default_rng([int(seed), 0x9E7])

        def u(shape, fan_in):
            bound = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-bound, bound, size=shape)

        return QNetwork(
            w1=u((hidden, input_dim), input_dim),
            b1=u((hidden,), input_dim),
            w2=u((hidden, hidden), hidden),
            b2=u((hidden,), hidden),
            wv=u((1, hidden), hidden),
            bv=u((1,), hidden),
            wa=u((N_ACTIONS, hidden), hidden),
            ba=u((N_ACTIONS,), hidden),
            dueling=dueling,
        )


def _forward_cached(net: QNetwork, states: np.ndarray):
    z1 = states @ net.w1.T + net.b1
    h1 = np.maximum(z1, 0.0)
    z2 = h1 @ net.w2.T + net.b2
    h2 = np.maximum(z2, 0.0)
    value = h2 @ net.wv.T + net.bv  # (N, 1)
    adv = h2 @ net.wa.T + net.ba  # (N, A)
    q = dueling_aggregate(value, adv) if net.dueling else adv
    return q, (states, z1, h1, z2, h2)


def forward_batch(net: QNetwork, states) -> np.ndarray:
    """Q-values for a batch of states, shape (N, 5)."""
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[1] != net.input_dim:
        raise ValueError(
            f"state batch has shape {states.shape}, expected (N, {net.input_dim})"
        )
    q, _ = _forward_cached(net, states)
    return q


def forward(net: QNetwork, state) -> np.ndarray:
    """Q-values for a single state, shape (5,)."""
    state = np.asarray(state, dtype=float)
    if state.ndim != 1 or state.shape[0] != net.input_dim:
        raise ValueError(f"state has shape {state.shape}, expected ({net.input_dim},)")
    return forward_batch(net, state[None, :])[0]


def loss_and_gradients(net: QNetwork, states, actions, targets):
    """Mean squared TD loss over the batch and its exact gradients.

    Loss = mean_i (y_i - Q(s_i, a_i))^2. Returns (loss, grads) where
    grads maps each parameter name to an array of matching shape.
    """
    states = np.asarray(states, dtype=float)
    actions = np.asarray(actions, dtype=int)
    targets = np.asarray(targets, dtype=float)
    if states.ndim != 2 or states.shape[1] != net.input_dim:
        raise ValueError(f"state batch has shape {states.shape}, expected (N, {net.input_dim})")
    n = states.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    if actions.shape != (n,) or targets.shape != (n,):
        raise ValueError(
            f"actions/targets shapes {actions.shape}/{targets.shape} do not match batch size {n}"
        )
    if not np.all(np.isfinite(targets)):
        raise ValueError("targets contain non-finite values")

    q, (s, z1, h1, z2, h2) = _forward_cached(net, states)
    idx = np.arange(n)
    err = q[idx, actions] - targets
    loss = float(np.mean(err**2))

    dq = np.zeros_like(q)
    dq[idx, actions] = 2.0 * err / n
    if net.dueling:
        dvalue = dq.sum(axis=1, keepdims=True)           # dQ_j/dV = 1
        dadv = dq - dq.sum(axis=1, keepdims=True) / N_ACTIONS  # dQ_j/dA_k = d_jk - 1/n
    else:
        dvalue = np.zeros((n, 1))
        dadv = dq

    grads = {
        "wv": dvalue.T @ h2,
        "bv": dvalue.sum(axis=0),
        "wa": dadv.T @ h2,
        "ba": dadv.sum(axis=0),
    }
    dh2 = dvalue @ net.wv + dadv @ net.wa
    dz2 = dh2 * (z2 > 0)
    grads["w2"] = dz2.T @ h1
    grads["b2"] = dz2.sum(axis=0)
    dh1 = dz2 @ net.w2
    dz1 = dh1 * (z1 > 0)
    grads["w1"] = dz1.T @ s
    grads["b1"] = dz1.sum(axis=0)
    return loss, grads


@dataclass(eq=False)
class OptimizerState:
    """Adaptive-moment (or plain gradient) update state for one network."""

    learning_rate: float = 0.001
    method: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer method {self.method!r}")


def init_optimizer(net: QNetwork, learning_rate: float = 0.001, method: str = "adam") -> OptimizerState:
    opt = OptimizerState(learning_rate=learning_rate, method=method)
    for name, p in net.params().items():
        opt.m[name] = np.zeros_like(p)
        opt.v[name] = np.zeros_like(p)
    return opt


def apply_update(net: QNetwork, grads: dict[str, np.ndarray], opt: OptimizerState):
    """One in-place optimizer step; returns (net, opt)."""
    params = net.params()
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            raise ValueError(f"missing gradient for parameter {name!r}")
        if g.shape != p.shape:
            raise ValueError(
                f"gradient shape {g.shape} does not match parameter {name!r} shape {p.shape}"
            )
    opt.step += 1
    if opt.method == "sgd":
        for name, p in params.items():
            p -= opt.learning_rate * grads[name]
        return net, opt
    t = opt.step
    bc1 = 1.0 - opt.beta1**t
    bc2 = 1.0 - opt.beta2**t
    for name, p in params.items():
        g = grads[name]
        m = opt.m[name]
        v = opt.v[name]
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        p -= opt.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + opt.eps)
    return net, opt


def select_action(net: QNetwork, state, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy action; greedy ties break toward the lowest class."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(0, N_ACTIONS))
    return int(np.argmax(forward(net, state)))


def select_actions(net: QNetwork, states, epsilons, rng: np.random.Generator) -> np.ndarray:
    """Vectorized epsilon-greedy over a batch, one epsilon per row."""
    states = np.asarray(states, dtype=float)
    epsilons = np.asarray(epsilons, dtype=float)
    if np.any(epsilons < 0) or np.any(epsilons > 1):
        raise ValueError("epsilons must lie in [0, 1]")
    greedy = np.argmax(forward_batch(net, states), axis=1)
    explore = rng.random(states.shape[0]) < epsilons
    randoms = rng.integers(0, N_ACTIONS, size=states.shape[0])
    return np.where(explore, randoms, greedy).astype(int)


def network_state_dict(net: QNetwork, prefix: str = "net_") -> dict[str, np.ndarray]:
    """Flatten the network into named arrays for an npz dump."""
    out = {prefix + name: getattr(net, name) for name in PARAM_NAMES}
    out[prefix + "dueling"] = np.array(int(net.dueling))
    return out


def network_from_state_dict(state: dict, prefix: str = "net_") -> QNetwork:
    kwargs = {name: np.array(state[prefix + name], dtype=float) for name in PARAM_NAMES}
    return QNetwork(**kwargs, dueling=bool(int(state[prefix + "dueling"])))


def save_network(net: QNetwork, path) -> None:
    """Write a versioned checkpoint; round-trips parameters exactly."""
    payload = network_state_dict(net)
    payload["version"] = np.array(CHECKPOINT_VERSION)
    np.savez(Path(path), **payload)


def load_network(path) -> QNetwork:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    with np.load(path) as data:
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        return network_from_state_dict(data)
