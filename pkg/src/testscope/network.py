"""Q-value network: a three-layer MLP with hand-rolled backprop and Adam.

All math is plain NumPy in float64. The network maps a state vector to one
Q-value per action through two ReLU hidden layers and a linear output layer.
Gradients are computed analytically; the test suite checks them against
central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QNetwork",
    "mlp_init",
    "mlp_forward",
    "td_loss_and_grads",
    "AdamState",
    "adam_update",
]


@dataclass
class QNetwork:
    """Weights and biases of the 3-layer MLP. ``weights[i]`` maps layer i to i+1."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return tuple(w.shape[1] for w in self.weights[:-1])

    @property
    def params(self) -> list[np.ndarray]:
        """Flat parameter list [W1, b1, W2, b2, W3, b3] (live views, not copies)."""
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def clone(self) -> "QNetwork":
        return QNetwork(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


def mlp_init(
    hidden_sizes: tuple[int, int] = (64, 64),
    seed: int = 0,
    input_dim: int = 10,
    output_dim: int = 3,
) -> QNetwork:
    """Fresh network with uniform Glorot weights and zero biases.

    The +/- sqrt(6 / (fan_in + fan_out)) range keeps initial Q-values near
    zero. Deterministic given ``seed``.
    """
    sizes = (input_dim, *hidden_sizes, output_dim)
    if any(int(s) < 1 for s in sizes):
        raise ValueError(f"layer widths must be >= 1, got {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return QNetwork(weights=weights, biases=biases)


def _as_batch(net: QNetwork, states: np.ndarray) -> tuple[np.ndarray, bool]:
    states = np.asarray(states, dtype=np.float64)
    single = states.ndim == 1
    if single:
        states = states[None, :]
    if states.ndim != 2 or states.shape[1] != net.input_dim:
        raise ValueError(
            f"expected states with {net.input_dim} features, got shape {states.shape}"
        )
    return states, single


def _forward_cached(
    net: QNetwork, x: np.ndarray
) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    z1 = x @ net.weights[0] + net.biases[0]
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ net.weights[1] + net.biases[1]
    a2 = np.maximum(z2, 0.0)
    q = a2 @ net.weights[2] + net.biases[2]
    return q, (x, z1, a1, z2, a2)


def mlp_forward(net: QNetwork, states: np.ndarray) -> np.ndarray:
    """Q-values for one state ``(3,)`` or a batch ``(n, 3)``."""
    x, single = _as_batch(net, states)
    q, _ = _forward_cached(net, x)
    return q[0] if single else q


def td_loss_and_grads(
    net: QNetwork,
    target_net: QNetwork,
    states: np.ndarray,
    actions: np.ndarray,
    rewards: np.ndarray,
    next_states: np.ndarray,
    dones: np.ndarray,
    discount: float,
) -> tuple[float, list[np.ndarray]]:
    """Mean squared one-step TD error and its gradients w.r.t. ``net.params``.

    Bootstrap targets ``r + discount * max_a Q_target(s', a)`` come from the
    frozen target network; terminal transitions cut the bootstrap term.
    """
    x, _ = _as_batch(net, states)
    n = x.shape[0]
    if n == 0:
        raise ValueError("batch must be non-empty")
    actions = np.asarray(actions, dtype=np.intp)
    rewards = np.asarray(rewards, dtype=np.float64)
    not_done = 1.0 - np.asarray(dones, dtype=np.float64)

    q, (_, z1, a1, z2, a2) = _forward_cached(net, x)
    next_q = mlp_forward(target_net, next_states)
    targets = rewards + discount * next_q.max(axis=1) * not_done

    idx = np.arange(n)
    err = q[idx, actions] - targets
    loss = float(np.mean(err**2))

    dq = np.zeros_like(q)
    dq[idx, actions] = 2.0 * err / n

    dw3 = a2.T @ dq
    db3 = dq.sum(axis=0)
    dz2 = (dq @ net.weights[2].T) * (z2 > 0.0)
    dw2 = a1.T @ dz2
    db2 = dz2.sum(axis=0)
    dz1 = (dz2 @ net.weights[1].T) * (z1 > 0.0)
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)

    return loss, [dw1, db1, dw2, db2, dw3, db3]


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per parameter array."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params])


def adam_update(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> list[np.ndarray]:
    """One Adam step with bias correction, applied to ``params`` in place."""
    if len(params) != len(grads) or any(
        p.shape != g.shape for p, g in zip(params, grads)
    ):
        raise ValueError("params and grads must have matching shapes")
    state.t += 1
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g**2
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return params
