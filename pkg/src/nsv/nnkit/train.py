"""Mean-squared-error training loop and finite-difference gradient checking.

Training is single-threaded and bit-reproducible: batch order is a seeded
permutation per epoch (rng keyed on (seed, epoch)) and every reduction uses
numpy's fixed summation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, TrainingDiverged
from .network import Network
from .optim import AdamState, adam_step


@dataclass
class TrainConfig:
    epochs: int = 1
    batch_size: int = 32
    seed: int = 0
    lr: float = 1e-3
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


def mse(pred: np.ndarray, target: np.ndarray) -> float:
    if pred.shape != target.shape:
        raise ShapeError(f"mse shapes differ: {pred.shape} vs {target.shape}")
    d = pred - target
    return float(np.mean(d * d))


def mse_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    return 2.0 * (pred - target) / pred.size


def epoch_permutation(n: int, seed: int, epoch: int) -> np.ndarray:
    return np.random.default_rng([seed & 0xFFFFFFFF, epoch]).permutation(n)


def train(net: Network, inputs: np.ndarray, targets: np.ndarray, cfg: TrainConfig):
    """Minimize mean MSE over (inputs, targets) with Adam.

    Returns the per-epoch mean training loss curve (length == cfg.epochs);
    the network is updated in place.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if len(inputs) == 0:
        raise ValueError("empty sample set")
    if len(inputs) != len(targets):
        raise ShapeError("inputs/targets length mismatch")
    n = len(inputs)
    params = net.params()
    state = AdamState.for_params(params, lr=cfg.lr)
    curve = []
    for epoch in range(cfg.epochs):
        order = epoch_permutation(n, cfg.seed, epoch) if cfg.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb, yb = inputs[idx], targets[idx]
            pred, cache = net.forward(xb)
            loss = mse(pred, yb)
            if not np.isfinite(loss):
                raise TrainingDiverged(epoch)
            total += loss * len(idx)
            grads, _ = net.backward(cache, mse_grad(pred, yb))
            adam_step(params, grads, state)
        curve.append(total / n)
    return curve


def loss_and_grads(net: Network, x: np.ndarray, target: np.ndarray):
    pred, cache = net.forward(x)
    grads, _ = net.backward(cache, mse_grad(pred, target))
    return mse(pred, target), grads


def grad_check(net: Network, x: np.ndarray, target: np.ndarray | None = None,
               h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    The checked scalar is the MSE loss of the network output against
    ``target`` (seeded random if omitted).  Relative error per entry is
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
    """
    params = net.params()
    total = sum(p.size for p in params)
    if total > 10_000:
        raise ValueError(f"grad_check limited to 1e4 parameter entries, net has {total}")
    x = np.asarray(x, dtype=np.float64)
    if target is None:
        out_shape = x.shape[:1] + net.output_shape if x.shape != net.input_shape else net.output_shape
        target = np.random.default_rng(0).standard_normal(out_shape)
    _, analytic = loss_and_grads(net, x, target)
    worst = 0.0
    for p, g in zip(params, analytic):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = mse(net.predict(x), target)
            flat[i] = orig - h
            down = mse(net.predict(x), target)
            flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            err = abs(gflat[i] - numeric) / max(abs(gflat[i]), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
