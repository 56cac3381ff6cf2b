"""Adam-based maximum-likelihood training over the discrete time grid.

The trainer is a pure function of (dataset, config): weight init, batch
order, and every update are seeded, so reruns reproduce the trained weights
bit for bit. Indicator masks and quadrature-node embeddings are precomputed
once; each step then builds one graph over the whole batch (every sample
crossed with every quadrature node in a single matrix pass) and applies one
bias-corrected Adam update with decoupled weight decay.
"""

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .data import normalize_fit
from .model import batch_loss_graph, init_params, param_arrays, with_param_arrays
from .timegrid import build_grid, indicator_matrix


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    t_max: float
    epsilon_train: float = 1.0
    learning_rate: float = 1e-4
    weight_decay: float = 1e-4
    batch_size: int = 64
    seed: int = 0
    encoder_widths: tuple = (256, 512, 256)
    head_widths: tuple = (256, 256, 1)
    hidden_activation: str = "relu"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0 or self.weight_decay < 0 or self.adam_eps <= 0:
            raise ValueError("rates must be positive (weight decay may be zero)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass
class AdamState:
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    step: int = 0


def init_adam_state(arrays):
    return AdamState(m=[np.zeros_like(a) for a in arrays], v=[np.zeros_like(a) for a in arrays])


def adam_step(arrays, grads, state, config):
    """One in-place bias-corrected Adam update with decoupled weight decay."""
    if len(arrays) != len(grads) or len(arrays) != len(state.m):
        raise ValueError("parameter/gradient/state length mismatch")
    state.step += 1
    b1, b2 = config.beta1, config.beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    for a, g, m, v in zip(arrays, grads, state.m, state.v):
        if a.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {a.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        update = (m / bc1) / (np.sqrt(v / bc2) + config.adam_eps)
        a -= config.learning_rate * (update + config.weight_decay * a)
    return arrays, state


def batch_iterator(n, batch_size, seed, epoch):
    """Chunked seeded permutation of range(n); depends on (seed, epoch) only."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    perm = np.random.default_rng([seed, epoch]).permutation(n)
    return [perm[i : i + batch_size] for i in range(0, n, batch_size)]


def train(dataset, config):
    """Fit a hazard model; returns (params, per-epoch mean NLL history).

    Normalization statistics are fit on the given dataset and baked into the
    returned parameters. Observed times beyond config.t_max are rejected up
    front with the offending row index.
    """
    n = len(dataset)
    if n == 0:
        raise ValueError("dataset is empty")
    over = np.nonzero(dataset.time > config.t_max)[0]
    if over.size:
        raise ValueError(
            f"observed time {dataset.time[over[0]]} at row {int(over[0])} exceeds t_max {config.t_max}"
        )

    stats = normalize_fit(dataset)
    params = init_params(
        dataset.feature_dim,
        epsilon_train=config.epsilon_train,
        t_max=config.t_max,
        encoder_widths=tuple(config.encoder_widths),
        head_widths=tuple(config.head_widths),
        hidden_activation=config.hidden_activation,
        seed=config.seed,
        norm_mean=stats.mean,
        norm_std=np.where(stats.std > 0, stats.std, 1.0),
    )
    grid = build_grid(config.t_max, config.epsilon_train)
    masks = indicator_matrix(dataset.time, dataset.event, grid)

    arrays = [np.array(a) for a in param_arrays(params)]
    state = init_adam_state(arrays)
    history = []
    for epoch in range(config.epochs):
        epoch_nll = 0.0
        for idx in batch_iterator(n, config.batch_size, config.seed, epoch):
            current = with_param_arrays(params, arrays)
            loss_node, nodes = batch_loss_graph(
                current, dataset.X[idx], dataset.time[idx], dataset.event[idx], grid, masks=masks[idx]
            )
            ad.backward(loss_node)
            grads = [node.grad for node in nodes]
            adam_step(arrays, grads, state, config)
            epoch_nll += float(loss_node.value) * len(idx)
        history.append(epoch_nll / n)
    return with_param_arrays(params, arrays), history
