"""Shared fixtures and independent test oracles.

The oracles here deliberately avoid the production code paths they check:
concordance by a naive pair loop, quadrature by a dense trapezoid rule, and
gradients by central differences (via autodiff.finite_diff_grad, which never
touches the graph machinery).
"""

import numpy as np
import pytest

import survmlp as sm
from survmlp import model

# frozen desk-scale benchmark: oracle CI ~ 0.76, censoring ~ 0.30
BENCH_WEIGHTS = np.array([0.575, -0.575, 0.575, -0.575])
BENCH_HORIZON = 4.0
BENCH_T_MAX = 4.0
BENCH_N = 3000
BENCH_DATA_SEED = 42
BENCH_SPLIT_SEED = 7
BENCH_TRAIN_SEED = 1


def bench_config(epsilon_train=1.0, epochs=40):
    return sm.TrainConfig(
        epochs=epochs,
        t_max=BENCH_T_MAX,
        epsilon_train=epsilon_train,
        learning_rate=1e-3,
        weight_decay=1e-4,
        batch_size=64,
        seed=BENCH_TRAIN_SEED,
        encoder_widths=(64, 64),
        head_widths=(64, 1),
    )


@pytest.fixture(scope="session")
def benchmark():
    spec = sm.SynthSpec(
        n=BENCH_N,
        covariate_dim=4,
        rate_weights=BENCH_WEIGHTS,
        censor_horizon=BENCH_HORIZON,
        seed=BENCH_DATA_SEED,
    )
    full, oracle = sm.synth_exponential(spec)
    train_set, test_set = sm.split(full, 1.0 / 3.0, seed=BENCH_SPLIT_SEED)
    lam_test = np.exp(test_set.X @ BENCH_WEIGHTS)
    return {
        "full": full,
        "oracle": oracle,
        "train": train_set,
        "test": test_set,
        "lam_test": lam_test,
    }


@pytest.fixture(scope="session")
def bench_model_eps1(benchmark):
    params, history = sm.train(benchmark["train"], bench_config(1.0))
    return params, history


def brute_force_rank_ci(scores, times, events):
    """Naive comparable-pair count with scores as time-invariant risks."""
    n = len(times)
    conc = 0.0
    total = 0
    for i in range(n):
        if not events[i]:
            continue
        later = times > times[i]
        total += int(later.sum())
        conc += float((scores[i] > scores[later]).sum())
        conc += 0.5 * float((scores[i] == scores[later]).sum())
    if total == 0:
        return None, 0
    return conc / total, total


def trapezoid_log_survival(params, x, grid, refine=100):
    """Dense trapezoid quadrature of ln(1 - h) up to every grid point."""
    h_step = grid.epsilon / refine
    ts = np.arange(grid.k * refine + 1) * h_step
    g = np.log(1.0 - model.hazard_values(x, ts, params))
    cum = np.concatenate([[0.0], np.cumsum((g[1:] + g[:-1]) * 0.5 * h_step)])
    return cum[::refine]


def constant_hazard_params(feature_dim=2, epsilon_train=1.0, t_max=5.0):
    """All-zero weights and biases: the head outputs sigmoid(0) = 0.5 always."""
    p = sm.init_params(
        feature_dim,
        epsilon_train=epsilon_train,
        t_max=t_max,
        encoder_widths=(4, 4),
        head_widths=(4, 1),
        seed=0,
    )
    return model.with_param_arrays(p, [np.zeros_like(a) for a in model.param_arrays(p)])


def max_grad_rel_err(params, X, times, events, grid, fd_step=1e-6):
    """Worst per-coordinate relative error of graph gradients vs central FD."""
    from survmlp import autodiff as ad

    loss_node, nodes = model.batch_loss_graph(params, X, times, events, grid)
    ad.backward(loss_node)
    arrays = model.param_arrays(params)

    def f(arrs):
        ln, _ = model.batch_loss_graph(model.with_param_arrays(params, arrs), X, times, events, grid)
        return float(ln.value)

    fd = ad.finite_diff_grad(f, arrays, fd_step)
    worst = 0.0
    for node, fg in zip(nodes, fd):
        rel = np.abs(node.grad - fg) / (np.maximum(np.abs(node.grad), np.abs(fg)) + 1e-4)
        worst = max(worst, float(rel.max()))
    return worst
