"""Hazard-rate MLP and its survival-distribution estimates.

An encoder MLP maps covariates to a feature vector z of width d, a sinusoidal
time embedding of the same width is added, and a head MLP squashes the result
through a sigmoid into a conditional hazard value h(t|x) in (0, 1). Survival
values on a time grid come from composite Simpson quadrature of ln(1 - h):

    ln S(t_i) = sum_{j < i} (eps / 6) * [g(t_j) + 4 g(t_j + eps/2) + g(t_{j+1})]

with g(t) = ln(1 - h(t|x)). The curve endpoints are pinned to S(0) = 1 and
S(t_k) = 0; pinning the far end assigns all remaining mass to the last
interval and no gradient flows through the pinned value. Interval masses are
successive differences of the pinned curve, and the training loss is the
negative log of the indicator-masked sum of masses, which reduces to
-ln p_i for an uncensored sample and telescopes to -ln S(t_i) for a censored
one.

Computing a curve for one sample costs 2K+1 hazard evaluations; all samples
of a batch and all grid nodes go through the head in a single matrix pass.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import autodiff as ad
from .encoding import encode, encode_many, grid_node_embeddings
from .timegrid import TimeGrid, indicator, indicator_matrix, interval_index

# hazard values are clipped into this band so ln(1 - h) stays finite
HAZARD_CLAMP = 1e-7
# masked likelihoods below this are floored before the log
LIKELIHOOD_FLOOR = 1e-12

_floor_incidents = 0


def floor_incident_count():
    """Number of times a masked likelihood had to be floored before the log."""
    return _floor_incidents


def reset_floor_incidents():
    global _floor_incidents
    _floor_incidents = 0


@dataclass(frozen=True)
class ModelParams:
    """Weights of the encoder and head MLPs plus baked-in data statistics.

    Hidden layers use hidden_activation; the encoder output layer is linear
    and the head output layer is a single sigmoid unit. The encoder output
    width doubles as the time-embedding dimension, so it must be even and
    must match the head input width.
    """

    encoder_weights: tuple
    encoder_biases: tuple
    head_weights: tuple
    head_biases: tuple
    epsilon_train: float
    t_max: float
    norm_mean: np.ndarray
    norm_std: np.ndarray
    hidden_activation: str = "relu"

    def __post_init__(self):
        d = self.encoder_weights[-1].shape[0]
        if d % 2 != 0:
            raise ValueError(f"encoder output width {d} must be even for the time embedding")
        if self.head_weights[0].shape[1] != d:
            raise ValueError(
                f"head input width {self.head_weights[0].shape[1]} != encoder output width {d}"
            )
        if self.head_weights[-1].shape[0] != 1:
            raise ValueError("head must end in a single output unit")
        if self.hidden_activation not in ("relu", "sigmoid"):
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")

    @property
    def d(self):
        return self.encoder_weights[-1].shape[0]

    @property
    def feature_dim(self):
        return self.encoder_weights[0].shape[1]


@dataclass(frozen=True)
class SurvivalCurve:
    grid: TimeGrid
    s_values: np.ndarray  # length k+1, s[0] = 1, s[k] = 0, non-increasing

    def __post_init__(self):
        s = self.s_values
        if s.shape != (self.grid.k + 1,):
            raise ValueError(f"curve length {s.shape} does not match grid with k={self.grid.k}")
        if s[0] != 1.0 or s[-1] != 0.0:
            raise ValueError("survival curve endpoints must be exactly 1 and 0")
        if np.any(np.diff(s) > 0):
            raise ValueError("survival curve must be non-increasing")


@dataclass(frozen=True)
class IntervalMasses:
    grid: TimeGrid
    p_values: np.ndarray  # length k, non-negative, sums to 1

    def __post_init__(self):
        p = self.p_values
        if p.shape != (self.grid.k,):
            raise ValueError(f"mass vector length {p.shape} does not match grid with k={self.grid.k}")
        if np.any(p < 0):
            raise ValueError("interval masses must be non-negative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"interval masses sum to {p.sum()!r}, expected 1")


def init_params(
    feature_dim,
    epsilon_train,
    t_max,
    encoder_widths=(256, 512, 256),
    head_widths=(256, 256, 1),
    hidden_activation="relu",
    seed=0,
    norm_mean=None,
    norm_std=None,
):
    """Seeded Glorot-uniform initialization.

    Biases start at zero except the head output bias, which starts at -2 so
    the initial hazard sits near 0.12 and long grids do not saturate the
    accumulated log terms.
    """
    if head_widths[-1] != 1:
        raise ValueError("head_widths must end with 1")
    rng = np.random.default_rng(seed)

    def glorot(fan_out, fan_in):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_out, fan_in))

    enc_W, enc_b = [], []
    fan_in = feature_dim
    for width in encoder_widths:
        enc_W.append(glorot(width, fan_in))
        enc_b.append(np.zeros(width))
        fan_in = width
    head_W, head_b = [], []
    d = encoder_widths[-1]
    fan_in = d
    for width in head_widths:
        head_W.append(glorot(width, fan_in))
        head_b.append(np.zeros(width))
        fan_in = width
    head_b[-1][:] = -2.0

    if norm_mean is None:
        norm_mean = np.zeros(feature_dim)
    if norm_std is None:
        norm_std = np.ones(feature_dim)
    return ModelParams(
        encoder_weights=tuple(enc_W),
        encoder_biases=tuple(enc_b),
        head_weights=tuple(head_W),
        head_biases=tuple(head_b),
        epsilon_train=float(epsilon_train),
        t_max=float(t_max),
        norm_mean=np.asarray(norm_mean, dtype=np.float64),
        norm_std=np.asarray(norm_std, dtype=np.float64),
        hidden_activation=hidden_activation,
    )


def param_arrays(params):
    """All weight and bias arrays in canonical order (encoder first)."""
    return (
        list(params.encoder_weights)
        + list(params.encoder_biases)
        + list(params.head_weights)
        + list(params.head_biases)
    )


def with_param_arrays(params, arrays):
    """New ModelParams with arrays from param_arrays order substituted in."""
    ne, nh = len(params.encoder_weights), len(params.head_weights)
    if len(arrays) != 2 * (ne + nh):
        raise ValueError(f"expected {2 * (ne + nh)} arrays, got {len(arrays)}")
    it = iter(arrays)
    enc_W = tuple(np.asarray(next(it), dtype=np.float64) for _ in range(ne))
    enc_b = tuple(np.asarray(next(it), dtype=np.float64) for _ in range(ne))
    head_W = tuple(np.asarray(next(it), dtype=np.float64) for _ in range(nh))
    head_b = tuple(np.asarray(next(it), dtype=np.float64) for _ in range(nh))
    return replace(
        params,
        encoder_weights=enc_W,
        encoder_biases=enc_b,
        head_weights=head_W,
        head_biases=head_b,
    )


def _param_nodes(params, requires_grad):
    make = ad.parameter if requires_grad else ad.constant
    return [make(a) for a in param_arrays(params)]


def _split_nodes(params, nodes):
    ne, nh = len(params.encoder_weights), len(params.head_weights)
    enc_W = nodes[:ne]
    enc_b = nodes[ne : 2 * ne]
    head_W = nodes[2 * ne : 2 * ne + nh]
    head_b = nodes[2 * ne + nh :]
    return enc_W, enc_b, head_W, head_b


def _hidden(node, activation):
    return ad.relu(node) if activation == "relu" else ad.sigmoid(node)


def _encoder_forward(x, enc_W, enc_b, activation):
    h = x
    for W, b in zip(enc_W[:-1], enc_b[:-1]):
        h = _hidden(ad.affine(W, b, h), activation)
    return ad.affine(enc_W[-1], enc_b[-1], h)  # linear output


def _head_forward(x, head_W, head_b, activation):
    h = x
    for W, b in zip(head_W[:-1], head_b[:-1]):
        h = _hidden(ad.affine(W, b, h), activation)
    out = ad.sigmoid(ad.affine(head_W[-1], head_b[-1], h))
    return ad.clamp(out, HAZARD_CLAMP, 1.0 - HAZARD_CLAMP)


def _normalize(X, params):
    std = np.where(params.norm_std > 0, params.norm_std, 1.0)
    return (np.asarray(X, dtype=np.float64) - params.norm_mean) / std


def _pinned_survival(params, nodes, X_raw, grid):
    """Survival node (B, K+1) with endpoints pinned, from raw covariates."""
    enc_W, enc_b, head_W, head_b = _split_nodes(params, nodes)
    act = params.hidden_activation
    X = np.atleast_2d(_normalize(X_raw, params))
    B = X.shape[0]
    K = grid.k
    M = 2 * K + 1

    z = _encoder_forward(ad.constant(X), enc_W, enc_b, act)  # (B, d)
    pe = grid_node_embeddings(grid, params.d)  # (M, d)
    inp = ad.add(ad.repeat_rows(z, M), ad.constant(np.tile(pe, (B, 1))))
    h = _head_forward(inp, head_W, head_b, act)  # (B*M, 1)
    g = ad.log(ad.add(ad.neg(h), 1.0))  # ln(1 - h)
    G = ad.reshape(g, (B, M))

    left = ad.slice_cols(G, 0, 2 * K - 1, 2)
    mid = ad.slice_cols(G, 1, 2 * K, 2)
    right = ad.slice_cols(G, 2, 2 * K + 1, 2)
    terms = ad.mul(ad.add(ad.add(left, ad.mul(mid, 4.0)), right), grid.epsilon / 6.0)
    ln_s = ad.prepend_zero_col(ad.cumsum_cols(terms))  # (B, K+1); first col exactly 0
    s = ad.exp(ln_s)
    pin = np.ones(K + 1)
    pin[K] = 0.0  # pinned far endpoint carries no gradient
    return ad.mul(s, ad.constant(pin))


def _masses_node(s_pinned, K):
    return ad.sub(ad.slice_cols(s_pinned, 0, K, 1), ad.slice_cols(s_pinned, 1, K + 1, 1))


def batch_loss_graph(params, X, times, events, grid, masks=None):
    """Differentiable mean masked NLL over a batch.

    Returns (loss_node, param_nodes) with param_nodes in param_arrays order.
    events nonzero means the event was observed (uncensored). Precomputed
    indicator masks can be passed to skip rebuilding them per step.
    """
    global _floor_incidents
    nodes = _param_nodes(params, requires_grad=True)
    if masks is None:
        masks = indicator_matrix(times, events, grid)
    s = _pinned_survival(params, nodes, X, grid)
    p = _masses_node(s, grid.k)
    like = ad.row_sum(ad.mul(p, ad.constant(masks)))
    _floor_incidents += int(np.sum(like.value < LIKELIHOOD_FLOOR))
    loss_node = ad.neg(ad.log(ad.clamp(like, lo=LIKELIHOOD_FLOOR))).mean()
    return loss_node, nodes


def hazard_values(x, times, params):
    """Pointwise hazards of one sample at arbitrary times, (len(times),)."""
    times = np.asarray(times, dtype=np.float64)
    enc_W, enc_b, head_W, head_b = _split_nodes(params, _param_nodes(params, False))
    act = params.hidden_activation
    xn = _normalize(np.asarray(x, dtype=np.float64), params)
    z = _encoder_forward(ad.constant(xn), enc_W, enc_b, act).value
    inp = ad.constant(z[None, :] + encode_many(times, params.d))
    return _head_forward(inp, head_W, head_b, act).value[:, 0]


def log_survival(x, grid, params):
    """Raw quadrature log-survival at every grid point, before endpoint pinning."""
    nodes = _param_nodes(params, False)
    enc_W, enc_b, head_W, head_b = _split_nodes(params, nodes)
    act = params.hidden_activation
    X = np.atleast_2d(_normalize(x, params))
    K = grid.k
    z = _encoder_forward(ad.constant(X), enc_W, enc_b, act)
    pe = grid_node_embeddings(grid, params.d)
    inp = ad.add(ad.repeat_rows(z, 2 * K + 1), ad.constant(np.tile(pe, (X.shape[0], 1))))
    # same arithmetic as the graph path: log(1 - h), not log1p(-h)
    g = np.log(1.0 - _head_forward(inp, head_W, head_b, act).value[:, 0]).reshape(X.shape[0], -1)
    terms = (grid.epsilon / 6.0) * (g[:, 0:-1:2] + 4.0 * g[:, 1::2] + g[:, 2::2])
    out = np.zeros((X.shape[0], K + 1))
    out[:, 1:] = np.cumsum(terms, axis=1)
    return out[0] if np.asarray(x).ndim == 1 else out


def encode_sample(x, params):
    """Feature vector z of an already-normalized covariate vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.feature_dim,):
        raise ValueError(f"covariate shape {x.shape} != ({params.feature_dim},)")
    enc_W, enc_b, _, _ = _split_nodes(params, _param_nodes(params, False))
    return _encoder_forward(ad.constant(x), enc_W, enc_b, params.hidden_activation).value


def hazard(x, t, params):
    """Conditional hazard value at an arbitrary time, in the clamp band."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    enc_W, enc_b, head_W, head_b = _split_nodes(params, _param_nodes(params, False))
    act = params.hidden_activation
    xn = _normalize(np.asarray(x, dtype=np.float64), params)
    z = _encoder_forward(ad.constant(xn), enc_W, enc_b, act)
    h = _head_forward(ad.add(z, ad.constant(encode(t, params.d))), head_W, head_b, act)
    return float(h.value[0])


def survival_curve(x, grid, params):
    """Pinned survival values of one sample on the grid points."""
    s = _pinned_survival(params, _param_nodes(params, False), np.atleast_2d(x), grid)
    return SurvivalCurve(grid=grid, s_values=s.value[0])


def interval_masses(curve):
    """Per-interval event masses, the successive differences of the curve."""
    return IntervalMasses(grid=curve.grid, p_values=-np.diff(curve.s_values))


def loss(x, t_obs, censored, grid, params):
    """Masked NLL of a single sample (no gradients)."""
    mask = indicator(t_obs, censored, grid).as_floats()[None, :]
    nodes = _param_nodes(params, requires_grad=False)
    s = _pinned_survival(params, nodes, np.atleast_2d(x), grid)
    p = _masses_node(s, grid.k)
    like = float(ad.row_sum(ad.mul(p, ad.constant(mask))).value[0])
    global _floor_incidents
    if like < LIKELIHOOD_FLOOR:
        _floor_incidents += 1
        like = LIKELIHOOD_FLOOR
    return -np.log(like)


def predict(x, grid_infer, params):
    """Survival curve and interval masses on an arbitrary inference grid."""
    curve = survival_curve(x, grid_infer, params)
    return curve, interval_masses(curve)


def survival_matrix(params, X, grid, block=256):
    """Pinned survival curves for many samples, row per sample, (n, K+1)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    out = np.empty((X.shape[0], grid.k + 1))
    for start in range(0, X.shape[0], block):
        stop = min(start + block, X.shape[0])
        s = _pinned_survival(params, _param_nodes(params, False), X[start:stop], grid)
        out[start:stop] = s.value
    return out
