"""Sinusoidal time features.

A scalar time t is mapped to a d-vector with components
sin(t / 10000^(2i/d)) at even positions and cos(t / 10000^(2i/d)) at odd
positions, i = 0..d/2-1. Times are used in raw dataset units. Embeddings of
the quadrature nodes of a grid are sample-independent, so they are computed
once per (grid, d) and cached read-only.
"""

import numpy as np

_BASE = 10000.0

_node_cache = {}


def _check_dim(d):
    if d < 2 or d % 2 != 0:
        raise ValueError(f"embedding dimension must be even and >= 2, got {d}")


def encode(t, d):
    """Embedding vector of a single time (length d, components in [-1, 1])."""
    return encode_many(np.asarray([t], dtype=np.float64), d)[0]


def encode_many(times, d):
    """Embedding matrix (len(times), d)."""
    _check_dim(d)
    times = np.asarray(times, dtype=np.float64)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    i = np.arange(d // 2)
    angles = times[:, None] / (_BASE ** (2.0 * i / d))[None, :]
    out = np.empty((times.shape[0], d))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


def grid_node_embeddings(grid, d):
    """Cached embeddings of the 2K+1 quadrature nodes of a grid, read-only."""
    key = (grid.epsilon, grid.t_max, grid.k, d)
    cached = _node_cache.get(key)
    if cached is None:
        cached = encode_many(grid.simpson_nodes(), d)
        cached.setflags(write=False)
        _node_cache[key] = cached
    return cached
