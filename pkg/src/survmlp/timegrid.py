"""Uniform discrete time grid and censoring indicator masks.

The observation window [0, t_max) is split into K intervals (t_i, t_i + eps]
with t_i = i * eps and K = ceil(t_max / eps), so the last grid point is at or
beyond t_max. Interval membership is right-closed: an observed time t lands
in interval i when t in (t_i, t_{i+1}]. Time zero is clamped into interval 0
so that every sample participates in the likelihood.
"""

from dataclasses import dataclass

import numpy as np

# absorbs float noise in t_max / epsilon before the ceiling
_DIV_FUZZ = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    epsilon: float
    t_max: float
    k: int  # number of intervals; grid has k + 1 points

    @property
    def points(self):
        """Grid points t_i = i * epsilon for i = 0..k."""
        return np.arange(self.k + 1) * self.epsilon

    @property
    def end(self):
        """Last grid point t_k (>= t_max)."""
        return self.k * self.epsilon

    def simpson_nodes(self):
        """All 2k+1 quadrature nodes: grid points interleaved with midpoints."""
        return np.arange(2 * self.k + 1) * (self.epsilon / 2.0)


def build_grid(t_max, epsilon):
    if not (t_max > 0) or not np.isfinite(t_max):
        raise ValueError(f"t_max must be positive and finite, got {t_max}")
    if not (epsilon > 0) or not np.isfinite(epsilon):
        raise ValueError(f"epsilon must be positive and finite, got {epsilon}")
    if epsilon > t_max:
        raise ValueError(f"epsilon {epsilon} exceeds t_max {t_max}")
    k = int(np.ceil(t_max / epsilon - _DIV_FUZZ))
    return TimeGrid(epsilon=float(epsilon), t_max=float(t_max), k=max(k, 1))


def interval_index(t_obs, grid):
    """Index i of the interval (t_i, t_{i+1}] containing t_obs; 0 for t_obs = 0."""
    end = grid.end
    if not (0.0 <= t_obs <= end * (1.0 + 1e-12)):
        raise ValueError(f"observed time {t_obs} outside grid range [0, {end}]")
    i = int(np.ceil(t_obs / grid.epsilon - _DIV_FUZZ)) - 1
    return min(max(i, 0), grid.k - 1)


@dataclass(frozen=True)
class IndicatorMask:
    """Interval membership bits driving the likelihood of one sample.

    Uncensored: a single bit at the observed interval. Censored: bits on
    every interval from the observed one onward, so the masked sum of
    interval masses telescopes to the survival value at the interval start.
    """

    bits: np.ndarray  # bool, length k
    observed_index: int

    def as_floats(self):
        return self.bits.astype(np.float64)


def indicator(t_obs, censored, grid):
    i = interval_index(t_obs, grid)
    bits = np.zeros(grid.k, dtype=bool)
    if censored:
        bits[i:] = True
    else:
        bits[i] = True
    return IndicatorMask(bits=bits, observed_index=i)


def indicator_matrix(times, events, grid):
    """Float mask matrix (n, k) for a batch; events nonzero means uncensored."""
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events)
    masks = np.zeros((times.shape[0], grid.k))
    for r, (t, e) in enumerate(zip(times, events)):
        masks[r] = indicator(float(t), not bool(e), grid).as_floats()
    return masks
