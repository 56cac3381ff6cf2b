"""Time-dependent concordance index under right-censoring.

A pair (i, j) is comparable when sample i is uncensored and t_i < t_j
strictly; ties in observed time are excluded. Two scoring variants are
provided:

  - literal: each sample's predicted CDF is evaluated at its own observed
    time, and the pair is concordant when the earlier sample's value is
    larger.
  - antolini: both samples' CDFs are evaluated at the earlier observed time.

The variants coincide whenever predictions are time-invariant risk scores.
For well-calibrated time-varying predictions they diverge sharply (the
own-time comparison conditions away the information in the event ordering),
so cross-model comparisons should usually quote the antolini variant; the
literal one is the package default for reporting because it matches the
own-time reading of the metric's definition.

Predicted CDF values at off-grid times use the grid point at the right
endpoint of the containing interval. Prediction ties count 1/2. Counting is
exact while the comparable-pair count stays within pair_budget; beyond that
a seeded uniform subsample of exactly pair_budget comparable pairs is used
and flagged in the result.
"""

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, survival_matrix
from .timegrid import interval_index

DEFAULT_PAIR_BUDGET = 100_000


@dataclass(frozen=True)
class PairVerdict:
    index_i: int
    index_j: int
    comparable: bool
    concordant: bool
    tied_prediction: bool


@dataclass(frozen=True)
class CIResult:
    """Concordance outcome; value is None when no pair is comparable."""

    value: float | None
    pairs: int
    ties: int
    sampled: bool
    variant: str

    def __float__(self):
        if self.value is None:
            raise ValueError("concordance undefined: no comparable pairs")
        return self.value


def comparable_pairs(dataset):
    """All comparable (i, j) index pairs; i is uncensored with t_i < t_j."""
    out = []
    t, e = dataset.time, dataset.event
    for i in range(len(dataset)):
        if not e[i]:
            continue
        for j in np.nonzero(t > t[i])[0]:
            out.append((i, int(j)))
    return out


def count_comparable(times, events):
    order = np.sort(times)
    greater = len(times) - np.searchsorted(order, times, side="right")
    return int(greater[events == 1].sum())


def _cdf_matrix(model, dataset, grid):
    if isinstance(model, ModelParams):
        s = survival_matrix(model, dataset.X, grid)
    else:
        s = np.asarray(model, dtype=np.float64)
        if s.shape != (len(dataset), grid.k + 1):
            raise ValueError(
                f"survival matrix shape {s.shape} != ({len(dataset)}, {grid.k + 1})"
            )
    return 1.0 - s


def _right_indices(dataset, grid):
    return np.asarray([interval_index(t, grid) + 1 for t in dataset.time])


def _scan(dataset, W, ridx, variant, budget, seed):
    t, e = dataset.time, dataset.event
    n = len(dataset)
    total = count_comparable(t, e)
    if total == 0:
        return CIResult(None, 0, 0, False, variant)

    if total <= budget:
        conc = ties = 0.0
        own = W[np.arange(n), ridx]
        for i in np.nonzero(e == 1)[0]:
            later = t > t[i]
            if not later.any():
                continue
            other = own[later] if variant == "literal" else W[later, ridx[i]]
            mine = own[i] if variant == "literal" else W[i, ridx[i]]
            ties_i = np.count_nonzero(other == mine)
            conc += np.count_nonzero(mine > other) + 0.5 * ties_i
            ties += ties_i
        return CIResult(conc / total, total, int(ties), False, variant)

    rng = np.random.default_rng(seed)
    own = W[np.arange(n), ridx]
    got_i = np.empty(budget, dtype=np.int64)
    got_j = np.empty(budget, dtype=np.int64)
    filled = 0
    while filled < budget:
        take = max(budget - filled, 1024)
        ii = rng.integers(0, n, 4 * take)
        jj = rng.integers(0, n, 4 * take)
        ok = (e[ii] == 1) & (t[ii] < t[jj])
        ii, jj = ii[ok], jj[ok]
        keep = min(len(ii), budget - filled)
        got_i[filled : filled + keep] = ii[:keep]
        got_j[filled : filled + keep] = jj[:keep]
        filled += keep
    mine = own[got_i] if variant == "literal" else W[got_i, ridx[got_i]]
    other = own[got_j] if variant == "literal" else W[got_j, ridx[got_i]]
    ties = int(np.count_nonzero(mine == other))
    conc = float(np.count_nonzero(mine > other)) + 0.5 * ties
    return CIResult(conc / budget, budget, ties, True, variant)


def c_index_literal(model, dataset, grid, pair_budget=DEFAULT_PAIR_BUDGET, seed=0):
    """Concordance with each sample's CDF taken at its own observed time.

    model is either ModelParams or a precomputed survival matrix (n, K+1).
    """
    W = _cdf_matrix(model, dataset, grid)
    return _scan(dataset, W, _right_indices(dataset, grid), "literal", pair_budget, seed)


def c_index_antolini(model, dataset, grid, pair_budget=DEFAULT_PAIR_BUDGET, seed=0):
    """Concordance with both CDFs taken at the earlier sample's observed time."""
    W = _cdf_matrix(model, dataset, grid)
    return _scan(dataset, W, _right_indices(dataset, grid), "antolini", pair_budget, seed)


def pair_verdicts(model, dataset, grid, variant="literal"):
    """Explicit per-pair outcomes over all ordered pairs; for small n only."""
    W = _cdf_matrix(model, dataset, grid)
    ridx = _right_indices(dataset, grid)
    t, e = dataset.time, dataset.event
    out = []
    for i in range(len(dataset)):
        for j in range(len(dataset)):
            if i == j:
                continue
            comp = bool(e[i]) and t[i] < t[j]
            if not comp:
                out.append(PairVerdict(i, j, False, False, False))
                continue
            if variant == "literal":
                wi, wj = W[i, ridx[i]], W[j, ridx[j]]
            else:
                wi, wj = W[i, ridx[i]], W[j, ridx[i]]
            out.append(PairVerdict(i, j, True, bool(wi > wj), bool(wi == wj)))
    return out
