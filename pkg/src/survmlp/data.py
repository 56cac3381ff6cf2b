"""Dataset container, CSV ingestion, normalization, splits, and synthetic data.

CSV schema: header row with feature columns followed by `time` and `event`;
event is 1 when the event was observed (uncensored) and 0 when censored.
Files written by save_csv name the features f0..f{p-1}; load_csv accepts any
feature column names and preserves their order.
"""

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Sample:
    covariates: np.ndarray
    observed_time: float
    censored: bool


class Dataset:
    """Immutable columnar survival data: X (n, p), time (n,), event (n,)."""

    def __init__(self, X, time, event, feature_names=None):
        self.X = np.asarray(X, dtype=np.float64)
        self.time = np.asarray(time, dtype=np.float64)
        self.event = np.asarray(event, dtype=np.int64)
        if self.X.ndim != 2:
            raise ValueError("X must be 2-d")
        n = self.X.shape[0]
        if self.time.shape != (n,) or self.event.shape != (n,):
            raise ValueError("time/event length must match number of rows")
        if np.any(self.time < 0) or not np.all(np.isfinite(self.time)):
            raise ValueError("observed times must be finite and non-negative")
        if not np.all((self.event == 0) | (self.event == 1)):
            raise ValueError("event flags must be 0 or 1")
        if feature_names is None:
            feature_names = [f"f{i}" for i in range(self.X.shape[1])]
        self.feature_names = list(feature_names)
        for a in (self.X, self.time, self.event):
            a.setflags(write=False)

    def __len__(self):
        return self.X.shape[0]

    def __getitem__(self, i):
        return Sample(
            covariates=self.X[i],
            observed_time=float(self.time[i]),
            censored=not bool(self.event[i]),
        )

    @property
    def feature_dim(self):
        return self.X.shape[1]

    @property
    def censoring_rate(self):
        return float(1.0 - self.event.mean()) if len(self) else 0.0

    def subset(self, idx):
        return Dataset(self.X[idx], self.time[idx], self.event[idx], self.feature_names)


def load_csv(path):
    """Parse a dataset file, validating cells with row/column diagnostics.

    Rows are reported 1-based, counting data rows only.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        for required in ("time", "event"):
            if required not in header:
                raise ValueError(f"{path}: missing column '{required}'")
        t_col, e_col = header.index("time"), header.index("event")
        feat_cols = [i for i in range(len(header)) if i not in (t_col, e_col)]
        if not feat_cols:
            raise ValueError(f"{path}: no feature columns")

        X, time, event = [], [], []
        for row_num, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ValueError(f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}")
            vals = []
            for col in feat_cols + [t_col, e_col]:
                try:
                    vals.append(float(row[col]))
                except ValueError:
                    raise ValueError(
                        f"{path}: row {row_num}, column '{header[col]}': non-numeric cell {row[col]!r}"
                    ) from None
            *feats, t, e = vals
            if t < 0:
                raise ValueError(f"{path}: row {row_num}: negative time {t}")
            if e not in (0.0, 1.0):
                raise ValueError(f"{path}: row {row_num}: event flag must be 0 or 1, got {e}")
            X.append(feats)
            time.append(t)
            event.append(int(e))
    return Dataset(np.asarray(X), np.asarray(time), np.asarray(event), [header[i] for i in feat_cols])


def save_csv(dataset, path):
    """Write the canonical schema with round-trip-exact float formatting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(dataset.feature_dim)] + ["time", "event"])
        for i in range(len(dataset)):
            writer.writerow(
                [repr(float(v)) for v in dataset.X[i]]
                + [repr(float(dataset.time[i])), int(dataset.event[i])]
            )


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray
    std: np.ndarray  # zero-variance columns carry std 0 and map to 0


def normalize_fit(dataset):
    """Per-covariate mean/std; fit on the training split only."""
    mean = dataset.X.mean(axis=0)
    std = dataset.X.std(axis=0)
    std = np.where(std > 1e-12, std, 0.0)
    return NormStats(mean=mean, std=std)


def normalize_apply(dataset, stats):
    safe = np.where(stats.std > 0, stats.std, 1.0)
    return Dataset((dataset.X - stats.mean) / safe, dataset.time, dataset.event, dataset.feature_names)


@dataclass(frozen=True)
class SynthSpec:
    n: int
    covariate_dim: int
    rate_weights: np.ndarray
    censor_horizon: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.censor_horizon <= 0:
            raise ValueError("censor horizon must be positive")
        w = np.asarray(self.rate_weights, dtype=np.float64)
        if w.shape != (self.covariate_dim,):
            raise ValueError(f"rate weights shape {w.shape} != ({self.covariate_dim},)")


@dataclass(frozen=True)
class SynthOracle:
    """Ground truth of a synthetic draw: per-sample rates and true times."""

    rate: np.ndarray
    true_time: np.ndarray
    shape: float = 1.0  # Weibull shape; 1 for exponential

    def survival(self, t, i):
        """Closed-form S(t | x_i)."""
        return float(np.exp(-((self.rate[i] * t) ** self.shape)))

    def cdf_matrix(self, times):
        """W(t | x_i) for every sample at each time in `times`, (n, len(times))."""
        times = np.asarray(times, dtype=np.float64)
        return 1.0 - np.exp(-((self.rate[:, None] * times[None, :]) ** self.shape))


def synth_exponential(spec):
    """Exponential survival data with log-linear rates and uniform censoring.

    x ~ N(0, I); true time ~ Exponential(rate = exp(w . x)); censor time
    ~ Uniform(0, censor_horizon); observed is the minimum of the two.
    Returns (dataset, oracle).
    """
    rng = np.random.default_rng(spec.seed)
    w = np.asarray(spec.rate_weights, dtype=np.float64)
    X = rng.standard_normal((spec.n, spec.covariate_dim))
    rate = np.exp(X @ w)
    t_true = rng.exponential(1.0 / rate)
    c = rng.uniform(0.0, spec.censor_horizon, spec.n)
    observed = np.minimum(t_true, c)
    event = (t_true <= c).astype(np.int64)
    return Dataset(X, observed, event), SynthOracle(rate=rate, true_time=t_true)


def synth_weibull(spec, shape=1.5):
    """Weibull variant with S(t|x) = exp(-(rate * t)^shape); same censoring."""
    if shape <= 0:
        raise ValueError("shape must be positive")
    rng = np.random.default_rng(spec.seed)
    w = np.asarray(spec.rate_weights, dtype=np.float64)
    X = rng.standard_normal((spec.n, spec.covariate_dim))
    rate = np.exp(X @ w)
    t_true = rng.weibull(shape, spec.n) / rate
    c = rng.uniform(0.0, spec.censor_horizon, spec.n)
    observed = np.minimum(t_true, c)
    event = (t_true <= c).astype(np.int64)
    return Dataset(X, observed, event), SynthOracle(rate=rate, true_time=t_true, shape=shape)


def split(dataset, test_fraction, seed):
    """Seeded disjoint train/test partition."""
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test fraction must be in (0, 1), got {test_fraction}")
    n = len(dataset)
    n_test = int(round(n * test_fraction))
    if n_test == 0 or n_test == n:
        raise ValueError(f"test fraction {test_fraction} degenerate for n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return dataset.subset(np.sort(perm[n_test:])), dataset.subset(np.sort(perm[:n_test]))


def k_fold(dataset, k, seed):
    """k seeded disjoint folds with sizes differing by at most one."""
    if k < 2 or k > len(dataset):
        raise ValueError(f"k={k} invalid for n={len(dataset)}")
    perm = np.random.default_rng(seed).permutation(len(dataset))
    return [dataset.subset(np.sort(chunk)) for chunk in np.array_split(perm, k)]
