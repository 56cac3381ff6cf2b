"""Versioned text model files.

A model file is line oriented and self describing: scalar fields first, then
each layer as a shape line followed by flat row-major W and b value lines.
Floats are written with repr, which round-trips float64 exactly, so
save -> load -> save reproduces the file byte for byte.
"""

from dataclasses import dataclass

import numpy as np

from .model import ModelParams

MAGIC = "survmlp-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelBundle:
    params: ModelParams
    seed: int = 0
    config_echo: str = ""


def _floats(values):
    return " ".join(repr(float(v)) for v in np.asarray(values).reshape(-1))


def save_model(path, bundle):
    p = bundle.params
    lines = [
        MAGIC,
        f"format_version {FORMAT_VERSION}",
        f"feature_dim {p.feature_dim}",
        f"embedding_dim {p.d}",
        f"epsilon_train {repr(p.epsilon_train)}",
        f"t_max {repr(p.t_max)}",
        f"hidden_activation {p.hidden_activation}",
        f"seed {bundle.seed}",
        f"config {bundle.config_echo}".rstrip(),
        f"norm_mean {_floats(p.norm_mean)}",
        f"norm_std {_floats(p.norm_std)}",
    ]
    for name, Ws, bs in (("encoder", p.encoder_weights, p.encoder_biases),
                         ("head", p.head_weights, p.head_biases)):
        lines.append(f"{name}_layers {len(Ws)}")
        for i, (W, b) in enumerate(zip(Ws, bs)):
            lines.append(f"{name} {i} {W.shape[0]} {W.shape[1]}")
            lines.append(f"W {_floats(W)}")
            lines.append(f"b {_floats(b)}")
    lines.append("end")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


class _Reader:
    def __init__(self, path):
        with open(path, encoding="utf-8") as fh:
            self.lines = fh.read().splitlines()
        self.pos = 0
        self.path = path

    def next(self, expect=None):
        if self.pos >= len(self.lines):
            raise ValueError(f"{self.path}: truncated model file")
        line = self.lines[self.pos]
        self.pos += 1
        if expect is not None and not line.startswith(expect + " ") and line != expect:
            raise ValueError(f"{self.path}: expected '{expect}' line, got {line[:40]!r}")
        return line

    def field(self, key):
        return self.next(key).split(" ", 1)[1]

    def float_row(self, key):
        return np.asarray([float(v) for v in self.field(key).split()])


def load_model(path):
    r = _Reader(path)
    if r.next() != MAGIC:
        raise ValueError(f"{path}: not a model file")
    version = int(r.field("format_version"))
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    feature_dim = int(r.field("feature_dim"))
    d = int(r.field("embedding_dim"))
    epsilon_train = float(r.field("epsilon_train"))
    t_max = float(r.field("t_max"))
    activation = r.field("hidden_activation")
    seed = int(r.field("seed"))
    config_line = r.next("config")
    config_echo = config_line[len("config ") :] if config_line != "config" else ""
    norm_mean = r.float_row("norm_mean")
    norm_std = r.float_row("norm_std")

    layers = {}
    for name in ("encoder", "head"):
        count = int(r.field(f"{name}_layers"))
        Ws, bs = [], []
        for i in range(count):
            _, idx, rows, cols = r.next(name).split()
            if int(idx) != i:
                raise ValueError(f"{path}: layer index mismatch in {name} block")
            rows, cols = int(rows), int(cols)
            W = r.float_row("W").reshape(rows, cols)
            b = r.float_row("b")
            if b.shape != (rows,):
                raise ValueError(f"{path}: bias length {b.shape[0]} != {rows}")
            Ws.append(W)
            bs.append(b)
        layers[name] = (tuple(Ws), tuple(bs))
    r.next("end")

    params = ModelParams(
        encoder_weights=layers["encoder"][0],
        encoder_biases=layers["encoder"][1],
        head_weights=layers["head"][0],
        head_biases=layers["head"][1],
        epsilon_train=epsilon_train,
        t_max=t_max,
        norm_mean=norm_mean,
        norm_std=norm_std,
        hidden_activation=activation,
    )
    if params.feature_dim != feature_dim or params.d != d:
        raise ValueError(f"{path}: layer shapes disagree with declared dimensions")
    return ModelBundle(params=params, seed=seed, config_echo=config_echo)
