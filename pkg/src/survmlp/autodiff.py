"""Minimal reverse-mode differentiation engine on 64-bit numpy arrays.

Graphs are built define-by-run: every operation returns a new Node holding
the forward value and a closure that routes gradients to its parents. A
node only records a backward closure when some input actually requires a
gradient, so inference-only forwards carry no graph overhead.
"""

import numpy as np


class Node:
    """One value in a computation graph.

    value is always a float64 ndarray (scalars are 0-d arrays). grad is
    allocated lazily during backward and has the same shape as value.
    """

    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, value, parents=(), backward=None, requires_grad=False):
        self.value = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(self.value)):
            raise ValueError("non-finite value entering computation graph")
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = tuple(parents)
        self._backward = backward if self.requires_grad else None

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Node(shape={self.value.shape}, requires_grad={self.requires_grad})"

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += g

    # -- operator sugar -------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)

    def sum(self):
        return sum_all(self)

    def mean(self):
        return mean_all(self)

    def backward(self):
        return backward(self)


def parameter(value):
    """Leaf node that collects a gradient."""
    return Node(value, requires_grad=True)


def constant(value):
    """Leaf node excluded from differentiation."""
    return Node(value)


def _as_node(x):
    return x if isinstance(x, Node) else Node(x)


# -- core operations -----------------------------------------------------


def affine(W, b, x):
    """W @ x + b for a vector x, or x @ W.T + b row-wise for a matrix x.

    W must be 2-d with W.shape[1] == x feature length and b 1-d with
    len(b) == W.shape[0].
    """
    W, b, x = _as_node(W), _as_node(b), _as_node(x)
    if W.value.ndim != 2 or b.value.ndim != 1:
        raise ValueError(
            f"affine expects 2-d W and 1-d b, got W{W.value.shape} b{b.value.shape}"
        )
    m, n = W.value.shape
    if b.value.shape[0] != m:
        raise ValueError(f"affine bias length {b.value.shape[0]} != {m} rows of W")
    if x.value.ndim == 1:
        if x.value.shape[0] != n:
            raise ValueError(f"affine input length {x.value.shape[0]} != {n} columns of W")
        out = Node(W.value @ x.value + b.value, (W, b, x))

        def bwd(g):
            if W.requires_grad:
                W._accumulate(np.outer(g, x.value))
            if b.requires_grad:
                b._accumulate(g)
            if x.requires_grad:
                x._accumulate(W.value.T @ g)

    elif x.value.ndim == 2:
        if x.value.shape[1] != n:
            raise ValueError(f"affine input width {x.value.shape[1]} != {n} columns of W")
        out = Node(x.value @ W.value.T + b.value, (W, b, x))

        def bwd(g):
            if W.requires_grad:
                W._accumulate(g.T @ x.value)
            if b.requires_grad:
                b._accumulate(g.sum(axis=0))
            if x.requires_grad:
                x._accumulate(g @ W.value)

    else:
        raise ValueError(f"affine input must be 1-d or 2-d, got shape {x.value.shape}")
    out._backward = bwd if out.requires_grad else None
    return out


def _binary(a, b, value, da, db):
    a, b = _as_node(a), _as_node(b)
    out = Node(value(a.value, b.value), (a, b))

    def bwd(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(da(g, a.value, b.value), a.value.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(db(g, a.value, b.value), b.value.shape))

    out._backward = bwd if out.requires_grad else None
    return out


def _unbroadcast(g, shape):
    # collapse gradient of a numpy-broadcast result back onto `shape`
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b):
    return _binary(a, b, lambda x, y: x + y, lambda g, x, y: g, lambda g, x, y: g)


def sub(a, b):
    return _binary(a, b, lambda x, y: x - y, lambda g, x, y: g, lambda g, x, y: -g)


def mul(a, b):
    return _binary(a, b, lambda x, y: x * y, lambda g, x, y: g * y, lambda g, x, y: g * x)


def neg(x):
    x = _as_node(x)
    out = Node(-x.value, (x,))
    out._backward = (lambda g: x._accumulate(-g)) if out.requires_grad else None
    return out


def relu(x):
    x = _as_node(x)
    out = Node(np.maximum(x.value, 0.0), (x,))
    out._backward = (lambda g: x._accumulate(g * (x.value > 0.0))) if out.requires_grad else None
    return out


def sigmoid(x):
    x = _as_node(x)
    # split by sign for overflow-free evaluation
    v = x.value
    y = np.where(v >= 0, 1.0 / (1.0 + np.exp(-np.abs(v))), np.exp(-np.abs(v)) / (1.0 + np.exp(-np.abs(v))))
    out = Node(y, (x,))
    out._backward = (lambda g: x._accumulate(g * y * (1.0 - y))) if out.requires_grad else None
    return out


def log(x):
    x = _as_node(x)
    if np.any(x.value <= 0.0):
        idx = int(np.argmin(x.value))
        raise ValueError(
            f"log of non-positive value {x.value.flat[idx]!r} at flat index {idx}"
        )
    out = Node(np.log(x.value), (x,))
    out._backward = (lambda g: x._accumulate(g / x.value)) if out.requires_grad else None
    return out


def exp(x):
    x = _as_node(x)
    out = Node(np.exp(x.value), (x,))
    out._backward = (lambda g: x._accumulate(g * out.value)) if out.requires_grad else None
    return out


def clamp(x, lo=None, hi=None):
    """Hard clip; gradient is zero wherever the input sits outside (lo, hi)."""
    x = _as_node(x)
    out = Node(np.clip(x.value, lo, hi), (x,))
    inside = np.ones_like(x.value, dtype=bool)
    if lo is not None:
        inside &= x.value > lo
    if hi is not None:
        inside &= x.value < hi
    out._backward = (lambda g: x._accumulate(g * inside)) if out.requires_grad else None
    return out


def sum_all(x):
    x = _as_node(x)
    out = Node(x.value.sum(), (x,))
    out._backward = (lambda g: x._accumulate(np.full_like(x.value, float(g)))) if out.requires_grad else None
    return out


def mean_all(x):
    x = _as_node(x)
    out = Node(x.value.mean(), (x,))
    n = x.value.size
    out._backward = (lambda g: x._accumulate(np.full_like(x.value, float(g) / n))) if out.requires_grad else None
    return out


def row_sum(x):
    """(B, K) -> (B,) sums along axis 1."""
    x = _as_node(x)
    out = Node(x.value.sum(axis=1), (x,))
    out._backward = (lambda g: x._accumulate(np.repeat(g[:, None], x.value.shape[1], axis=1))) if out.requires_grad else None
    return out


def reshape(x, shape):
    x = _as_node(x)
    out = Node(x.value.reshape(shape), (x,))
    out._backward = (lambda g: x._accumulate(g.reshape(x.value.shape))) if out.requires_grad else None
    return out


def repeat_rows(x, m):
    """(B, d) -> (B*m, d): each row repeated m times, preserving order."""
    x = _as_node(x)
    if x.value.ndim != 2:
        raise ValueError(f"repeat_rows expects a matrix, got shape {x.value.shape}")
    B, d = x.value.shape
    out = Node(np.repeat(x.value, m, axis=0), (x,))
    out._backward = (lambda g: x._accumulate(g.reshape(B, m, d).sum(axis=1))) if out.requires_grad else None
    return out


def slice_cols(x, start, stop, step=1):
    x = _as_node(x)
    out = Node(np.ascontiguousarray(x.value[:, start:stop:step]), (x,))

    def bwd(g):
        full = np.zeros_like(x.value)
        full[:, start:stop:step] = g
        x._accumulate(full)

    out._backward = bwd if out.requires_grad else None
    return out


def cumsum_cols(x):
    x = _as_node(x)
    out = Node(np.cumsum(x.value, axis=1), (x,))
    out._backward = (lambda g: x._accumulate(np.cumsum(g[:, ::-1], axis=1)[:, ::-1])) if out.requires_grad else None
    return out


def prepend_zero_col(x):
    """(B, K) -> (B, K+1) with a zero first column."""
    x = _as_node(x)
    B, K = x.value.shape
    padded = np.zeros((B, K + 1))
    padded[:, 1:] = x.value
    out = Node(padded, (x,))
    out._backward = (lambda g: x._accumulate(g[:, 1:])) if out.requires_grad else None
    return out


# -- reverse pass ----------------------------------------------------------


def backward(root):
    """Run the reverse pass from a scalar root.

    All gradient accumulators reachable from root are zeroed first, then each
    node is visited exactly once in reverse topological order. Returns a dict
    mapping every leaf parameter node to its gradient array.
    """
    if root.value.size != 1:
        raise ValueError(f"backward root must be scalar, got shape {root.value.shape}")

    topo, visited = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited and p.requires_grad:
                stack.append((p, False))

    for node in topo:
        node.grad = np.zeros_like(node.value)

    root.grad = np.ones_like(root.value)
    for node in reversed(topo):
        if node._backward is not None:
            node._backward(node.grad)

    return {n: n.grad for n in topo if n.requires_grad and not n._parents}


def finite_diff_grad(f, params, step=1e-6):
    """Central-difference gradient oracle.

    f maps a list of numpy arrays to a scalar. The step for each coordinate
    is scaled as step * (1 + |value|). Returns one gradient array per input
    array, evaluated with (f(p+s) - f(p-s)) / (2 s) coordinate by coordinate.
    """
    if step <= 0:
        raise ValueError("finite difference step must be positive")
    work = [np.array(p, dtype=np.float64) for p in params]
    grads = [np.zeros_like(p) for p in work]
    for a, g in zip(work, grads):
        flat_a, flat_g = a.reshape(-1), g.reshape(-1)
        for i in range(flat_a.size):
            orig = flat_a[i]
            s = step * (1.0 + abs(orig))
            flat_a[i] = orig + s
            f_plus = float(f(work))
            flat_a[i] = orig - s
            f_minus = float(f(work))
            flat_a[i] = orig
            flat_g[i] = (f_plus - f_minus) / (2.0 * s)
    return grads
