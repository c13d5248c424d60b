"""Dense tensors with reverse-mode automatic differentiation.

Everything is double precision and row-major. Each operation records a
tape node on its output; ``backward`` walks the tape once in reverse
topological order and accumulates gradients on every tensor that
requires them. There is no broadcasting: shapes must match exactly
except where an op says otherwise.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor",
    "tensor",
    "parameter",
    "matmul",
    "add",
    "sub",
    "scale",
    "hadamard",
    "outer_sum",
    "exp",
    "log",
    "row_softmax",
    "row_log_softmax",
    "row_l2_normalize",
    "reduce_sum",
    "gather_rows",
    "take_per_row",
    "concat_cols",
    "concat_rows",
    "slice_cols",
    "leaky_relu",
    "elu",
    "transpose",
    "reshape",
    "detach",
    "backward",
    "grad_check",
    "zero_grads",
]


class TapeNode:
    """Backward record for one op: inputs and a vector-Jacobian closure."""

    __slots__ = ("op", "inputs", "vjp")

    def __init__(self, op, inputs, vjp):
        self.op = op
        self.inputs = inputs
        self.vjp = vjp  # grad_out -> tuple of grads, one per input (None ok)


class Tensor:
    """Dense float64 array, optionally participating in gradient flow.

    ``grad`` accumulates across backward passes until ``zero_grad`` is
    called; it is created lazily on first use.
    """

    __slots__ = ("data", "requires_grad", "grad", "node")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.node = None

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad = None

    def item(self):
        if self.data.size != 1:
            raise ValueError(f"item() on tensor of shape {self.data.shape}")
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"


def tensor(data):
    """Constant tensor: carries a value but never a gradient."""
    return Tensor(data, requires_grad=False)


def parameter(data):
    """Leaf tensor that accumulates gradients."""
    return Tensor(data, requires_grad=True)


def zero_grads(params):
    for p in params:
        p.zero_grad()


def _result(data, op, inputs, vjp):
    out = Tensor(data)
    if any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out.node = TapeNode(op, inputs, vjp)
    return out


def _need_2d(t, op):
    if t.data.ndim != 2:
        raise ValueError(f"{op} requires a 2-D tensor, got shape {t.data.shape}")


def _same_shape(a, b, op):
    if a.data.shape != b.data.shape:
        raise ValueError(f"{op}: shape mismatch {a.data.shape} vs {b.data.shape}")


def matmul(a, b):
    _need_2d(a, "matmul")
    _need_2d(b, "matmul")
    if a.data.shape[1] != b.data.shape[0]:
        raise ValueError(f"matmul: shape mismatch {a.data.shape} vs {b.data.shape}")
    out = a.data @ b.data
    need_a, need_b = a.requires_grad, b.requires_grad

    def vjp(g):
        return (g @ b.data.T if need_a else None,
                a.data.T @ g if need_b else None)

    return _result(out, "matmul", (a, b), vjp)


def add(a, b):
    _same_shape(a, b, "add")

    def vjp(g):
        return g, g

    return _result(a.data + b.data, "add", (a, b), vjp)


def sub(a, b):
    _same_shape(a, b, "sub")

    def vjp(g):
        return g, -g

    return _result(a.data - b.data, "sub", (a, b), vjp)


def scale(a, c):
    c = float(c)

    def vjp(g):
        return (c * g,)

    return _result(c * a.data, "scale", (a,), vjp)


def hadamard(a, b):
    _same_shape(a, b, "hadamard")
    need_a, need_b = a.requires_grad, b.requires_grad

    def vjp(g):
        return (g * b.data if need_a else None,
                g * a.data if need_b else None)

    return _result(a.data * b.data, "hadamard", (a, b), vjp)


def outer_sum(col, row):
    """out[i, j] = col[i, 0] + row[0, j]; the pairwise-sum grid of a
    column vector and a row vector."""
    if col.data.ndim != 2 or col.data.shape[1] != 1:
        raise ValueError(f"outer_sum: first argument must be n x 1, got {col.data.shape}")
    if row.data.ndim != 2 or row.data.shape[0] != 1:
        raise ValueError(f"outer_sum: second argument must be 1 x m, got {row.data.shape}")
    need_c, need_r = col.requires_grad, row.requires_grad

    def vjp(g):
        return (g.sum(axis=1, keepdims=True) if need_c else None,
                g.sum(axis=0, keepdims=True) if need_r else None)

    return _result(col.data + row.data, "outer_sum", (col, row), vjp)


def exp(a):
    out = np.exp(a.data)

    def vjp(g):
        return (g * out,)

    return _result(out, "exp", (a,), vjp)


def log(a):
    if np.any(a.data <= 0.0):
        bad = float(np.min(a.data))
        raise ValueError(f"log requires strictly positive inputs, min entry {bad}")

    def vjp(g):
        return (g / a.data,)

    return _result(np.log(a.data), "log", (a,), vjp)


def _softmax_forward(x, op):
    """Stable softmax along the last axis; -inf entries get probability 0."""
    m = np.max(x, axis=-1, keepdims=True)
    if not np.isfinite(m).all():  # max propagates NaN and +inf; -inf = empty row
        if np.isneginf(m).any():
            raise ValueError(f"{op}: a row is entirely -inf")
        raise ValueError(f"{op}: input contains NaN or +inf")
    e = x - m
    np.exp(e, out=e)
    e /= np.sum(e, axis=-1, keepdims=True)
    return e


def row_softmax(a):
    """Softmax over the last axis of a 1-D or 2-D tensor.

    -inf inputs map to exactly zero probability; a row of all -inf is
    rejected.
    """
    if a.data.ndim not in (1, 2):
        raise ValueError(f"row_softmax requires 1-D or 2-D, got {a.data.shape}")
    p = _softmax_forward(a.data, "row_softmax")

    def vjp(g):
        dot = np.sum(g * p, axis=-1, keepdims=True)
        return (p * (g - dot),)

    return _result(p, "row_softmax", (a,), vjp)


def row_log_softmax(a):
    """log(softmax) along the last axis, fused for numerical range.

    Inputs must be finite: unlike ``row_softmax`` a -inf score would
    produce a -inf log-probability, which no caller can multiply safely.
    """
    if a.data.ndim not in (1, 2):
        raise ValueError(f"row_log_softmax requires 1-D or 2-D, got {a.data.shape}")
    x = a.data
    if not np.isfinite(x).all():
        raise ValueError("row_log_softmax: input must be finite")
    m = np.max(x, axis=-1, keepdims=True)
    shifted = x - m
    lse = np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))
    out = shifted - lse
    p = np.exp(out)

    def vjp(g):
        return (g - p * np.sum(g, axis=-1, keepdims=True),)

    return _result(out, "row_log_softmax", (a,), vjp)


def row_l2_normalize(a):
    """Scale each row to unit Euclidean norm. Zero rows are rejected."""
    _need_2d(a, "row_l2_normalize")
    norms = np.linalg.norm(a.data, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("row_l2_normalize: zero row cannot be normalized")
    out = a.data / norms

    def vjp(g):
        dot = np.sum(g * out, axis=1, keepdims=True)
        return ((g - out * dot) / norms,)

    return _result(out, "row_l2_normalize", (a,), vjp)


def reduce_sum(a):
    shape = a.data.shape

    def vjp(g):
        return (np.full(shape, float(g)),)

    return _result(a.data.sum(), "reduce_sum", (a,), vjp)


def gather_rows(a, indices):
    _need_2d(a, "gather_rows")
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("gather_rows: indices must be 1-D")
    if idx.size and (idx.min() < 0 or idx.max() >= a.data.shape[0]):
        raise ValueError(f"gather_rows: index out of range for {a.data.shape[0]} rows")
    shape = a.data.shape

    def vjp(g):
        ga = np.zeros(shape)
        np.add.at(ga, idx, g)
        return (ga,)

    return _result(a.data[idx], "gather_rows", (a,), vjp)


def take_per_row(a, col_indices):
    """out[i, k] = a[i, col_indices[i, k]]; a column gather per row."""
    _need_2d(a, "take_per_row")
    idx = np.asarray(col_indices, dtype=np.int64)
    if idx.ndim != 2 or idx.shape[0] != a.data.shape[0]:
        raise ValueError(
            f"take_per_row: indices shape {idx.shape} does not match "
            f"{a.data.shape[0]} rows"
        )
    if idx.size and (idx.min() < 0 or idx.max() >= a.data.shape[1]):
        raise ValueError(f"take_per_row: column index out of range for {a.data.shape}")
    rows = np.arange(a.data.shape[0])[:, None]
    shape = a.data.shape

    def vjp(g):
        ga = np.zeros(shape)
        np.add.at(ga, (np.broadcast_to(rows, idx.shape), idx), g)
        return (ga,)

    return _result(a.data[rows, idx], "take_per_row", (a,), vjp)


def concat_cols(parts):
    parts = tuple(parts)
    for t in parts:
        _need_2d(t, "concat_cols")
    rows = {t.data.shape[0] for t in parts}
    if len(rows) != 1:
        raise ValueError(f"concat_cols: row counts differ: {sorted(rows)}")
    widths = [t.data.shape[1] for t in parts]
    splits = np.cumsum(widths)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=1))

    return _result(np.concatenate([t.data for t in parts], axis=1), "concat_cols", parts, vjp)


def concat_rows(parts):
    parts = tuple(parts)
    for t in parts:
        _need_2d(t, "concat_rows")
    cols = {t.data.shape[1] for t in parts}
    if len(cols) != 1:
        raise ValueError(f"concat_rows: column counts differ: {sorted(cols)}")
    heights = [t.data.shape[0] for t in parts]
    splits = np.cumsum(heights)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=0))

    return _result(np.concatenate([t.data for t in parts], axis=0), "concat_rows", parts, vjp)


def slice_cols(a, start, stop):
    _need_2d(a, "slice_cols")
    if not (0 <= start < stop <= a.data.shape[1]):
        raise ValueError(f"slice_cols: [{start}:{stop}] invalid for shape {a.data.shape}")
    shape = a.data.shape

    def vjp(g):
        ga = np.zeros(shape)
        ga[:, start:stop] = g
        return (ga,)

    return _result(a.data[:, start:stop].copy(), "slice_cols", (a,), vjp)


def leaky_relu(a, slope=0.2):
    slope = float(slope)
    factor = np.where(a.data > 0.0, 1.0, slope)

    def vjp(g):
        return (g * factor,)

    return _result(a.data * factor, "leaky_relu", (a,), vjp)


def elu(a, alpha=1.0):
    alpha = float(alpha)
    x = a.data
    neg = alpha * np.expm1(np.minimum(x, 0.0))
    out = np.where(x > 0.0, x, neg)

    def vjp(g):
        return (g * np.where(x > 0.0, 1.0, neg + alpha),)

    return _result(out, "elu", (a,), vjp)


def transpose(a):
    _need_2d(a, "transpose")

    def vjp(g):
        return (g.T,)

    return _result(a.data.T.copy(), "transpose", (a,), vjp)


def reshape(a, shape):
    shape = tuple(int(s) for s in shape)
    old = a.data.shape
    if int(np.prod(shape)) != a.data.size:
        raise ValueError(f"reshape: cannot view {old} as {shape}")

    def vjp(g):
        return (g.reshape(old),)

    return _result(a.data.reshape(shape), "reshape", (a,), vjp)


def detach(a):
    """Value-equal tensor cut off from gradient flow."""
    return Tensor(a.data, requires_grad=False)


def _toposort(root):
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        t, expanded = stack.pop()
        if expanded:
            order.append(t)
            continue
        if id(t) in seen or t.node is None:
            continue
        seen.add(id(t))
        stack.append((t, True))
        for parent in t.node.inputs:
            if parent.node is not None and id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(root):
    """Populate ``grad`` on every requires_grad leaf reachable from root.

    Root must be a scalar produced through taped ops. Repeated calls
    accumulate into existing leaf gradients.
    """
    if root.data.size != 1:
        raise ValueError(f"backward root must be scalar, got shape {root.data.shape}")
    if root.node is None:
        raise ValueError("backward root is not on the tape")

    grads = {id(root): np.ones_like(root.data)}
    order = _toposort(root)
    for t in reversed(order):
        g = grads.pop(id(t), None)
        if g is None:
            continue
        parent_grads = t.node.vjp(g)
        for parent, pg in zip(t.node.inputs, parent_grads):
            if pg is None or not parent.requires_grad:
                continue
            if parent.node is None:
                # leaf: accumulate persistently
                if parent.grad is None:
                    parent.grad = np.zeros_like(parent.data)
                parent.grad += pg
            else:
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg


def grad_check(f, x, h=1e-5):
    """Max relative error between analytic and central-difference gradients.

    ``f`` maps a Tensor to a scalar Tensor. The error for each entry is
    |analytic - numeric| / max(1, |numeric|).
    """
    leaf = parameter(np.array(x.data, copy=True))
    out = f(leaf)
    backward(out)
    analytic = leaf.grad.copy() if leaf.grad is not None else np.zeros_like(leaf.data)

    flat = leaf.data.reshape(-1)
    numeric = np.zeros_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = f(leaf).item()
        flat[i] = orig - h
        lo = f(leaf).item()
        flat[i] = orig
        numeric[i] = (hi - lo) / (2.0 * h)
    numeric = numeric.reshape(leaf.data.shape)

    err = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))
    return float(err.max()) if err.size else 0.0
