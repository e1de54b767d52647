"""Dense float64 tensors with tape-based reverse-mode differentiation.

Operations executed while a :class:`Tape` is active are appended to it in
execution order, which is a valid topological order for the reverse sweep.
Outside a tape the same functions run as plain numpy arithmetic, which is
what inference uses.

There is deliberately no implicit broadcasting: binary elementwise ops need
equal shapes or a Python scalar, and row-vector biases go through
:func:`expand` first.
"""

from __future__ import annotations

import threading
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DataError, DimensionError, NumericError, UsageError

_local = threading.local()


def _tape_stack() -> list:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = _local.stack = []
    return stack


def active_tape() -> "Tape | None":
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """A float64 array plus an optional accumulated gradient."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_tape")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.array(data, dtype=np.float64)
        _check_finite(arr, name)
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name
        self._tape = None

    @classmethod
    def _wrap(cls, arr: np.ndarray, op: str) -> "Tensor":
        _check_finite(arr, op)
        t = cls.__new__(cls)
        t.data = arr
        t.grad = None
        t.requires_grad = False
        t.name = None
        t._tape = None
        return t

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._tape is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"


def _check_finite(arr: np.ndarray, where) -> None:
    if not np.isfinite(arr).all():
        raise NumericError(f"non-finite values produced by {where or 'tensor construction'}")


class Record(NamedTuple):
    op: str
    output: Tensor
    inputs: tuple
    backward: Callable


class Tape:
    """Ordered log of differentiable operations.

    Use as a context manager around a forward pass, then call
    :meth:`backward` once on the scalar loss.
    """

    def __init__(self):
        self.records: list[Record] = []
        self.replayed = False

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self.records)

    def backward(self, loss: Tensor) -> None:
        if loss._tape is not self:
            raise UsageError("loss was not recorded on this tape")
        if self.replayed:
            raise UsageError("tape already replayed; record a fresh forward pass before calling backward again")
        if loss.size != 1:
            raise DimensionError(f"backward needs a scalar loss, got shape {loss.shape}")
        self.replayed = True

        pending = {id(loss): np.ones_like(loss.data)}
        for rec in reversed(self.records):
            g = pending.pop(id(rec.output), None)
            if g is None:
                continue
            for inp, gi in zip(rec.inputs, rec.backward(g)):
                if gi is None or not inp.requires_grad:
                    continue
                if inp.is_leaf:
                    inp.grad = gi.copy() if inp.grad is None else inp.grad + gi
                else:
                    key = id(inp)
                    pending[key] = gi if key not in pending else pending[key] + gi


def backward(loss: Tensor) -> None:
    """Populate ``.grad`` on every trainable leaf that contributed to ``loss``."""
    if loss._tape is None:
        raise UsageError("backward() called on a tensor that no tape recorded")
    loss._tape.backward(loss)


def record(op: str, data: np.ndarray, inputs: Sequence[Tensor], grad_fn: Callable) -> Tensor:
    """Wrap ``data`` as the output of ``op`` and log it if a tape is active.

    ``grad_fn(g)`` must return one gradient (or None) per input.
    """
    out = Tensor._wrap(data, op)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out._tape = tape
        tape.records.append(Record(op, out, tuple(inputs), grad_fn))
    return out


def _need(t: Tensor) -> bool:
    return t.requires_grad


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


# ---------------------------------------------------------------------------
# linear algebra and shape plumbing


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")

    def grad_fn(g):
        return (g @ b.data.T if _need(a) else None,
                a.data.T @ g if _need(b) else None)

    return record("matmul", a.data @ b.data, (a, b), grad_fn)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    if int(np.prod(shape)) != a.size:
        raise DimensionError(f"reshape: cannot view {a.shape} as {shape}")
    return record("reshape", a.data.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = tuple(tensors)
    ndim = tensors[0].data.ndim
    ax = axis % ndim
    for t in tensors[1:]:
        other = [d for i, d in enumerate(t.shape) if i != ax]
        first = [d for i, d in enumerate(tensors[0].shape) if i != ax]
        if t.data.ndim != ndim or other != first:
            raise DimensionError(f"concat: incompatible shapes {[x.shape for x in tensors]}")
    bounds = np.cumsum([t.shape[ax] for t in tensors])[:-1]

    def grad_fn(g):
        return tuple(np.split(g, bounds, axis=ax))

    return record("concat", np.concatenate([t.data for t in tensors], axis=ax), tensors, grad_fn)


def expand(a: Tensor, n: int) -> Tensor:
    """Stack ``n`` copies of ``a`` along a new leading axis."""
    out = np.broadcast_to(a.data, (n,) + a.shape).copy()
    return record("expand", out, (a,), lambda g: (g.sum(axis=0),))


def take(a: Tensor, index: int, axis: int) -> Tensor:
    """Select one position along ``axis`` (the axis is dropped)."""
    ax = axis % a.data.ndim

    def grad_fn(g):
        full = np.zeros_like(a.data)
        idx = [slice(None)] * a.data.ndim
        idx[ax] = index
        full[tuple(idx)] = g
        return (full,)

    return record("take", np.take(a.data, index, axis=ax), (a,), grad_fn)


def pick(steps: Sequence[Tensor], index) -> Tensor:
    """Row ``s`` of the result is row ``s`` of ``steps[index[s]]``.

    All step tensors are ``[S, H]``.
    """
    steps = tuple(steps)
    index = np.asarray(index, dtype=np.int64)
    n = steps[0].shape[0]
    if index.shape != (n,):
        raise DimensionError(f"pick: need {n} indices, got shape {index.shape}")
    if index.min() < 0 or index.max() >= len(steps):
        raise DataError(f"pick: step index out of range [0, {len(steps)})")
    rows = np.arange(n)
    out = np.stack([steps[k].data[r] for r, k in zip(rows, index)])

    def grad_fn(g):
        grads = [None] * len(steps)
        for k in np.unique(index):
            sel = index == k
            gk = np.zeros_like(steps[k].data)
            gk[sel] = g[sel]
            grads[k] = gk
        return tuple(grads)

    return record("pick", out, steps, grad_fn)


def gather_rows(table: Tensor, ids) -> Tensor:
    """Embedding lookup: ``out[..., :] = table[ids[...], :]``.

    The backward pass scatter-adds into the table rows, so a row used k
    times receives k contributions.
    """
    ids = np.asarray(ids)
    if ids.dtype.kind not in "iu":
        raise DataError(f"gather_rows: ids must be integers, got dtype {ids.dtype}")
    vocab = table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        bad = ids[(ids < 0) | (ids >= vocab)].ravel()[0]
        raise IndexError(f"id {bad} out of range for table with {vocab} rows")

    def grad_fn(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids.ravel(), g.reshape(-1, table.shape[1]))
        return (full,)

    return record("gather_rows", table.data[ids], (table,), grad_fn)


def max_over(a: Tensor, axis: int) -> Tensor:
    """Max along ``axis``; gradient goes to the first maximal position."""
    ax = axis % a.data.ndim
    arg = np.argmax(a.data, axis=ax)
    out = np.take_along_axis(a.data, np.expand_dims(arg, ax), axis=ax).squeeze(ax)

    def grad_fn(g):
        full = np.zeros_like(a.data)
        np.put_along_axis(full, np.expand_dims(arg, ax), np.expand_dims(g, ax), axis=ax)
        return (full,)

    return record("max_over", out, (a,), grad_fn)


def sum(a: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    return record("sum", np.asarray(a.data.sum()), (a,), lambda g: (np.full_like(a.data, g),))


# ---------------------------------------------------------------------------
# elementwise


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def add(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        return record("add_scalar", a.data + float(b), (a,), lambda g: (g,))
    _same_shape("add", a, b)
    return record("add", a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        return record("sub_scalar", a.data - float(b), (a,), lambda g: (g,))
    _same_shape("sub", a, b)
    return record("sub", a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b) -> Tensor:
    if not isinstance(b, Tensor):
        return scale(a, b)
    _same_shape("mul", a, b)
    return record("mul", a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data))


def scale(a: Tensor, s: float) -> Tensor:
    s = float(s)
    return record("scale", a.data * s, (a,), lambda g: (g * s,))


def sigmoid(a: Tensor) -> Tensor:
    y = _sigmoid(a.data)
    return record("sigmoid", y, (a,), lambda g: (g * y * (1.0 - y),))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return record("tanh", y, (a,), lambda g: (g * (1.0 - y * y),))


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return record("relu", np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def identity(a: Tensor) -> Tensor:
    return a


_BINARY = {"add": add, "sub": sub, "mul": mul, "scale": scale}
_UNARY = {"sigmoid": sigmoid, "tanh": tanh, "relu": relu, "identity": identity}
ACTIVATIONS = _UNARY


def elementwise(op: str, a: Tensor, b=None) -> Tensor:
    """Dispatch by name: add, sub, mul, scale take a second operand; sigmoid, tanh, relu do not."""
    if op in _BINARY:
        if b is None:
            raise UsageError(f"elementwise {op!r} needs a second operand")
        return _BINARY[op](a, b)
    if op in _UNARY:
        return _UNARY[op](a)
    raise UsageError(f"unknown elementwise op {op!r}")


# ---------------------------------------------------------------------------
# probabilities and loss


def _softmax_rows(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax(logits: Tensor) -> Tensor:
    if logits.data.ndim != 2:
        raise DimensionError(f"softmax expects [S, K] logits, got {logits.shape}")
    p = _softmax_rows(logits.data)

    def grad_fn(g):
        return (p * (g - (g * p).sum(axis=-1, keepdims=True)),)

    return record("softmax", p, (logits,), grad_fn)


def softmax_cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean negative log-likelihood of ``labels`` under softmax(logits)."""
    if logits.data.ndim != 2:
        raise DimensionError(f"softmax_cross_entropy expects [S, K] logits, got {logits.shape}")
    n, k = logits.shape
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise DimensionError(f"expected {n} labels, got shape {labels.shape}")
    bad = np.flatnonzero((labels < 0) | (labels >= k))
    if bad.size:
        i = int(bad[0])
        raise DataError(f"label {int(labels[i])} at index {i} outside [0, {k})")

    z = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    rows = np.arange(n)
    loss = np.asarray((log_norm - z[rows, labels]).mean())

    def grad_fn(g):
        d = _softmax_rows(logits.data)
        d[rows, labels] -= 1.0
        return (d * (g / n),)

    return record("softmax_cross_entropy", loss, (logits,), grad_fn)
