"""Single-layer LSTM over integrated word vectors, plus the softmax head."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import DataError, DimensionError
from .tensor import Tensor

GATES = ("f", "i", "C", "o")


@dataclass
class LstmParams:
    """Gate weights act on ``[h_{t-1}, I_t]`` (hidden state first)."""

    W_f: Tensor
    W_i: Tensor
    W_C: Tensor
    W_o: Tensor
    b_f: Tensor
    b_i: Tensor
    b_C: Tensor
    b_o: Tensor

    def __post_init__(self):
        hidden = self.b_f.shape[0] if self.b_f.data.ndim == 1 else 0
        if hidden < 1:
            raise DimensionError(f"hidden size must be positive, got bias shape {self.b_f.shape}")
        rows = self.W_f.shape[0]
        for g in GATES:
            w, b = getattr(self, f"W_{g}"), getattr(self, f"b_{g}")
            if w.shape != (rows, hidden) or b.shape != (hidden,):
                raise DimensionError(f"gate {g}: weight {w.shape} / bias {b.shape} inconsistent with hidden={hidden}")
        if rows <= hidden:
            raise DimensionError(f"gate weights have {rows} rows, need hidden + input_dim > {hidden}")

    @property
    def hidden(self) -> int:
        return self.b_f.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_f.shape[0] - self.hidden

    def tensors(self) -> dict:
        return {f"lstm.{k}": getattr(self, k) for k in
                ("W_f", "W_i", "W_C", "W_o", "b_f", "b_i", "b_C", "b_o")}

    @classmethod
    def uniform(cls, input_dim: int, hidden: int, rng: np.random.Generator,
                scale: float = 0.08, forget_bias: float = 1.0) -> "LstmParams":
        def w(name):
            return Tensor(rng.uniform(-scale, scale, size=(hidden + input_dim, hidden)), requires_grad=True,
                          name=f"lstm.{name}")

        weights = {f"W_{g}": w(f"W_{g}") for g in GATES}
        biases = {f"b_{g}": Tensor(np.zeros(hidden), requires_grad=True, name=f"lstm.b_{g}") for g in GATES}
        biases["b_f"].data[:] = forget_bias
        return cls(**weights, **biases)


@dataclass
class OutputHead:
    W_y: Tensor   # [hidden, K]
    b_y: Tensor   # [K]

    def __post_init__(self):
        if self.W_y.data.ndim != 2 or self.b_y.shape != (self.W_y.shape[1],):
            raise DimensionError(f"output head shapes {self.W_y.shape} / {self.b_y.shape} inconsistent")
        if self.W_y.shape[1] < 2:
            raise DimensionError(f"need at least 2 intent classes, got {self.W_y.shape[1]}")

    @property
    def num_classes(self) -> int:
        return self.W_y.shape[1]

    @classmethod
    def uniform(cls, hidden: int, num_classes: int, rng: np.random.Generator, scale: float = 0.08) -> "OutputHead":
        return cls(Tensor(rng.uniform(-scale, scale, size=(hidden, num_classes)), requires_grad=True, name="head.W_y"),
                   Tensor(np.zeros(num_classes), requires_grad=True, name="head.b_y"))


@dataclass
class LstmState:
    h: Tensor
    C: Tensor

    @classmethod
    def zeros(cls, batch: int, hidden: int) -> "LstmState":
        return cls(Tensor(np.zeros((batch, hidden))), Tensor(np.zeros((batch, hidden))))


def _gate(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    return T.add(T.matmul(x, w), T.expand(b, x.shape[0]))


def lstm_step(inputs: Tensor, state: LstmState, params: LstmParams) -> LstmState:
    """One timestep; ``inputs`` is ``[S, d_w]``."""
    if inputs.data.ndim != 2 or inputs.shape[1] != params.input_dim:
        raise DimensionError(f"lstm input must be [S, {params.input_dim}], got {inputs.shape}")
    if state.h.shape != (inputs.shape[0], params.hidden) or state.C.shape != state.h.shape:
        raise DimensionError(f"lstm state shapes {state.h.shape}/{state.C.shape} do not fit batch {inputs.shape[0]}")
    x = T.concat([state.h, inputs], axis=1)
    f = T.sigmoid(_gate(x, params.W_f, params.b_f))
    i = T.sigmoid(_gate(x, params.W_i, params.b_i))
    candidate = T.tanh(_gate(x, params.W_C, params.b_C))
    c = T.add(T.mul(f, state.C), T.mul(i, candidate))
    o = T.sigmoid(_gate(x, params.W_o, params.b_o))
    h = T.mul(o, T.tanh(c))
    return LstmState(h, c)


def final_hidden(inputs: Tensor, lengths, params: LstmParams) -> Tensor:
    """Hidden state of each sentence at its own last real word.

    ``inputs`` is ``[S, M, d_w]``. Steps past the longest sentence are
    never run; their outputs could not be read anyway.
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    s, m = inputs.shape[0], inputs.shape[1]
    if lengths.shape != (s,):
        raise DimensionError(f"need {s} lengths, got shape {lengths.shape}")
    bad = np.flatnonzero((lengths < 1) | (lengths > m))
    if bad.size:
        raise DataError(f"true length {int(lengths[bad[0]])} of sentence {int(bad[0])} outside [1, {m}]")

    state = LstmState.zeros(s, params.hidden)
    hs = []
    for t in range(int(lengths.max())):
        state = lstm_step(T.take(inputs, t, axis=1), state, params)
        hs.append(state.h)
    return T.pick(hs, lengths - 1)


def logits(inputs: Tensor, lengths, lstm: LstmParams, head: OutputHead) -> Tensor:
    h = final_hidden(inputs, lengths, lstm)
    return T.add(T.matmul(h, head.W_y), T.expand(head.b_y, h.shape[0]))


def classify(inputs: Tensor, lengths, lstm: LstmParams, head: OutputHead) -> Tensor:
    """Intent probabilities ``[S, K]``; each row sums to 1."""
    return T.softmax(logits(inputs, lengths, lstm, head))


def predict(probabilities) -> np.ndarray:
    """Row-wise argmax, lowest class id on ties."""
    p = probabilities.data if isinstance(probabilities, Tensor) else np.asarray(probabilities)
    return np.argmax(p, axis=-1)
