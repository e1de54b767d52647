"""Word/char embedding lookups and the char-bigram convolution feature path.

Shapes through the module::

    char ids [S,M,N] -> lookup -> [S,M,N,d_c] -> conv -> [S,M,N,d_w]
                     -> max over chars -> [S,M,d_w]
    word ids [S,M]   -> lookup -> [S,M,d_w]
    integrated       =  (words + pooled) / 2
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import tensor as T
from .errors import ConfigError, DataError, DimensionError
from .tensor import Tensor
from .text import Vocabulary

CONV_ACTIVATIONS = ("relu", "tanh", "identity")


@dataclass
class WordCharConfig:
    word_dim: int = 60
    char_dim: int = 300
    window: int = 2
    activation: str = "relu"

    def __post_init__(self):
        for name in ("word_dim", "char_dim", "window"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.activation not in CONV_ACTIVATIONS:
            raise ConfigError(f"conv activation must be one of {CONV_ACTIVATIONS}, got {self.activation!r}")


class EmbeddingTable:
    """A ``[vocab_size, dim]`` trainable table; row 0 is the PAD row."""

    def __init__(self, table: Tensor, trainable: bool = True):
        if table.data.ndim != 2 or table.shape[1] < 1:
            raise DimensionError(f"embedding table must be [vocab, d] with d > 0, got {table.shape}")
        self.table = table
        self.table.requires_grad = trainable

    @property
    def trainable(self) -> bool:
        return self.table.requires_grad

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    def __len__(self):
        return self.table.shape[0]

    @classmethod
    def uniform(cls, vocab_size: int, dim: int, rng: np.random.Generator,
                low: float = 0.0, high: float = 1.0, name: str | None = None) -> "EmbeddingTable":
        return cls(Tensor(rng.uniform(low, high, size=(vocab_size, dim)), name=name))


@dataclass
class ConvFilter:
    weight: Tensor   # [1, V, d_c, d_w]
    bias: Tensor     # [d_w]
    activation: str = "relu"

    def __post_init__(self):
        w = self.weight.shape
        if len(w) != 4 or w[0] != 1 or w[1] < 1:
            raise DimensionError(f"conv filter must be [1, V, d_c, d_w] with V >= 1, got {w}")
        if self.bias.shape != (w[3],):
            raise DimensionError(f"conv bias shape {self.bias.shape} does not match d_w={w[3]}")
        if self.activation not in CONV_ACTIVATIONS:
            raise ConfigError(f"unknown conv activation {self.activation!r}")

    @property
    def window(self) -> int:
        return self.weight.shape[1]

    @classmethod
    def uniform(cls, window: int, char_dim: int, word_dim: int, rng: np.random.Generator,
                scale: float = 0.05, activation: str = "relu") -> "ConvFilter":
        w = Tensor(rng.uniform(-scale, scale, size=(1, window, char_dim, word_dim)), requires_grad=True, name="conv.F")
        b = Tensor(rng.uniform(-scale, scale, size=(word_dim,)), requires_grad=True, name="conv.b")
        return cls(w, b, activation)


def lookup_words(word_ids, table: EmbeddingTable) -> Tensor:
    """``[S, M]`` ids -> ``[S, M, d_w]`` vectors."""
    word_ids = np.asarray(word_ids)
    if word_ids.ndim != 2:
        raise DimensionError(f"word ids must be [S, M], got shape {word_ids.shape}")
    return T.gather_rows(table.table, word_ids)


def lookup_chars(char_ids, table: EmbeddingTable) -> Tensor:
    """``[S, M, N]`` ids -> ``[S, M, N, d_c]`` vectors."""
    char_ids = np.asarray(char_ids)
    if char_ids.ndim != 3:
        raise DimensionError(f"char ids must be [S, M, N], got shape {char_ids.shape}")
    return T.gather_rows(table.table, char_ids)


def _char_windows(c: np.ndarray, window: int) -> np.ndarray:
    # zero-pad window-1 slots after the last char so every position has a full window
    s, m, n, d = c.shape
    padded = np.zeros((s, m, n + window - 1, d))
    padded[:, :, :n] = c
    return np.concatenate([padded[:, :, dj:dj + n] for dj in range(window)], axis=-1)


def conv_linear(chars: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Pre-activation convolution ``b_k + sum_{dj,q} C[s,i,j+dj,q] F[0,dj,q,k]``.

    The window spans one word (height 1) and ``V`` consecutive characters,
    zero-padded past the end so the char axis keeps length ``N``.
    """
    if chars.data.ndim != 4:
        raise DimensionError(f"char input must be [S, M, N, d_c], got {chars.shape}")
    _, window, d_c, d_w = weight.shape
    if chars.shape[3] != d_c:
        raise DimensionError(f"char embedding dim {chars.shape[3]} does not match filter d_c={d_c}")
    s, m, n, _ = chars.shape
    cols = _char_windows(chars.data, window).reshape(-1, window * d_c)
    kernel = weight.data.reshape(window * d_c, d_w)
    out = (cols @ kernel + bias.data).reshape(s, m, n, d_w)

    def grad_fn(g):
        g2 = g.reshape(-1, d_w)
        d_weight = (cols.T @ g2).reshape(weight.shape) if weight.requires_grad else None
        d_bias = g2.sum(axis=0) if bias.requires_grad else None
        d_chars = None
        if chars.requires_grad:
            d_cols = (g2 @ kernel.T).reshape(s, m, n, window, d_c)
            d_pad = np.zeros((s, m, n + window - 1, d_c))
            for dj in range(window):
                d_pad[:, :, dj:dj + n] += d_cols[:, :, :, dj]
            d_chars = d_pad[:, :, :n]
        return d_chars, d_weight, d_bias

    return T.record("conv_linear", out, (chars, weight, bias), grad_fn)


def char_conv2d(chars: Tensor, conv: ConvFilter) -> Tensor:
    """Char-window feature map ``[S, M, N, d_w]`` with the filter's activation applied."""
    return T.ACTIVATIONS[conv.activation](conv_linear(chars, conv.weight, conv.bias))


def char_maxpool(features: Tensor) -> Tensor:
    """Max over the char axis: ``[S, M, N, d_w] -> [S, M, d_w]``."""
    if features.data.ndim != 4:
        raise DimensionError(f"feature map must be [S, M, N, d_w], got {features.shape}")
    return T.max_over(features, axis=2)


def integrate(words: Tensor, pooled: Tensor) -> Tensor:
    """Elementwise average of word vectors and pooled char features."""
    if words.shape != pooled.shape:
        raise DimensionError(f"integrate: shape mismatch {words.shape} vs {pooled.shape}")
    return T.record("integrate", (words.data + pooled.data) / 2.0, (words, pooled),
                    lambda g: (g * 0.5, g * 0.5))


def word_char_features(word_ids, char_ids, words: EmbeddingTable, chars: EmbeddingTable,
                       conv: ConvFilter) -> Tensor:
    w = lookup_words(word_ids, words)
    p = char_maxpool(char_conv2d(lookup_chars(char_ids, chars), conv))
    return integrate(w, p)


def load_word_vectors(path, vocab: Vocabulary, table: EmbeddingTable) -> int:
    """Overwrite rows of ``table`` for tokens listed in a ``token v1 ... v_d`` text file.

    A leading word2vec-style ``count dim`` header is tolerated. Tokens not in
    ``vocab`` are ignored; vocab tokens missing from the file keep their
    current (random) rows. Returns the number of rows replaced.
    """
    dim = table.dim
    replaced = 0
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise DataError(f"{path}:{lineno}: expected {dim} values for {token!r}, got {len(values)}")
            if token not in vocab:
                continue
            try:
                vec = np.array([float(v) for v in values])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric vector component") from None
            if not np.isfinite(vec).all():
                raise DataError(f"{path}:{lineno}: non-finite vector component")
            table.table.data[vocab.id(token)] = vec
            replaced += 1
    return replaced
