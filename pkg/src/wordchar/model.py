"""The full intent classifier: embeddings, optional char path, LSTM, head."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import classifier, embedding
from .classifier import LstmParams, OutputHead
from .embedding import ConvFilter, EmbeddingTable, WordCharConfig
from .errors import ConfigError, DimensionError
from .tensor import Tensor
from .text import EncodedBatch, LabeledExample, PipelineConfig, Vocabularies, encode_batch

INFERENCE_CHUNK = 256


@dataclass
class ModelConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    wordchar: WordCharConfig = field(default_factory=WordCharConfig)
    hidden_size: int = 512
    word_char: bool = True      # False -> word-only LSTM baseline
    embedding_low: float = 0.0
    embedding_high: float = 1.0
    conv_init: float = 0.05
    lstm_init: float = 0.08
    forget_bias: float = 1.0

    def __post_init__(self):
        if self.hidden_size < 1:
            raise ConfigError(f"hidden_size must be positive, got {self.hidden_size}")
        if not self.embedding_low < self.embedding_high:
            raise ConfigError("embedding_low must be below embedding_high")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["pipeline"] = PipelineConfig(**d["pipeline"])
        d["wordchar"] = WordCharConfig(**d["wordchar"])
        return cls(**d)


class IntentModel:
    """All trainable arrays plus the vocabularies needed to encode text."""

    def __init__(self, config: ModelConfig, vocabs: Vocabularies, words: EmbeddingTable,
                 chars: EmbeddingTable | None, conv: ConvFilter | None, lstm: LstmParams, head: OutputHead):
        if config.word_char and (chars is None or conv is None):
            raise ConfigError("word-char model needs a char table and a conv filter")
        if words.dim != lstm.input_dim:
            raise DimensionError(f"word dim {words.dim} does not match LSTM input dim {lstm.input_dim}")
        if head.num_classes != len(vocabs.labels):
            raise DimensionError(f"head has {head.num_classes} classes, label vocabulary has {len(vocabs.labels)}")
        if conv is not None and (conv.weight.shape[2] != chars.dim or conv.weight.shape[3] != words.dim):
            raise DimensionError(f"conv filter {conv.weight.shape} does not fit d_c={chars.dim}, d_w={words.dim}")
        self.config = config
        self.vocabs = vocabs
        self.words = words
        self.chars = chars if config.word_char else None
        self.conv = conv if config.word_char else None
        self.lstm = lstm
        self.head = head
        self.validation_f1: float | None = None

    @classmethod
    def initialize(cls, config: ModelConfig, vocabs: Vocabularies, seed: int) -> "IntentModel":
        rng = np.random.default_rng(seed)
        wc = config.wordchar
        words = EmbeddingTable.uniform(len(vocabs.words), wc.word_dim, rng, config.embedding_low,
                                       config.embedding_high, name="embed.words")
        chars = conv = None
        if config.word_char:
            chars = EmbeddingTable.uniform(len(vocabs.chars), wc.char_dim, rng, config.embedding_low,
                                           config.embedding_high, name="embed.chars")
            conv = ConvFilter.uniform(wc.window, wc.char_dim, wc.word_dim, rng, config.conv_init, wc.activation)
        lstm = LstmParams.uniform(wc.word_dim, config.hidden_size, rng, config.lstm_init, config.forget_bias)
        head = OutputHead.uniform(config.hidden_size, len(vocabs.labels), rng, config.lstm_init)
        return cls(config, vocabs, words, chars, conv, lstm, head)

    @property
    def labels(self) -> list[str]:
        return self.vocabs.labels.to_list()

    def parameters(self) -> dict[str, Tensor]:
        params = {"embed.words": self.words.table}
        if self.config.word_char:
            params["embed.chars"] = self.chars.table
            params["conv.F"] = self.conv.weight
            params["conv.b"] = self.conv.bias
        params.update(self.lstm.tensors())
        params["head.W_y"] = self.head.W_y
        params["head.b_y"] = self.head.b_y
        return params

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.zero_grad()

    def encode(self, examples: Sequence[LabeledExample | str]) -> EncodedBatch:
        return encode_batch(examples, self.vocabs, self.config.pipeline)

    def features(self, batch: EncodedBatch) -> Tensor:
        """Integrated (or word-only) inputs ``[S, L, d_w]``, L = longest sentence in the batch.

        Positions past every sentence's length are dropped before any compute;
        they cannot reach the masked LSTM read-out.
        """
        width = max(int(batch.lengths.max()), 1)
        word_ids = batch.word_ids[:, :width]
        if not self.config.word_char:
            return embedding.lookup_words(word_ids, self.words)
        return embedding.word_char_features(word_ids, batch.char_ids[:, :width], self.words, self.chars, self.conv)

    def logits(self, batch: EncodedBatch) -> Tensor:
        lengths = np.maximum(batch.lengths, 1)
        return classifier.logits(self.features(batch), lengths, self.lstm, self.head)

    def predict_proba(self, data) -> np.ndarray:
        """Class probabilities for an :class:`EncodedBatch` or a list of texts/examples."""
        batch = data if isinstance(data, EncodedBatch) else self.encode(data)
        out = np.zeros((len(batch), self.head.num_classes))
        for start in range(0, len(batch), INFERENCE_CHUNK):
            part = batch.subset(slice(start, start + INFERENCE_CHUNK))
            lengths = np.maximum(part.lengths, 1)
            out[start:start + len(part)] = classifier.classify(self.features(part), lengths, self.lstm,
                                                               self.head).data
        return out

    def predict_ids(self, data) -> np.ndarray:
        return classifier.predict(self.predict_proba(data))

    def predict(self, data) -> list[str]:
        return [self.vocabs.labels.token(int(i)) for i in self.predict_ids(data)]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for name, p in self.parameters().items():
            h.update(name.encode())
            h.update(p.data.tobytes())
        return h.hexdigest()
