"""Mini-batch training, optimizers and evaluation."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import metrics
from .embedding import load_word_vectors
from .errors import ConfigError, DataError, NumericDivergenceError, NumericError, UsageError
from .metrics import MetricsReport
from .model import IntentModel, ModelConfig
from .tensor import Tape, Tensor, softmax_cross_entropy
from .text import LabeledExample, Vocabularies, Vocabulary, build_vocabularies

log = logging.getLogger(__name__)

OPTIMIZERS = ("adam", "sgd")


@dataclass
class TrainConfig:
    batch_size: int = 32
    epochs: int = 30
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    seed: int = 0
    eval_split: float = 0.1
    clip_norm: float | None = 5.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    keep_best: bool = True
    model: ModelConfig = field(default_factory=ModelConfig)

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        # zero is accepted so that a zero-step run can be used as a no-op check
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if not 0.0 <= self.eval_split < 1.0:
            raise ConfigError(f"eval_split must be in [0, 1), got {self.eval_split}")
        if self.clip_norm is not None and self.clip_norm <= 0:
            self.clip_norm = None


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    train_accuracy: float
    val_macro_f1: float | None
    elapsed: float


class SGD:
    def __init__(self, params: Sequence[Tensor], lr: float):
        self.params = list(params)
        self.lr = lr

    def step(self) -> None:
        for p in self.params:
            if p.grad is not None:
                p.data -= self.lr * p.grad


class Adam:
    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.t = 0

    def step(self) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            if p.grad is None:
                continue
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * p.grad * p.grad
            p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(params: Sequence[Tensor], config: TrainConfig):
    if config.optimizer == "sgd":
        return SGD(params, config.learning_rate)
    return Adam(params, config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps)


def clip_gradients(params: Sequence[Tensor], max_norm: float) -> float:
    """Rescale all grads in place so their global L2 norm is at most ``max_norm``."""
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    norm = float(np.sqrt(total))
    if np.isfinite(norm) and norm > max_norm:
        factor = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= factor
    return norm


def split_validation(examples: Sequence[LabeledExample], fraction: float, seed: int):
    """Seeded shuffle split; returns ``(train, validation)``."""
    examples = list(examples)
    if fraction <= 0 or len(examples) < 2:
        return examples, []
    n_val = min(max(1, int(round(len(examples) * fraction))), len(examples) - 1)
    order = np.random.default_rng([seed, 7]).permutation(len(examples))
    val = set(order[:n_val].tolist())
    return ([ex for i, ex in enumerate(examples) if i not in val],
            [ex for i, ex in enumerate(examples) if i in val])


def prepare_vocabularies(train: Sequence[LabeledExample], config: ModelConfig, all_labels: Sequence[str],
                         lexicon: Sequence[str] | None = None) -> Vocabularies:
    vocabs = build_vocabularies(train, config.pipeline, lexicon)
    vocabs.labels = Vocabulary(sorted(set(all_labels)), reserved=False)
    return vocabs


def train(examples: Sequence[LabeledExample], config: TrainConfig | None = None, *,
          validation: Sequence[LabeledExample] | None = None,
          vocabs: Vocabularies | None = None,
          word_vectors=None,
          lexicon: Sequence[str] | None = None,
          on_epoch: Callable[[EpochRecord], None] | None = None):
    """Train one model; returns ``(model, history)``.

    When ``validation`` is None a seeded ``eval_split`` fraction of
    ``examples`` is held out. With ``keep_best`` the parameters from the
    epoch with the highest validation macro F1 are restored at the end.
    """
    config = config or TrainConfig()
    if not examples:
        raise DataError("training set is empty")
    if validation is None:
        train_set, val_set = split_validation(examples, config.eval_split, config.seed)
    else:
        train_set, val_set = list(examples), list(validation)
    if vocabs is None:
        # the label space comes from every supplied training example so a rare
        # class cannot vanish into the validation split
        vocabs = prepare_vocabularies(train_set, config.model, [ex.label for ex in examples], lexicon)
    if len(vocabs.labels) < 2:
        raise DataError(f"need at least 2 intent classes, found {vocabs.labels.to_list()}")

    model = IntentModel.initialize(config.model, vocabs, config.seed)
    if word_vectors is not None:
        n = load_word_vectors(word_vectors, vocabs.words, model.words)
        log.info("loaded %d pre-trained word vectors from %s", n, word_vectors)
    return model, fit(model, train_set, config, validation=val_set, on_epoch=on_epoch)


def fit(model: IntentModel, train_set: Sequence[LabeledExample], config: TrainConfig, *,
        validation: Sequence[LabeledExample] = (), on_epoch=None) -> list[EpochRecord]:
    """Run the training loop on an initialized model in place."""
    data = model.encode(train_set)
    val_data = model.encode(validation) if validation else None
    params = list(model.parameters().values())
    optimizer = make_optimizer(params, config)
    rng = np.random.default_rng([config.seed, 1])
    n = len(data)
    start = time.monotonic()
    history = []
    best_f1, best_state = -1.0, None
    model.validation_f1 = None

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total_loss, correct = 0.0, 0
        for b, lo in enumerate(range(0, n, config.batch_size), start=1):
            batch = data.subset(order[lo:lo + config.batch_size])
            model.zero_grad()
            try:
                # non-finite values are caught by the tensors themselves; silence numpy's duplicate warning
                with np.errstate(over="ignore", invalid="ignore"), Tape() as tape:
                    logits = model.logits(batch)
                    loss = softmax_cross_entropy(logits, batch.labels)
                tape.backward(loss)
            except NumericError:
                raise NumericDivergenceError(epoch, b) from None
            if config.clip_norm is not None:
                norm = clip_gradients(params, config.clip_norm)
                if not np.isfinite(norm):
                    raise NumericDivergenceError(epoch, b)
            optimizer.step()
            total_loss += loss.item() * len(batch)
            correct += int(np.sum(np.argmax(logits.data, axis=1) == batch.labels))

        val_f1 = None
        if val_data is not None:
            try:
                pred = model.predict_ids(val_data)
            except NumericError:
                raise NumericDivergenceError(epoch, "validation") from None
            val_f1 = metrics.macro_f1(val_data.labels, pred, len(model.vocabs.labels))
            if config.keep_best and val_f1 > best_f1:
                best_f1 = val_f1
                best_state = {k: p.data.copy() for k, p in model.parameters().items()}
        record = EpochRecord(epoch, total_loss / n, correct / n, val_f1, time.monotonic() - start)
        history.append(record)
        if on_epoch is not None:
            on_epoch(record)

    if best_state is not None:
        for k, p in model.parameters().items():
            p.data[...] = best_state[k]
        model.validation_f1 = best_f1
    elif history and history[-1].val_macro_f1 is not None:
        model.validation_f1 = history[-1].val_macro_f1
    model.zero_grad()
    return history


def evaluate(model: IntentModel, examples: Sequence[LabeledExample]) -> MetricsReport:
    """Unweighted F1 (and friends) over the model's full label space."""
    if not examples:
        raise UsageError("cannot evaluate on an empty data set")
    unseen = sorted({ex.label for ex in examples} - set(model.labels))
    if unseen:
        raise DataError(f"labels not known to the model: {', '.join(unseen)}")
    batch = model.encode(examples)
    return metrics.report(batch.labels, model.predict_ids(batch), model.labels)
