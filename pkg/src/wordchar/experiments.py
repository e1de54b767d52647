"""Side-by-side comparison of embedding configurations and ensembles."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

from .ensemble import train_ensemble
from .metrics import report
from .text import LabeledExample
from .training import TrainConfig, evaluate, train

SINGLE_ROWS = (
    # (name, word-char module on, uses pre-trained word vectors)
    ("Pre-trained word, LSTM", False, True),
    ("Randomly initialized word, LSTM", False, False),
    ("Pre-trained word, randomly initialized char, Word-Char LSTM", True, True),
    ("Randomly initialized word and char, Word-Char LSTM", True, False),
)
ENSEMBLE_ROWS = (
    ("Ensemble of word-char models", True),
    ("Ensemble of word-only LSTMs", False),
)


@dataclass
class ComparisonRow:
    name: str
    macro_f1: float | None   # None when the row needs inputs that were not supplied


def _with_word_char(config: TrainConfig, on: bool) -> TrainConfig:
    return dataclasses.replace(config, model=dataclasses.replace(config.model, word_char=on))


def compare_configurations(train_set: Sequence[LabeledExample], test_set: Sequence[LabeledExample],
                           config: TrainConfig, *, word_vectors=None, members: int = 3,
                           lexicon=None, log=None) -> tuple[list[ComparisonRow], list[ComparisonRow]]:
    """Train the four single-model settings and both ensembles; score each on ``test_set``.

    ``test_set`` is used only for scoring; validation comes from
    ``config.eval_split``.
    """
    singles = []
    for name, word_char, pretrained in SINGLE_ROWS:
        if pretrained and word_vectors is None:
            singles.append(ComparisonRow(name, None))
            continue
        model, _ = train(train_set, _with_word_char(config, word_char),
                         word_vectors=word_vectors if pretrained else None, lexicon=lexicon)
        f1 = evaluate(model, test_set).macro_f1
        singles.append(ComparisonRow(name, f1))
        if log:
            log(f"single={name!r} macro_f1={f1:.6f}")

    ensembles = []
    for name, word_char in ENSEMBLE_ROWS:
        ens, _ = train_ensemble(train_set, _with_word_char(config, word_char), members, lexicon=lexicon)
        batch = ens.members[0].encode(test_set)
        ids, _ = ens.predict_ids(batch)
        f1 = report(batch.labels, ids, ens.labels).macro_f1
        ensembles.append(ComparisonRow(name, f1))
        if log:
            log(f"ensemble={name!r} macro_f1={f1:.6f}")
    return singles, ensembles


def format_comparison(singles: Sequence[ComparisonRow], ensembles: Sequence[ComparisonRow]) -> str:
    def table(title, rows, numbered):
        width = max(len(r.name) for r in rows) + (3 if numbered else 0)
        out = [f"{title:<{width}}  F1(%)", "-" * (width + 8)]
        for i, r in enumerate(rows, start=1):
            label = f"{i} {r.name}" if numbered else r.name
            score = "n/a" if r.macro_f1 is None else f"{100 * r.macro_f1:.2f}"
            out.append(f"{label:<{width}}  {score:>5}")
        return "\n".join(out)

    return table("Embeddings and Model", singles, True) + "\n\n" + table("Ensemble", ensembles, False)
