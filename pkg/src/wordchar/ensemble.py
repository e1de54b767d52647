"""Hard majority voting over independently seeded models."""

from __future__ import annotations

import dataclasses
import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embedding import load_word_vectors
from .errors import ChecksumError, DataError, ModelFormatError, NumericDivergenceError, UsageError
from .model import IntentModel
from .serialize import file_digest, load_model, save_model
from .text import LabeledExample
from .training import TrainConfig, fit, prepare_vocabularies, split_validation

MANIFEST_FORMAT = "wordchar-ensemble"
MANIFEST_VERSION = 1


def vote(member_predictions: Sequence[int], validation_f1: Sequence[float | None] | None = None) -> int:
    """Modal class among members' predictions.

    Ties go to the tied class predicted by the member with the highest
    validation macro F1, then to the lowest member index.
    """
    preds = list(member_predictions)
    if not preds:
        raise UsageError("vote needs at least one member prediction")
    counts = Counter(preds)
    top = max(counts.values())
    tied = {c for c, n in counts.items() if n == top}
    if len(tied) == 1:
        return next(iter(tied))
    f1 = list(validation_f1) if validation_f1 is not None else [None] * len(preds)
    if len(f1) != len(preds):
        raise UsageError(f"{len(f1)} validation scores for {len(preds)} members")
    candidates = [(-(f1[i] if f1[i] is not None else float("-inf")), i)
                  for i, c in enumerate(preds) if c in tied]
    return preds[min(candidates)[1]]


@dataclass
class EnsembleModel:
    members: list[IntentModel]
    seeds: list[int]

    def __post_init__(self):
        if not self.members:
            raise UsageError("an ensemble needs at least one member")
        first = self.members[0]
        for m in self.members[1:]:
            if m.labels != first.labels or m.vocabs.words != first.vocabs.words \
                    or m.vocabs.chars != first.vocabs.chars or m.config != first.config:
                raise DataError("ensemble members must share vocabularies, labels and architecture")

    @property
    def labels(self) -> list[str]:
        return self.members[0].labels

    @property
    def validation_f1(self) -> list[float | None]:
        return [m.validation_f1 for m in self.members]

    def member_predictions(self, data) -> np.ndarray:
        """``[E, n]`` class ids."""
        batch = self.members[0].encode(data) if not hasattr(data, "lengths") else data
        return np.stack([m.predict_ids(batch) for m in self.members])

    def predict_ids(self, data) -> tuple[np.ndarray, np.ndarray]:
        """Voted class ids and the fraction of members that agreed with each."""
        preds = self.member_predictions(data)
        f1 = self.validation_f1
        ids = np.array([vote(preds[:, j].tolist(), f1) for j in range(preds.shape[1])], dtype=np.int64)
        agree = (preds == ids[None, :]).mean(axis=0) if preds.size else np.zeros(0)
        return ids, agree

    def predict(self, data) -> list[str]:
        ids, _ = self.predict_ids(data)
        return [self.labels[int(i)] for i in ids]


def train_ensemble(examples: Sequence[LabeledExample], config: TrainConfig | None = None, members: int = 3, *,
                   validation: Sequence[LabeledExample] | None = None, seeds: Sequence[int] | None = None,
                   word_vectors=None, lexicon: Sequence[str] | None = None, jobs: int = 1,
                   on_epoch=None) -> tuple[EnsembleModel, list]:
    """Train ``members`` models that differ only by seed (init and data order).

    The validation split and vocabularies are built once from
    ``config.seed`` and shared. Member ``i`` uses seed ``config.seed + i``
    unless ``seeds`` is given. ``on_epoch(member_index, record)`` is called
    after every epoch of every member.
    """
    config = config or TrainConfig()
    if members < 1:
        raise UsageError(f"ensemble size must be >= 1, got {members}")
    seeds = list(seeds) if seeds is not None else [config.seed + i for i in range(members)]
    if len(seeds) != members:
        raise UsageError(f"{len(seeds)} seeds given for {members} members")
    if not examples:
        raise DataError("training set is empty")
    if validation is None:
        train_set, val_set = split_validation(examples, config.eval_split, config.seed)
    else:
        train_set, val_set = list(examples), list(validation)
    vocabs = prepare_vocabularies(train_set, config.model, [ex.label for ex in examples], lexicon)
    if len(vocabs.labels) < 2:
        raise DataError(f"need at least 2 intent classes, found {vocabs.labels.to_list()}")

    def run(index: int):
        cfg = dataclasses.replace(config, seed=seeds[index])
        model = IntentModel.initialize(cfg.model, vocabs, cfg.seed)
        if word_vectors is not None:
            load_word_vectors(word_vectors, vocabs.words, model.words)
        callback = None if on_epoch is None else (lambda rec: on_epoch(index, rec))
        try:
            history = fit(model, train_set, cfg, validation=val_set, on_epoch=callback)
        except NumericDivergenceError as exc:
            raise NumericDivergenceError(exc.epoch, exc.batch, member=index) from None
        return model, history

    if jobs > 1 and members > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, range(members)))
    else:
        results = [run(i) for i in range(members)]
    ensemble = EnsembleModel([m for m, _ in results], seeds)
    return ensemble, [h for _, h in results]


def save_ensemble(ensemble: EnsembleModel, out_dir) -> Path:
    """Write ``member-<i>.bin`` files plus ``manifest.json``; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, (model, seed) in enumerate(zip(ensemble.members, ensemble.seeds)):
        name = f"member-{i}.bin"
        save_model(model, out_dir / name)
        entries.append({"file": name, "seed": seed, "validation_f1": model.validation_f1,
                        "sha256": file_digest(out_dir / name)})
    manifest = {"format": MANIFEST_FORMAT, "version": MANIFEST_VERSION, "members": entries}
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_ensemble(manifest_path) -> EnsembleModel:
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format") != MANIFEST_FORMAT:
        raise ModelFormatError(f"{manifest_path} is not an ensemble manifest")
    if manifest.get("version") != MANIFEST_VERSION:
        raise ModelFormatError(f"unsupported ensemble manifest version {manifest.get('version')}")
    members, seeds = [], []
    for entry in manifest["members"]:
        path = manifest_path.parent / entry["file"]
        if "sha256" in entry and file_digest(path) != entry["sha256"]:
            raise ChecksumError(f"{path} does not match the digest recorded in the manifest")
        model = load_model(path)
        model.validation_f1 = entry.get("validation_f1")
        members.append(model)
        seeds.append(entry["seed"])
    return EnsembleModel(members, seeds)
