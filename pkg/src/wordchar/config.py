"""Flat ``key = value`` run configuration with file < flag precedence."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .embedding import WordCharConfig
from .errors import ConfigError
from .model import ModelConfig
from .text import PipelineConfig
from .training import TrainConfig


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    v = text.strip().lower()
    return None if v in ("none", "off", "0", "") else float(text)


def _opt_str(text: str):
    return text.strip() or None


# key -> (section, parser)
KEYS = {
    "max_words": ("pipeline", int),
    "max_chars": ("pipeline", int),
    "tokenizer": ("pipeline", str),
    "word_dim": ("wordchar", int),
    "char_dim": ("wordchar", int),
    "window": ("wordchar", int),
    "activation": ("wordchar", str),
    "hidden_size": ("model", int),
    "word_char": ("model", _bool),
    "embedding_low": ("model", float),
    "embedding_high": ("model", float),
    "conv_init": ("model", float),
    "lstm_init": ("model", float),
    "forget_bias": ("model", float),
    "batch_size": ("train", int),
    "epochs": ("train", int),
    "learning_rate": ("train", float),
    "optimizer": ("train", str),
    "seed": ("train", int),
    "eval_split": ("train", float),
    "clip_norm": ("train", _opt_float),
    "keep_best": ("train", _bool),
    "adam_beta1": ("train", float),
    "adam_beta2": ("train", float),
    "adam_eps": ("train", float),
    "members": ("run", int),
    "jobs": ("run", int),
    "lexicon": ("run", _opt_str),
    "word_embeddings": ("run", _opt_str),
    "validation": ("run", _opt_str),
}


@dataclass
class RunConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    members: int = 3
    jobs: int = 1
    lexicon: str | None = None
    word_embeddings: str | None = None
    validation: str | None = None


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are rejected."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def build_run_config(file_values: dict[str, str] | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then file values, then ``overrides`` (already typed, or strings)."""
    merged: dict = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            parser = KEYS[key][1]
            try:
                merged[key] = parser(value) if isinstance(value, str) else value
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}") from None

    sections: dict[str, dict] = {"pipeline": {}, "wordchar": {}, "model": {}, "train": {}, "run": {}}
    for key, value in merged.items():
        sections[KEYS[key][0]][key] = value
    model = ModelConfig(pipeline=PipelineConfig(**sections["pipeline"]),
                        wordchar=WordCharConfig(**sections["wordchar"]), **sections["model"])
    run = RunConfig(train=TrainConfig(model=model, **sections["train"]), **sections["run"])
    if run.jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {run.jobs}")
    return run
