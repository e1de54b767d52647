"""Dataset ingestion, tokenization, vocabularies and fixed-size encoding."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError, DatasetParseError

PAD = 0
UNK = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"

TOKENIZERS = ("dictionary-greedy", "per-character", "whitespace")


@dataclass(frozen=True)
class LabeledExample:
    text: str
    label: str

    def __post_init__(self):
        if not self.text.strip():
            raise DataError("example text is empty")
        if not self.label.strip():
            raise DataError(f"example {self.text!r} has an empty label")


@dataclass
class PipelineConfig:
    max_words: int = 26
    max_chars: int = 5
    tokenizer: str = "dictionary-greedy"

    def __post_init__(self):
        if self.max_words < 1 or self.max_chars < 1:
            raise ConfigError(f"max_words and max_chars must be >= 1, got {self.max_words}, {self.max_chars}")
        if self.tokenizer not in TOKENIZERS:
            raise ConfigError(f"unknown tokenizer {self.tokenizer!r}; choose from {', '.join(TOKENIZERS)}")


def load_dataset(path) -> list[LabeledExample]:
    """Read ``label<TAB>text`` lines; blank lines are skipped."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        content = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw[: exc.start].count(b"\n") + 1
        raise DatasetParseError(path, line, "file is not valid UTF-8") from exc
    if content.startswith("\ufeff"):
        content = content[1:]

    examples = []
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise DatasetParseError(path, lineno, "expected 'label<TAB>text'")
        label, text = line.split("\t", 1)
        try:
            examples.append(LabeledExample(text=text.strip(), label=label.strip()))
        except DataError as exc:
            raise DatasetParseError(path, lineno, str(exc)) from None
    return examples


def load_lexicon(path) -> list[str]:
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        w = line.strip()
        if w:
            words.append(w)
    return words


def _greedy(chunk: str, lexicon: frozenset, longest: int) -> list[str]:
    out = []
    i = 0
    while i < len(chunk):
        for size in range(min(longest, len(chunk) - i), 1, -1):
            if chunk[i:i + size] in lexicon:
                out.append(chunk[i:i + size])
                i += size
                break
        else:
            out.append(chunk[i])
            i += 1
    return out


def tokenize(text: str, mode: str = "dictionary-greedy", lexicon: Iterable[str] | None = None) -> list[str]:
    """Split ``text`` into words.

    ``dictionary-greedy`` does forward maximum matching against ``lexicon``
    inside each whitespace-delimited chunk and falls back to single
    characters; matches never span whitespace.
    """
    if mode == "whitespace":
        return text.split()
    if mode == "per-character":
        return [ch for ch in text if not ch.isspace()]
    if mode == "dictionary-greedy":
        if lexicon is None:
            raise ConfigError("dictionary-greedy tokenization needs a lexicon")
        lex = lexicon if isinstance(lexicon, frozenset) else frozenset(lexicon)
        longest = max((len(w) for w in lex), default=1)
        words = []
        for chunk in text.split():
            words.extend(_greedy(chunk, lex, longest))
        return words
    raise ConfigError(f"unknown tokenizer {mode!r}")


class Vocabulary:
    """Dense token <-> id map. Word and char vocabularies reserve PAD=0, UNK=1."""

    def __init__(self, tokens: Iterable[str] = (), reserved: bool = True):
        self.reserved = reserved
        self.id_to_token: list[str] = [PAD_TOKEN, UNK_TOKEN] if reserved else []
        self.token_to_id: dict[str, int] = {t: i for i, t in enumerate(self.id_to_token)}
        for t in tokens:
            self.add(t)

    def add(self, token: str) -> int:
        idx = self.token_to_id.get(token)
        if idx is None:
            idx = len(self.id_to_token)
            self.token_to_id[token] = idx
            self.id_to_token.append(token)
        return idx

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token):
        return token in self.token_to_id

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.reserved == other.reserved and self.id_to_token == other.id_to_token

    def __repr__(self):
        return f"Vocabulary(size={len(self)}, reserved={self.reserved})"

    def id(self, token: str) -> int:
        if self.reserved:
            return self.token_to_id.get(token, UNK)
        try:
            return self.token_to_id[token]
        except KeyError:
            raise DataError(f"unknown label {token!r}") from None

    def token(self, idx: int) -> str:
        return self.id_to_token[idx]

    def to_list(self) -> list[str]:
        return list(self.id_to_token)

    @classmethod
    def from_list(cls, tokens: Sequence[str], reserved: bool = True) -> "Vocabulary":
        v = cls(reserved=reserved)
        body = tokens[2:] if reserved else tokens
        if reserved and list(tokens[:2]) != [PAD_TOKEN, UNK_TOKEN]:
            raise DataError("reserved vocabulary must start with PAD and UNK")
        for t in body:
            if t in v.token_to_id:
                raise DataError(f"duplicate vocabulary entry {t!r}")
            v.add(t)
        return v


@dataclass
class Vocabularies:
    words: Vocabulary
    chars: Vocabulary
    labels: Vocabulary
    lexicon: list[str] = field(default_factory=list)

    def tokenize(self, text: str, config: PipelineConfig) -> list[str]:
        lex = self._lexicon_set() if config.tokenizer == "dictionary-greedy" else None
        return tokenize(text, config.tokenizer, lex)

    def _lexicon_set(self) -> frozenset:
        cached = getattr(self, "_lexset", None)
        if cached is None:
            cached = self._lexset = frozenset(self.lexicon)
        return cached


def training_lexicon(examples: Iterable[LabeledExample]) -> list[str]:
    """Multi-character whitespace-delimited tokens of the training texts, in first-seen order."""
    seen = {}
    for ex in examples:
        for w in ex.text.split():
            if len(w) > 1:
                seen.setdefault(w, None)
    return list(seen)


def build_vocabularies(train: Sequence[LabeledExample], config: PipelineConfig,
                       lexicon: Sequence[str] | None = None) -> Vocabularies:
    """Word, char and label vocabularies from the training split only.

    Words and chars get ids in first-occurrence order; labels are sorted.
    Without an explicit ``lexicon`` the greedy tokenizer uses the training
    set's own pre-segmented words.
    """
    if not train:
        raise DataError("cannot build vocabularies from an empty training set")
    lexicon = list(lexicon) if lexicon is not None else training_lexicon(train)
    vocabs = Vocabularies(Vocabulary(), Vocabulary(), Vocabulary(sorted({ex.label for ex in train}), reserved=False),
                          lexicon)
    for ex in train:
        for w in vocabs.tokenize(ex.text, config):
            vocabs.words.add(w)
            for ch in w:
                vocabs.chars.add(ch)
    return vocabs


@dataclass
class EncodedExample:
    word_ids: np.ndarray     # [M]
    char_ids: np.ndarray     # [M, N]
    true_length: int
    label_id: int | None


@dataclass
class EncodedBatch:
    word_ids: np.ndarray     # [S, M]
    char_ids: np.ndarray     # [S, M, N]
    lengths: np.ndarray      # [S]
    labels: np.ndarray | None

    def __len__(self):
        return len(self.lengths)

    def subset(self, index) -> "EncodedBatch":
        return EncodedBatch(self.word_ids[index], self.char_ids[index], self.lengths[index],
                            None if self.labels is None else self.labels[index])


def encode_tokens(tokens: Sequence[str], vocabs: Vocabularies, config: PipelineConfig):
    m, n = config.max_words, config.max_chars
    tokens = list(tokens)[:m]
    word_ids = np.full(m, PAD, dtype=np.int64)
    char_ids = np.full((m, n), PAD, dtype=np.int64)
    for i, w in enumerate(tokens):
        word_ids[i] = vocabs.words.id(w)
        for j, ch in enumerate(w[:n]):
            char_ids[i, j] = vocabs.chars.id(ch)
    return word_ids, char_ids, len(tokens)


def encode(example: LabeledExample | str, vocabs: Vocabularies, config: PipelineConfig) -> EncodedExample:
    """Tokenize and pad/truncate to exactly ``M`` words of ``N`` chars.

    ``example`` may be a bare string for unlabeled queries.
    """
    text = example if isinstance(example, str) else example.text
    word_ids, char_ids, length = encode_tokens(vocabs.tokenize(text, config), vocabs, config)
    label = None if isinstance(example, str) else vocabs.labels.id(example.label)
    return EncodedExample(word_ids, char_ids, length, label)


def encode_batch(examples: Sequence[LabeledExample | str], vocabs: Vocabularies,
                 config: PipelineConfig) -> EncodedBatch:
    encoded = [encode(ex, vocabs, config) for ex in examples]
    m, n = config.max_words, config.max_chars
    labels = None
    if encoded and all(e.label_id is not None for e in encoded):
        labels = np.array([e.label_id for e in encoded], dtype=np.int64)
    return EncodedBatch(
        np.stack([e.word_ids for e in encoded]) if encoded else np.zeros((0, m), dtype=np.int64),
        np.stack([e.char_ids for e in encoded]) if encoded else np.zeros((0, m, n), dtype=np.int64),
        np.array([e.true_length for e in encoded], dtype=np.int64),
        labels,
    )


def decode_words(word_ids: Sequence[int], vocabs: Vocabularies) -> list[str]:
    return [vocabs.words.token(int(i)) for i in word_ids if i != PAD]
