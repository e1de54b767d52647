"""Small bundled and generated corpora for smoke tests and demos."""

from __future__ import annotations

import itertools
from importlib import resources

import numpy as np

from .text import LabeledExample, load_dataset

# Topic characters per intent; no character is shared between intents.
TOPIC_CHARS = {
    "weather": "雨雪晴风云雷霜雾",
    "flight": "航机飞票舱港登班",
    "music": "歌曲唱乐音琴调谱",
    "cookbook": "菜汤炒煮饭肉面锅",
    "chat": "聊笑哈爱心梦玩趣",
}
FILLERS = ("请问", "我想", "帮我", "一下", "看看", "现在", "可以", "吗", "呢", "告诉我")


def bundled_corpus_path():
    return resources.files("wordchar") / "data" / "intents50.tsv"


def bundled_corpus() -> list[LabeledExample]:
    """50 pre-segmented queries, 10 for each of 5 intents."""
    with resources.as_file(bundled_corpus_path()) as path:
        return load_dataset(path)


def _cover_pairs(chars: str) -> list[str]:
    # every char appears in at least two training words
    n = len(chars)
    return [chars[i] + chars[(i + 1) % n] for i in range(n)]


def char_sharing_corpus(seed: int = 0, train_per_intent: int = 20, test_per_intent: int = 10):
    """Train/test split whose test topic words never occur in training.

    Training topic words are character bigrams that cover every topic
    character of an intent. Test topic words are other 2- and 3-character
    combinations of the same characters, so a word-level model only sees
    UNK for them while their characters are all known. Texts are
    whitespace-segmented; pair with the ``whitespace`` tokenizer.
    """
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label, chars in TOPIC_CHARS.items():
        train_words = _cover_pairs(chars)
        seen = set(train_words)
        unseen2 = [a + b for a, b in itertools.permutations(chars, 2) if a + b not in seen]
        unseen3 = ["".join(p) for p in itertools.permutations(chars, 3)]
        rng.shuffle(unseen2)
        rng.shuffle(unseen3)
        test_words = unseen2[:12] + unseen3[:12]

        for pool, n, out in ((train_words, train_per_intent, train), (test_words, test_per_intent, test)):
            for _ in range(n):
                tokens = [pool[rng.integers(len(pool))] for _ in range(rng.integers(1, 3))]
                tokens += [FILLERS[rng.integers(len(FILLERS))] for _ in range(rng.integers(1, 3))]
                rng.shuffle(tokens)
                out.append(LabeledExample(" ".join(tokens), label))
    order = rng.permutation(len(train))
    return [train[i] for i in order], test
