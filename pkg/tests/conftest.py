import pytest

from wordchar.embedding import WordCharConfig
from wordchar.model import ModelConfig
from wordchar.text import LabeledExample, PipelineConfig
from wordchar.training import TrainConfig


def tiny_model_config(word_char=True, **kw):
    return ModelConfig(pipeline=PipelineConfig(max_words=6, max_chars=3, tokenizer=kw.pop("tokenizer", "dictionary-greedy")),
                       wordchar=WordCharConfig(word_dim=6, char_dim=8), hidden_size=kw.pop("hidden_size", 8),
                       word_char=word_char, **kw)


def tiny_train_config(word_char=True, **kw):
    model_kw = {k: kw.pop(k) for k in ("hidden_size", "tokenizer") if k in kw}
    return TrainConfig(model=tiny_model_config(word_char, **model_kw), **{"eval_split": 0.0, **kw})


FOUR = [
    LabeledExample("明天 天气 怎么样", "weather"),
    LabeledExample("今天 下雨 吗", "weather"),
    LabeledExample("订 一张 机票", "flight"),
    LabeledExample("飞机 几点 起飞", "flight"),
]


@pytest.fixture
def four_examples():
    return list(FOUR)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
