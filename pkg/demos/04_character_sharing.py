# coding: utf-8

# # When test words were never seen, but their characters were
#
# `char_sharing_corpus` builds training topic words from pairs of topic
# characters and test topic words from other combinations of the same
# characters. A word-only model sees nothing but <unk> for the test topic
# words; the word-char model can still read their characters.
#
# The dimensions are cut down from the defaults so this runs in seconds.

import statistics

from wordchar.embedding import WordCharConfig
from wordchar.model import ModelConfig
from wordchar.synthetic import char_sharing_corpus
from wordchar.text import PipelineConfig
from wordchar.training import TrainConfig, evaluate, train

train_set, test_set = char_sharing_corpus(seed=0)
print("train:", train_set[0].text, "->", train_set[0].label)
print("test: ", test_set[0].text, "->", test_set[0].label)


def config(word_char, seed):
    return TrainConfig(epochs=30, seed=seed, eval_split=0.0,
                       model=ModelConfig(pipeline=PipelineConfig(tokenizer="whitespace"),
                                         wordchar=WordCharConfig(word_dim=60, char_dim=100),
                                         hidden_size=128, word_char=word_char))


# In[1]

scores = {True: [], False: []}
for seed in range(3):
    train_set, test_set = char_sharing_corpus(seed)
    for word_char in (True, False):
        model, _ = train(train_set, config(word_char, seed))
        scores[word_char].append(evaluate(model, test_set).macro_f1)
    print(f"seed {seed}: word-char {scores[True][-1]:.3f}  word-only {scores[False][-1]:.3f}")

print(f"mean: word-char {statistics.mean(scores[True]):.3f}  word-only {statistics.mean(scores[False]):.3f}")
