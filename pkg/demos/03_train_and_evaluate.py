# coding: utf-8

# # Training on the bundled corpus
#
# Fifty pre-segmented queries over five intents ship with the package.
# Here a shrunken model is trained on 40 of them and scored on the rest.

import dataclasses

from wordchar.model import ModelConfig
from wordchar.embedding import WordCharConfig
from wordchar.synthetic import bundled_corpus
from wordchar.training import TrainConfig, evaluate, train

corpus = bundled_corpus()
held_out = corpus[::5]
train_set = [ex for i, ex in enumerate(corpus) if i % 5]
print(len(train_set), "train /", len(held_out), "held out")

config = TrainConfig(
    epochs=30,
    learning_rate=1e-2,
    eval_split=0.0,
    model=ModelConfig(wordchar=WordCharConfig(word_dim=32, char_dim=48), hidden_size=64),
)

# In[1]: one line per epoch

model, history = train(train_set, config,
                       on_epoch=lambda r: r.epoch % 10 == 0 and print(
                           f"epoch {r.epoch:3d}  loss {r.loss:.4f}  train acc {r.train_accuracy:.3f}"))

# In[2]: per-class scores
#
# Ten held-out sentences written with mostly different words than the
# training ones, so expect a modest and noisy number here.

print(evaluate(model, held_out).format_table())

# In[3]: predictions for new text. The default tokenizer splits
# unsegmented input greedily using the words seen in training.

print(model.predict(["明天北京会下雨吗", "帮我订一张去上海的机票"]))

# In[4]: same seed, same model

again, _ = train(train_set, config)
print("reproducible:", again.fingerprint() == model.fingerprint())

# A word-only baseline is the same config with the character path off.
baseline, _ = train(train_set, dataclasses.replace(config, model=dataclasses.replace(config.model, word_char=False)))
print("word-only macro F1:", round(evaluate(baseline, held_out).macro_f1, 3))
