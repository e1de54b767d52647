# coding: utf-8

# # Three seeds, one vote
#
# Members share vocabularies and data but differ in initialization and
# shuffling order. Each query goes to the class most members picked.

from wordchar.embedding import WordCharConfig
from wordchar.ensemble import train_ensemble, vote
from wordchar.model import ModelConfig
from wordchar.synthetic import bundled_corpus
from wordchar.training import TrainConfig, evaluate

# In[1]: the rule itself

print(vote([2, 2, 0]))                     # plain majority
print(vote([0, 1, 2], [0.8, 0.9, 0.7]))    # three-way tie: trust the best validation score

# In[2]: a small ensemble on the bundled corpus

corpus = bundled_corpus()
config = TrainConfig(epochs=30, learning_rate=1e-2, eval_split=0.2,
                     model=ModelConfig(wordchar=WordCharConfig(word_dim=32, char_dim=48), hidden_size=64))
ens, _ = train_ensemble(corpus, config, members=3, jobs=3)
print("seeds:", ens.seeds, " validation F1:", [round(f, 3) for f in ens.validation_f1])

queries = ["今天 天气 怎么样", "放 一首 周杰伦 的 歌", "红烧肉 怎么 做", "你 好 呀"]
ids, agree = ens.predict_ids(queries)
for q, i, a in zip(queries, ids, agree):
    print(f"{q:<16} {ens.labels[i]:<9} {a:.2f} of members agree")

# In[3]: members one by one
for i, m in enumerate(ens.members):
    print(f"member {i}: train macro F1 {evaluate(m, corpus).macro_f1:.3f}")
