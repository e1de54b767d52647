# coding: utf-8

# # From characters to one vector per word
#
# Each word is looked up twice: once as a word, once as its characters.
# A filter spanning two neighbouring characters slides along the
# characters, max-pooling keeps the strongest response per output channel,
# and the result is averaged with the word vector.

import numpy as np

from wordchar.embedding import (
    ConvFilter,
    EmbeddingTable,
    char_conv2d,
    char_maxpool,
    integrate,
    lookup_chars,
    lookup_words,
)
from wordchar.text import LabeledExample, PipelineConfig, build_vocabularies, encode

pipeline = PipelineConfig(max_words=4, max_chars=3, tokenizer="whitespace")
vocabs = build_vocabularies([LabeledExample("步行 街道 很 热闹", "chat")], pipeline)

# In[1]: "步行街" is unknown as a word but every one of its characters is known

e = encode("步行街 热闹", vocabs, pipeline)
print("word ids:", e.word_ids, "(1 is <unk>)")
print("char ids:\n", e.char_ids)

# In[2]: the pieces, shape by shape

rng = np.random.default_rng(0)
d_w, d_c = 4, 5
words = EmbeddingTable.uniform(len(vocabs.words), d_w, rng)
chars = EmbeddingTable.uniform(len(vocabs.chars), d_c, rng)
conv = ConvFilter.uniform(2, d_c, d_w, rng)

W = lookup_words(e.word_ids[None], words)
C = lookup_chars(e.char_ids[None], chars)
O = char_conv2d(C, conv)
P = char_maxpool(O)
I = integrate(W, P)
for name, t in (("W", W), ("C", C), ("O", O), ("P", P), ("I", I)):
    print(f"{name}: {t.shape}")

# In[3]: the unknown word still gets a word-specific input
#
# Its word half is the shared <unk> row, but the pooled character half
# differs from that of any other unknown word.

other = encode("鲸鱼 热闹", vocabs, pipeline)
I_other = integrate(lookup_words(other.word_ids[None], words),
                    char_maxpool(char_conv2d(lookup_chars(other.char_ids[None], chars), conv)))
print("same <unk> row:", np.array_equal(W.data[0, 0], lookup_words(other.word_ids[None], words).data[0, 0]))
print("different integrated vectors:", not np.allclose(I.data[0, 0], I_other.data[0, 0]))
