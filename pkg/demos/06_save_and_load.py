# coding: utf-8

# # Model files
#
# A model file carries the configs and vocabularies as JSON metadata, then
# every parameter as raw little-endian float64, then a SHA-256 of all of it.

import tempfile
from pathlib import Path

import numpy as np

from wordchar.embedding import WordCharConfig
from wordchar.errors import ChecksumError, TruncatedFileError
from wordchar.model import ModelConfig
from wordchar.serialize import load_model, save_model
from wordchar.synthetic import bundled_corpus
from wordchar.training import TrainConfig, train

corpus = bundled_corpus()
model, _ = train(corpus, TrainConfig(epochs=5, eval_split=0.0,
                                     model=ModelConfig(wordchar=WordCharConfig(word_dim=16, char_dim=24),
                                                       hidden_size=32)))

path = Path(tempfile.mkdtemp()) / "intent.bin"
save_model(model, path)
blob = path.read_bytes()
print(path.name, len(blob), "bytes, header", blob[:8])

# In[1]: reloaded predictions match to the last bit

texts = [ex.text for ex in corpus]
print("identical:", np.array_equal(load_model(path).predict_proba(texts), model.predict_proba(texts)))

# In[2]: damage is caught on load

path.write_bytes(blob[:-100])
try:
    load_model(path)
except TruncatedFileError as exc:
    print("truncated ->", exc)

flipped = bytearray(blob)
flipped[len(blob) // 2] ^= 1
path.write_bytes(bytes(flipped))
try:
    load_model(path)
except ChecksumError as exc:
    print("flipped bit ->", exc)
