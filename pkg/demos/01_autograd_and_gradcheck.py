# coding: utf-8

# # A tape, a loss, and a finite-difference check
#
# Every operation in `wordchar.tensor` appends a record to the active tape.
# Calling `backward` on the tape walks those records in reverse and fills
# `.grad` on the leaf tensors that asked for one.

import numpy as np

from wordchar import tensor as T
from wordchar.gradcheck import check_gradients
from wordchar.tensor import Tape, Tensor

rng = np.random.default_rng(0)

# In[1]: a two-layer scorer over four examples and three classes

x = Tensor(rng.normal(size=(4, 5)))
W1 = Tensor(rng.normal(scale=0.5, size=(5, 6)), requires_grad=True, name="W1")
W2 = Tensor(rng.normal(scale=0.5, size=(6, 3)), requires_grad=True, name="W2")
labels = [0, 2, 1, 2]


def loss_fn():
    hidden = T.tanh(T.matmul(x, W1))
    return T.softmax_cross_entropy(T.matmul(hidden, W2), labels)


with Tape() as tape:
    loss = loss_fn()
print("loss:", loss.item())
print("ops on the tape:", [rec.op for rec in tape.records])

# In[2]: gradients land on the leaves

tape.backward(loss)
print("|dL/dW1| =", round(float(np.linalg.norm(W1.grad)), 4), " |dL/dW2| =", round(float(np.linalg.norm(W2.grad)), 4))

# A tape can only be replayed once. Running it again would double-count,
# so it raises instead.

try:
    tape.backward(loss)
except Exception as exc:
    print(type(exc).__name__, "-", exc)

# In[3]: compare with central differences
#
# `check_gradients` perturbs every entry by +/- eps, reruns the forward pass,
# and reports the norm-wise relative error for each parameter.

for name, err in check_gradients(loss_fn, [W1, W2]).items():
    print(f"{name}: relative error {err:.2e}")
