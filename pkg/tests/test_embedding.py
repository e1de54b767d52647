import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wordchar import tensor as T
from wordchar.embedding import (
    ConvFilter,
    EmbeddingTable,
    WordCharConfig,
    char_conv2d,
    char_maxpool,
    integrate,
    load_word_vectors,
    lookup_chars,
    lookup_words,
    word_char_features,
)
from wordchar.errors import ConfigError, DataError, DimensionError
from wordchar.gradcheck import check_gradients, numerical_gradient, relative_error
from wordchar.tensor import Tape, Tensor
from wordchar.text import Vocabulary

from oracles import conv_loops, maxpool_loops


def table(rows):
    return EmbeddingTable(Tensor(np.asarray(rows, dtype=float)))


def random_filter(rng, window, d_c, d_w, activation="relu"):
    return ConvFilter(Tensor(rng.normal(size=(1, window, d_c, d_w)), requires_grad=True),
                      Tensor(rng.normal(size=d_w), requires_grad=True), activation)


class TestLookup:
    def test_gather(self):
        t = table(np.arange(8).reshape(4, 2))
        assert lookup_words([[2]], t).data.tolist() == [[[4.0, 5.0]]]

    def test_all_pad(self):
        t = table(np.arange(8).reshape(4, 2))
        out = lookup_words(np.zeros((2, 3), dtype=int), t)
        assert out.shape == (2, 3, 2) and (out.data == t.table.data[0]).all()

    @pytest.mark.parametrize("ids", [[[1, 3, 1], [0, 1, 2]], [[[1, 3], [1, 1]], [[0, 2], [3, 3]]]])
    def test_gradient_counts_occurrences(self, ids):
        rng = np.random.default_rng(0)
        t = EmbeddingTable(Tensor(rng.normal(size=(4, 3))))
        lookup = lookup_words if np.ndim(ids) == 2 else lookup_chars

        def f():
            return T.sum(lookup(ids, t))

        with Tape() as tape:
            loss = f()
        tape.backward(loss)
        numeric = numerical_gradient(lambda: f().item(), t.table)
        counts = np.bincount(np.ravel(ids), minlength=4)
        np.testing.assert_allclose(numeric[:, 0], counts, atol=1e-6)
        assert relative_error(t.table.grad, numeric) < 1e-8
        np.testing.assert_array_equal(t.table.grad, np.repeat(counts[:, None], 3, axis=1))

    def test_char_lookup_shape(self):
        t = table(np.ones((5, 7)))
        assert lookup_chars(np.zeros((2, 3, 4), dtype=int), t).shape == (2, 3, 4, 7)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            lookup_words([[4]], table(np.ones((4, 2))))

    def test_rank_checked(self):
        with pytest.raises(DimensionError):
            lookup_words([1, 2], table(np.ones((4, 2))))
        with pytest.raises(DimensionError):
            lookup_chars([[1, 2]], table(np.ones((4, 2))))

    def test_uniform_init_range(self):
        t = EmbeddingTable.uniform(50, 20, np.random.default_rng(0))
        assert t.table.data.min() >= 0.0 and t.table.data.max() < 1.0 and t.trainable


class TestConv:
    def test_zero_filter(self):
        conv = ConvFilter(Tensor(np.zeros((1, 2, 3, 4))), Tensor(np.zeros(4)), "identity")
        out = char_conv2d(Tensor(np.random.default_rng(0).normal(size=(2, 3, 5, 3))), conv)
        assert out.shape == (2, 3, 5, 4) and not out.data.any()

    def test_identity_filter(self):
        x = np.random.default_rng(1).normal(size=(2, 3, 4, 1))
        conv = ConvFilter(Tensor([[[[1.0]]]]), Tensor([0.0]), "identity")
        np.testing.assert_array_equal(char_conv2d(Tensor(x), conv).data, x)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(2)
        C = rng.normal(size=(1, 2, 3, 2))
        conv = random_filter(rng, 2, 2, 2, "identity")
        got = char_conv2d(Tensor(C), conv).data
        np.testing.assert_allclose(got, conv_loops(C, conv.weight.data, conv.bias.data, "identity"), atol=1e-12, rtol=0)

    @pytest.mark.parametrize("activation", ["relu", "tanh", "identity"])
    @pytest.mark.parametrize("window", [1, 2, 3])
    def test_oracle_windows_and_activations(self, activation, window):
        rng = np.random.default_rng(window)
        C = rng.normal(size=(2, 3, 4, 3))
        conv = random_filter(rng, window, 3, 5, activation)
        np.testing.assert_allclose(char_conv2d(Tensor(C), conv).data,
                                   conv_loops(C, conv.weight.data, conv.bias.data, activation), atol=1e-12, rtol=0)

    def test_last_position_sees_zero_padding(self):
        # window 2, all-ones filter: position j sums chars j and j+1, last position only itself
        C = np.arange(1.0, 4.0).reshape(1, 1, 3, 1)
        conv = ConvFilter(Tensor(np.ones((1, 2, 1, 1))), Tensor([0.0]), "identity")
        assert char_conv2d(Tensor(C), conv).data.ravel().tolist() == [3.0, 5.0, 3.0]

    def test_dimension_mismatch(self):
        conv = ConvFilter(Tensor(np.zeros((1, 2, 3, 4))), Tensor(np.zeros(4)))
        with pytest.raises(DimensionError):
            char_conv2d(Tensor(np.zeros((1, 1, 2, 5))), conv)

    def test_filter_validation(self):
        with pytest.raises(DimensionError):
            ConvFilter(Tensor(np.zeros((2, 2, 3, 4))), Tensor(np.zeros(4)))
        with pytest.raises(DimensionError):
            ConvFilter(Tensor(np.zeros((1, 2, 3, 4))), Tensor(np.zeros(3)))
        with pytest.raises(ConfigError):
            ConvFilter(Tensor(np.zeros((1, 2, 3, 4))), Tensor(np.zeros(4)), "gelu")

    def test_gradients(self):
        rng = np.random.default_rng(3)
        C = Tensor(rng.normal(size=(2, 2, 3, 4)), requires_grad=True, name="C")
        conv = random_filter(rng, 2, 4, 3, "tanh")
        w = Tensor(rng.normal(size=(2, 2, 3, 3)))
        errs = check_gradients(lambda: T.sum(T.mul(char_conv2d(C, conv), w)), [C, conv.weight, conv.bias])
        assert max(errs.values()) < 1e-6


class TestMaxPool:
    def test_single_char_is_identity(self):
        x = np.random.default_rng(4).normal(size=(2, 3, 1, 4))
        np.testing.assert_array_equal(char_maxpool(Tensor(x)).data, x.reshape(2, 3, 4))

    def test_max(self):
        assert char_maxpool(Tensor(np.array([1.0, 5.0, 3.0]).reshape(1, 1, 3, 1))).data.ravel().tolist() == [5.0]

    def test_matches_loop_oracle(self):
        x = np.random.default_rng(5).normal(size=(3, 4, 5, 6))
        np.testing.assert_array_equal(char_maxpool(Tensor(x)).data, maxpool_loops(x))

    def test_gradient_routes_to_first_max(self):
        x = Tensor(np.array([1.0, 5.0, 5.0]).reshape(1, 1, 3, 1), requires_grad=True)
        with Tape() as tape:
            loss = T.sum(char_maxpool(x))
        tape.backward(loss)
        assert x.grad.ravel().tolist() == [0.0, 1.0, 0.0]


class TestIntegrate:
    def test_average_of_equals(self):
        x = np.random.default_rng(6).normal(size=(2, 3, 4))
        np.testing.assert_array_equal(integrate(Tensor(x), Tensor(x)).data, x)

    def test_values(self):
        assert integrate(Tensor([2.0, 4.0]), Tensor([0.0, 2.0])).data.tolist() == [1.0, 3.0]

    def test_gradient_is_half(self):
        w, p = Tensor(np.ones((2, 3)), requires_grad=True), Tensor(np.ones((2, 3)), requires_grad=True)
        with Tape() as tape:
            loss = T.sum(integrate(w, p))
        tape.backward(loss)
        assert (w.grad == 0.5).all() and (p.grad == 0.5).all()

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            integrate(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2))))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(1, 4), st.integers(1, 5), st.integers(1, 5),
       st.integers(0, 2**31))
def test_shape_chain(S, M, N, d_c, d_w, seed):
    rng = np.random.default_rng(seed)
    chars = table(rng.uniform(size=(6, d_c)))
    words = table(rng.uniform(size=(6, d_w)))
    conv = random_filter(rng, 2, d_c, d_w)
    C = lookup_chars(rng.integers(0, 6, size=(S, M, N)), chars)
    O = char_conv2d(C, conv)
    P = char_maxpool(O)
    I = integrate(lookup_words(rng.integers(0, 6, size=(S, M)), words), P)
    assert (C.shape, O.shape, P.shape, I.shape) == ((S, M, N, d_c), (S, M, N, d_w), (S, M, d_w), (S, M, d_w))


def test_conv_locality():
    rng = np.random.default_rng(7)
    chars = table(rng.uniform(size=(10, 4)))
    words = table(rng.uniform(size=(10, 3)))
    conv = random_filter(rng, 2, 4, 3, "tanh")
    word_ids = rng.integers(0, 10, size=(2, 4))
    char_ids = rng.integers(0, 10, size=(2, 4, 3))
    base = word_char_features(word_ids, char_ids, words, chars, conv).data
    for i in range(4):
        changed = char_ids.copy()
        changed[:, i] = (changed[:, i] + 1) % 10
        out = word_char_features(word_ids, changed, words, chars, conv).data
        others = [r for r in range(4) if r != i]
        np.testing.assert_array_equal(out[:, others], base[:, others])
        assert not np.array_equal(out[:, i], base[:, i])


def test_module_end_to_end_gradients():
    rng = np.random.default_rng(8)
    chars = EmbeddingTable(Tensor(rng.uniform(size=(7, 4)), name="chars"))
    words = EmbeddingTable(Tensor(rng.uniform(size=(7, 3)), name="words"))
    conv = random_filter(rng, 2, 4, 3, "tanh")
    word_ids = rng.integers(0, 7, size=(2, 3))
    char_ids = rng.integers(0, 7, size=(2, 3, 4))
    w = Tensor(rng.normal(size=(2, 3, 3)))
    errs = check_gradients(lambda: T.sum(T.mul(word_char_features(word_ids, char_ids, words, chars, conv), w)),
                           [chars.table, words.table, conv.weight, conv.bias])
    assert max(errs.values()) < 1e-4


class TestWordVectors:
    def test_loads_known_tokens(self, tmp_path):
        vocab = Vocabulary(["天气", "机票"])
        t = EmbeddingTable.uniform(len(vocab), 3, np.random.default_rng(0))
        before = t.table.data.copy()
        path = tmp_path / "vec.txt"
        path.write_text("2 3\n天气 0.1 0.2 0.3\n其他 1 1 1\n", encoding="utf-8")
        assert load_word_vectors(path, vocab, t) == 1
        assert t.table.data[vocab.id("天气")].tolist() == [0.1, 0.2, 0.3]
        np.testing.assert_array_equal(t.table.data[vocab.id("机票")], before[vocab.id("机票")])

    def test_dimension_mismatch(self, tmp_path):
        vocab = Vocabulary(["天气"])
        t = EmbeddingTable.uniform(len(vocab), 3, np.random.default_rng(0))
        path = tmp_path / "vec.txt"
        path.write_text("天气 0.1 0.2\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_word_vectors(path, vocab, t)


def test_wordchar_config_defaults_and_validation():
    cfg = WordCharConfig()
    assert (cfg.word_dim, cfg.char_dim, cfg.window) == (60, 300, 2)
    with pytest.raises(ConfigError):
        WordCharConfig(window=0)
