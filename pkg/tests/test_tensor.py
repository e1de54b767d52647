import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wordchar import tensor as T
from wordchar.errors import DataError, DimensionError, NumericError, UsageError
from wordchar.gradcheck import numerical_gradient, relative_error
from wordchar.tensor import Tape, Tensor, backward


def loop_matmul(a, b):
    m, k = a.shape
    _, n = b.shape
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for q in range(k):
                acc += a[i, q] * b[q, j]
            out[i, j] = acc
    return out


def direct_cross_entropy(logits, labels):
    total = 0.0
    for row, y in zip(logits, labels):
        norm = sum(math.exp(v) for v in row)
        total += -math.log(math.exp(row[y]) / norm)
    return total / len(labels)


def fd_check(fn, *arrays, eps=1e-5):
    """Analytic vs central-difference gradients of sum-reduced ``fn``."""
    leaves = [Tensor(a, requires_grad=True) for a in arrays]
    with Tape() as tape:
        loss = fn(*leaves)
    tape.backward(loss)
    errs = []
    for leaf in leaves:
        num = numerical_gradient(lambda: fn(*leaves).item(), leaf, eps)
        errs.append(relative_error(leaf.grad, num))
    return errs


class TestMatmul:
    def test_identity(self):
        out = T.matmul(Tensor([[1, 0], [0, 1]]), Tensor([[3], [4]]))
        np.testing.assert_array_equal(out.data, [[3], [4]])

    def test_row_times_column(self):
        assert T.matmul(Tensor([[1, 2]]), Tensor([[3], [4]])).data.tolist() == [[11]]

    def test_matches_triple_loop(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=(3, 4)), rng.normal(size=(4, 2))
        np.testing.assert_allclose(T.matmul(Tensor(a), Tensor(b)).data, loop_matmul(a, b), rtol=0, atol=1e-12)

    def test_shape_error_names_both_shapes(self):
        with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 3\)"):
            T.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    def test_gradients(self):
        rng = np.random.default_rng(1)
        errs = fd_check(lambda a, b: T.sum(T.mul(T.matmul(a, b), T.matmul(a, b))),
                        rng.normal(size=(3, 4)), rng.normal(size=(4, 2)))
        assert max(errs) < 1e-6


class TestElementwise:
    def test_sigmoid_zero(self):
        assert T.sigmoid(Tensor([0.0])).data.tolist() == [0.5]

    def test_tanh_zero(self):
        assert T.tanh(Tensor([0.0])).data.tolist() == [0.0]

    def test_add(self):
        assert T.add(Tensor([1, 3]), Tensor([0, 2])).data.tolist() == [1, 5]

    def test_dispatch(self):
        a = Tensor([1.0, -2.0])
        assert T.elementwise("relu", a).data.tolist() == [1.0, 0.0]
        assert T.elementwise("scale", a, 3).data.tolist() == [3.0, -6.0]
        assert T.elementwise("sub", a, Tensor([1.0, 1.0])).data.tolist() == [0.0, -3.0]
        assert T.elementwise("add", a, 1.5).data.tolist() == [2.5, -0.5]
        with pytest.raises(UsageError):
            T.elementwise("add", a)
        with pytest.raises(UsageError):
            T.elementwise("softplus", a)

    def test_no_broadcasting(self):
        with pytest.raises(DimensionError):
            T.add(Tensor(np.ones((2, 3))), Tensor(np.ones(3)))
        with pytest.raises(DimensionError):
            T.mul(Tensor(np.ones((2, 1))), Tensor(np.ones((1, 2))))

    def test_sigmoid_is_stable_for_large_inputs(self):
        y = T.sigmoid(Tensor([-800.0, 800.0])).data
        assert y[0] >= 0.0 and y[1] == 1.0

    @pytest.mark.parametrize("op", ["sigmoid", "tanh", "relu"])
    def test_unary_gradients(self, op):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(4, 3))
        x[np.abs(x) < 1e-3] = 0.5   # keep clear of the relu kink
        (err,) = fd_check(lambda a: T.sum(T.mul(T.elementwise(op, a), T.elementwise(op, a))), x)
        assert err < 1e-6

    def test_binary_gradients(self):
        rng = np.random.default_rng(3)
        a, b = rng.normal(size=(2, 5)), rng.normal(size=(2, 5))
        f = lambda x, y: T.sum(T.mul(T.sub(T.add(x, y), T.scale(y, 0.3)), T.mul(x, y)))
        assert max(fd_check(f, a, b)) < 1e-6


class TestCrossEntropy:
    def test_uniform(self):
        loss = T.softmax_cross_entropy(Tensor([[0.0, 0.0]]), [0])
        assert loss.item() == pytest.approx(math.log(2), abs=1e-15)

    def test_saturated(self):
        loss = T.softmax_cross_entropy(Tensor([[10.0, -10.0]]), [0])
        assert loss.item() == pytest.approx(2.06e-9, rel=1e-2)

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(4)
        logits = rng.normal(size=(4, 5))
        labels = [0, 3, 4, 1]
        got = T.softmax_cross_entropy(Tensor(logits), labels).item()
        assert got == pytest.approx(direct_cross_entropy(logits, labels), abs=1e-12)

    def test_gradient_is_softmax_minus_onehot(self):
        rng = np.random.default_rng(5)
        logits = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        labels = [2, 0, 3]
        with Tape() as tape:
            loss = T.softmax_cross_entropy(logits, labels)
        tape.backward(loss)
        e = np.exp(logits.data)
        expected = e / e.sum(axis=1, keepdims=True)
        expected[np.arange(3), labels] -= 1
        np.testing.assert_allclose(logits.grad, expected / 3, atol=1e-15)

    def test_label_out_of_range(self):
        with pytest.raises(DataError, match="index 1"):
            T.softmax_cross_entropy(Tensor(np.zeros((2, 3))), [0, 3])

    def test_softmax_gradient(self):
        rng = np.random.default_rng(6)
        w = rng.normal(size=(2, 3))
        f = lambda x: T.sum(T.mul(T.softmax(x), Tensor(w)))
        (err,) = fd_check(f, rng.normal(size=(2, 3)))
        assert err < 1e-6


class TestBackward:
    def test_sum(self):
        x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
        with Tape():
            loss = T.sum(x)
        backward(loss)
        assert x.grad.tolist() == [1, 1, 1]

    def test_square(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape():
            loss = T.sum(T.mul(x, x))
        backward(loss)
        assert x.grad.tolist() == [2, 4]

    def test_replay_twice_is_an_error(self):
        x = Tensor([1.0], requires_grad=True)
        with Tape():
            loss = T.sum(x)
        backward(loss)
        with pytest.raises(UsageError):
            backward(loss)

    def test_unrecorded_loss(self):
        x = Tensor([1.0], requires_grad=True)
        with pytest.raises(UsageError):
            backward(T.sum(x))

    def test_gradients_accumulate_until_zeroed(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        for _ in range(2):
            with Tape():
                loss = T.sum(x)
            backward(loss)
        assert x.grad.tolist() == [2, 2]
        x.zero_grad()
        assert x.grad is None

    def test_constant_inputs_get_no_grad(self):
        x = Tensor([1.0], requires_grad=True)
        c = Tensor([5.0])
        with Tape():
            loss = T.sum(T.mul(x, c))
        backward(loss)
        assert c.grad is None and x.grad.tolist() == [5.0]

    def test_records_are_topologically_ordered(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with Tape() as tape:
            y = T.tanh(x)
            z = T.mul(y, y)
            T.sum(z)
        produced = set()
        for rec in tape.records:
            for inp in rec.inputs:
                assert inp.is_leaf or id(inp) in produced
            produced.add(id(rec.output))

    def test_non_finite_values_are_rejected(self):
        with pytest.raises(NumericError):
            Tensor([1.0, float("nan")])
        with np.errstate(over="ignore"), pytest.raises(NumericError):
            T.scale(Tensor([1e308]), 10.0)

    def test_replay_determinism(self):
        def run():
            rng = np.random.default_rng(9)
            a = Tensor(rng.normal(size=(5, 6)), requires_grad=True)
            b = Tensor(rng.normal(size=(6, 3)), requires_grad=True)
            with Tape() as tape:
                loss = T.softmax_cross_entropy(T.matmul(a, b), [0, 1, 2, 0, 1])
            tape.backward(loss)
            return loss.item(), a.grad.copy()

        (l1, g1), (l2, g2) = run(), run()
        assert l1 == l2 and np.array_equal(g1, g2)


class TestShapeOps:
    def test_plumbing_gradients(self):
        rng = np.random.default_rng(7)
        a, b = rng.normal(size=(2, 3)), rng.normal(size=(2, 2))
        w = Tensor(rng.normal(size=(4, 2, 5)))

        def f(x, y):
            c = T.concat([x, y], axis=1)                   # [2, 5]
            e = T.expand(T.reshape(c, (10,)), 4)          # [4, 10]
            e = T.reshape(e, (4, 2, 5))
            return T.sum(T.mul(e, w))

        assert max(fd_check(f, a, b)) < 1e-6

    def test_take_and_pick(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(3, 4, 2))
        w = Tensor(rng.normal(size=(3, 2)))

        def f(a):
            steps = [T.take(a, t, axis=1) for t in range(4)]
            return T.sum(T.mul(T.pick(steps, [3, 0, 2]), w))

        (err,) = fd_check(f, x)
        assert err < 1e-6
        steps = [Tensor(x[:, t]) for t in range(4)]
        np.testing.assert_array_equal(T.pick(steps, [3, 0, 2]).data, x[[0, 1, 2], [3, 0, 2]])

    def test_max_over_first_index_on_ties(self):
        x = Tensor([[2.0, 2.0, 1.0]], requires_grad=True)
        with Tape():
            loss = T.sum(T.max_over(x, axis=1))
        backward(loss)
        assert x.grad.tolist() == [[1.0, 0.0, 0.0]]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31))
def test_matmul_gradient_property(m, k, n, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(m, k)), rng.normal(size=(k, n))
    w = Tensor(rng.normal(size=(m, n)))
    errs = fd_check(lambda x, y: T.sum(T.mul(T.tanh(T.matmul(x, y)), w)), a, b)
    assert max(errs) < 1e-4
