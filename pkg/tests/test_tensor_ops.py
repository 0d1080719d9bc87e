import math

import numpy as np
import pytest

from src.core.classes import ops
from src.core.classes.tensor import Tape, Tensor
from src.core.errors import NumericError, ShapeError, TapeError, TargetIndexError

H = 1e-5


def numeric_grad(loss, array):
    """Central differences of ``loss()`` with respect to ``array`` (perturbed in place)."""
    grad = np.zeros_like(array)
    for idx in np.ndindex(array.shape):
        original = array[idx]
        array[idx] = original + H
        plus = loss().item()
        array[idx] = original - H
        minus = loss().item()
        array[idx] = original
        grad[idx] = (plus - minus) / (2 * H)
    return grad


def analytic_grads(loss, leaves):
    with Tape() as tape:
        out = loss()
    grads = tape.backward(out)
    return [grads[leaf] for leaf in leaves]


def weighted(out: Tensor, seed: int = 7) -> Tensor:
    """sum(out * w) with a fixed random w, so every output element matters."""
    w = Tensor(np.random.default_rng(seed).standard_normal(out.shape))
    return ops.sum_all(ops.mul(out, w))


def leaf(shape, seed):
    return Tensor(np.random.default_rng(seed).standard_normal(shape), requires_grad=True)


def check(loss, leaves, rtol=1e-5):
    for tensor, grad in zip(leaves, analytic_grads(loss, leaves)):
        np.testing.assert_allclose(grad, numeric_grad(loss, tensor.data), rtol=rtol, atol=1e-8)


# --- forward examples ---------------------------------------------------------------

def test_matmul_identity_and_annihilator():
    b = Tensor([[3.0, 4.0], [5.0, 6.0]])
    np.testing.assert_array_equal(ops.matmul(Tensor(np.eye(2)), b).data, b.data)
    np.testing.assert_array_equal(ops.matmul(Tensor([[1.0, 2.0]]), Tensor([[0.0], [0.0]])).data, [[0.0]])


@pytest.mark.parametrize("a_shape, b_shape", [((2, 3), (2, 3)), ((3,), (3, 2)), ((2, 2, 3), (2, 4, 1))])
def test_matmul_shape_errors(a_shape, b_shape):
    with pytest.raises(ShapeError):
        ops.matmul(Tensor(np.ones(a_shape)), Tensor(np.ones(b_shape)))


def test_softmax_examples():
    np.testing.assert_allclose(ops.softmax(Tensor([0.0, 0.0])).data, [0.5, 0.5])
    big = ops.softmax(Tensor([1000.0, 0.0])).data
    assert np.all(np.isfinite(big))
    assert big[0] == pytest.approx(1.0) and big[1] == pytest.approx(0.0, abs=1e-12)
    x = np.array([1.0, 2.0, 3.0])
    reference = np.exp(x) / np.exp(x).sum()
    np.testing.assert_allclose(ops.softmax(Tensor(x)).data, reference, rtol=0, atol=1e-9)


def test_softmax_rows_sum_to_one_for_large_magnitudes():
    x = np.random.default_rng(0).uniform(-1e3, 1e3, size=(20, 7))
    np.testing.assert_allclose(ops.softmax(Tensor(x)).data.sum(axis=-1), 1.0, atol=1e-6)


def test_softmax_empty_axis():
    with pytest.raises(ShapeError):
        ops.softmax(Tensor(np.zeros((2, 0))))


def test_layer_norm_examples():
    ones, zeros = Tensor(np.ones(4)), Tensor(np.zeros(4))
    constant = ops.layer_norm(Tensor(np.full((2, 4), 3.5)), ones, zeros, eps=1e-12)
    np.testing.assert_array_equal(constant.data, np.zeros((2, 4)))

    beta = Tensor([0.5, -1.0, 2.0, 0.0])
    out = ops.layer_norm(Tensor(np.random.default_rng(0).standard_normal((3, 4))), zeros, beta)
    np.testing.assert_allclose(out.data, np.broadcast_to(beta.data, (3, 4)))


def test_gelu_examples():
    assert ops.gelu(Tensor([0.0])).item() == 0.0
    assert ops.gelu(Tensor([10.0])).item() == pytest.approx(10.0, abs=1e-6)
    expected = 0.5 * (1.0 + math.tanh(math.sqrt(2.0 / math.pi) * (1.0 + 0.044715)))
    assert ops.gelu(Tensor([1.0])).item() == pytest.approx(expected, abs=1e-9)


def test_cross_entropy_examples():
    assert ops.cross_entropy(Tensor(np.zeros((2, 5))), [1, 3]).item() == pytest.approx(math.log(5))
    peaked = np.zeros((1, 3))
    peaked[0, 2] = 100.0
    assert ops.cross_entropy(Tensor(peaked), [2]).item() == pytest.approx(0.0, abs=1e-12)

    logits = np.random.default_rng(3).standard_normal((4, 3))
    targets = [0, 2, 1, 2]
    reference = -np.mean([logits[i, t] - np.log(np.exp(logits[i]).sum()) for i, t in enumerate(targets)])
    assert ops.cross_entropy(Tensor(logits), targets).item() == pytest.approx(reference, abs=1e-9)


@pytest.mark.parametrize("targets", [[0, 3], [-1, 0]])
def test_cross_entropy_target_out_of_range(targets):
    with pytest.raises(TargetIndexError):
        ops.cross_entropy(Tensor(np.zeros((2, 3))), targets)
    with pytest.raises(IndexError):
        ops.cross_entropy(Tensor(np.zeros((2, 3))), targets)


def test_non_finite_forward_is_an_error():
    with pytest.raises(NumericError):
        ops.scale(Tensor([1.0]), float("inf"))


# --- gradients against central differences ---------------------------------------------

def test_matmul_gradient():
    a, b = leaf((3, 4), 0), leaf((4, 2), 1)
    check(lambda: ops.sum_all(ops.matmul(a, b)), [a, b])
    check(lambda: weighted(ops.matmul(a, b)), [a, b])


def test_batched_matmul_gradient():
    a, b = leaf((2, 3, 3, 4), 0), leaf((2, 3, 4, 2), 1)
    check(lambda: weighted(ops.matmul(a, b)), [a, b])


def test_broadcast_add_gradient():
    x, bias = leaf((3, 4), 0), leaf((4,), 1)
    check(lambda: weighted(ops.add(x, bias)), [x, bias])


def test_elementwise_gradients():
    a, b = leaf((2, 3), 0), leaf((2, 3), 1)
    check(lambda: weighted(ops.mul(ops.sub(a, b), a)), [a, b])


def test_softmax_gradient():
    x = leaf((3, 5), 2)
    check(lambda: weighted(ops.softmax(x)), [x])


def test_layer_norm_gradient():
    x, gamma, beta = leaf((3, 6), 0), leaf((6,), 1), leaf((6,), 2)
    check(lambda: weighted(ops.layer_norm(x, gamma, beta, eps=1e-5)), [x, gamma, beta], rtol=1e-4)


def test_gelu_gradient():
    x = leaf((4, 3), 4)
    check(lambda: weighted(ops.gelu(x)), [x])


def test_cross_entropy_gradient():
    logits = leaf((4, 3), 5)
    check(lambda: ops.cross_entropy(logits, [0, 2, 1, 2]), [logits])


def test_embedding_gradient_accumulates_repeated_ids():
    table = leaf((5, 3), 6)
    ids = np.array([[1, 1, 4], [0, 1, 2]])
    check(lambda: weighted(ops.embedding(table, ids)), [table])


def test_reshape_transpose_select_gradient():
    x = leaf((2, 3, 4), 7)
    check(lambda: weighted(ops.select(ops.transpose(ops.reshape(x, (2, 4, 3)), (0, 2, 1)), 0, axis=1)), [x])


def test_dropout_gradient_uses_the_same_mask():
    x = leaf((4, 5), 8)

    def loss():
        return weighted(ops.dropout(x, 0.5, np.random.default_rng(0), training=True))

    check(loss, [x])


def test_dropout_is_identity_in_eval_mode():
    x = leaf((4, 5), 8)
    assert ops.dropout(x, 0.5, None, training=False) is x


# --- tape ---------------------------------------------------------------------------------

def test_fan_out_accumulates():
    x = Tensor([3.0], requires_grad=True)
    with Tape() as tape:
        y = ops.add(x, x)
    np.testing.assert_array_equal(tape.backward(y)[x], [2.0])


def test_constant_leaf_gets_no_gradient():
    x = Tensor([1.0, 2.0], requires_grad=True)
    c = Tensor([5.0, 6.0])
    with Tape() as tape:
        loss = ops.sum_all(ops.mul(x, c))
    grads = tape.backward(loss)
    assert c not in grads
    np.testing.assert_array_equal(grads[x], c.data)


def test_backward_usage_errors():
    x = Tensor([1.0, 2.0], requires_grad=True)
    outside = ops.sum_all(ops.mul(x, x))
    with Tape() as tape:
        vector = ops.mul(x, x)
        loss = ops.sum_all(vector)
    with pytest.raises(TapeError):
        tape.backward(outside)
    with pytest.raises(TapeError):
        tape.backward(vector)
    tape.backward(loss)
    with pytest.raises(TapeError):
        tape.backward(loss)


def test_backward_is_linear():
    x = leaf((3,), 9)

    def f():
        return ops.sum_all(ops.gelu(x))

    def g():
        return ops.sum_all(ops.mul(x, x))

    (df,) = analytic_grads(f, [x])
    (dg,) = analytic_grads(g, [x])
    (combined,) = analytic_grads(lambda: ops.add(ops.scale(f(), 2.0), ops.scale(g(), -3.0)), [x])
    np.testing.assert_allclose(combined, 2.0 * df - 3.0 * dg, rtol=1e-12)


def test_gradients_are_deterministic():
    a, b = leaf((3, 4), 0), leaf((4, 2), 1)
    first = analytic_grads(lambda: weighted(ops.softmax(ops.matmul(a, b))), [a, b])
    second = analytic_grads(lambda: weighted(ops.softmax(ops.matmul(a, b))), [a, b])
    for x, y in zip(first, second):
        np.testing.assert_array_equal(x, y)


def test_ops_outside_a_tape_record_nothing():
    x = Tensor([1.0], requires_grad=True)
    with Tape() as tape:
        pass
    ops.add(x, x)
    assert len(tape) == 0
