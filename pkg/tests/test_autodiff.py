import threading

import numpy as np
import pytest

from ml_msda.autodiff import (
    Tape,
    Tensor,
    backward,
    clamp,
    clamped_log,
    concat_cols,
    elementwise,
    exp,
    gradcheck,
    gradient_reversal,
    log,
    matmul,
    mean,
    outer_flatten,
    reduce,
    relu,
    sigmoid,
    softmax_rows,
    stop_gradient,
    sum_,
)
from ml_msda.errors import DimensionError, NumericError


def param(rng, *shape):
    return Tensor(rng.standard_normal(shape), requires_grad=True)


def test_matmul_examples():
    identity = Tensor(np.eye(2))
    b = Tensor([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(matmul(identity, b).data, [[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(
        matmul(Tensor([[1.0, 0.0], [0.0, 0.0]]), Tensor([[5.0], [7.0]])).data, [[5.0], [0.0]]
    )


def test_matmul_gradient_of_sum_is_ones_times_b_transpose(rng):
    a, b = param(rng, 3, 4), param(rng, 4, 2)
    with Tape() as tape:
        loss = sum_(matmul(a, b))
    backward(loss, tape)
    np.testing.assert_allclose(a.grad, np.ones((3, 2)) @ b.data.T)
    assert max(gradcheck(lambda: sum_(matmul(a, b)), [a, b])) < 1e-4


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_elementwise_examples():
    np.testing.assert_array_equal(relu(Tensor([-1.0, 0.0, 2.0])).data, [0.0, 0.0, 2.0])
    np.testing.assert_array_equal(log(Tensor([1.0])).data, [0.0])
    np.testing.assert_array_equal(elementwise("neg", Tensor([1.0, -2.0])).data, [-1.0, 2.0])
    np.testing.assert_array_equal(elementwise("add", Tensor([1.0]), Tensor([2.0])).data, [3.0])


def test_relu_gradient_in_dead_region_is_zero():
    x = Tensor([-1.0], requires_grad=True)
    with Tape() as tape:
        loss = sum_(relu(x))
    backward(loss, tape)
    np.testing.assert_array_equal(x.grad, [0.0])


def test_elementwise_rejects_unknown_op_and_shape_mismatch():
    with pytest.raises(ValueError):
        elementwise("pow", Tensor([1.0]))
    with pytest.raises(DimensionError):
        elementwise("add", Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2))))


def test_log_of_non_positive_is_numeric_error():
    with pytest.raises(NumericError):
        log(Tensor([0.0, 1.0]))
    with pytest.raises(NumericError):
        log(Tensor([-1.0]))


def test_clamped_log_handles_zero():
    assert clamped_log(Tensor([0.0])).data[0] == pytest.approx(np.log(1e-7))
    assert clamped_log(Tensor([1.0])).data[0] == 0.0


def test_exp_overflow_is_numeric_error():
    with pytest.raises(NumericError):
        exp(Tensor([1000.0]))


def test_tensor_rejects_non_finite_values():
    with pytest.raises(NumericError):
        Tensor([np.nan])
    t = Tensor([1.0, 2.0])
    with pytest.raises(NumericError):
        t.data = np.array([np.inf, 0.0])
    with pytest.raises(DimensionError):
        t.data = np.zeros(3)


def test_softmax_rows_examples():
    np.testing.assert_allclose(softmax_rows(Tensor([[0.0, 0.0, 0.0]])).data, [[1 / 3, 1 / 3, 1 / 3]])
    out = softmax_rows(Tensor([[1000.0, 0.0]])).data
    np.testing.assert_allclose(out, [[1.0, 0.0]], atol=1e-12)
    assert np.all(np.isfinite(out))


def test_softmax_rows_are_distributions(rng):
    out = softmax_rows(Tensor(5 * rng.standard_normal((20, 7)))).data
    assert np.all(out >= 0)
    np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-9)


def test_sigmoid_is_stable_at_extremes():
    out = sigmoid(Tensor([-800.0, 0.0, 800.0])).data
    np.testing.assert_allclose(out, [0.0, 0.5, 1.0], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_operations_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    a, b = param(rng, 4, 3), param(rng, 3, 2)
    bias = param(rng, 2)
    f, p = param(rng, 4, 3), param(rng, 4, 2)
    positive = Tensor(rng.uniform(0.5, 2.0, size=(4, 3)), requires_grad=True)
    # Kept away from the ReLU kink
    signed = Tensor(rng.choice([-1.0, 1.0], size=(4, 3)) * rng.uniform(0.1, 1.0, size=(4, 3)), requires_grad=True)

    checks = [
        (lambda: sum_(matmul(a, b) + bias), [a, b, bias]),
        (lambda: mean(a * a - a), [a]),
        (lambda: sum_(relu(signed) * signed), [signed]),
        (lambda: sum_(log(positive)), [positive]),
        (lambda: sum_(exp(mul_half(a))), [a]),
        (lambda: sum_(sigmoid(a)), [a]),
        (lambda: sum_(softmax_rows(a) * softmax_rows(a)), [a]),
        (lambda: sum_(outer_flatten(f, p) * outer_flatten(f, p)), [f, p]),
        (lambda: sum_(concat_cols(f, p) * concat_cols(f, p)), [f, p]),
        (lambda: reduce("mean", sum_(a * a, axis=1)), [a]),
        (lambda: sum_(clamp(positive, 0.0, 10.0) * positive), [positive]),
    ]
    for fn, params in checks:
        assert max(gradcheck(fn, params)) < 1e-4


def mul_half(x):
    return x * 0.5


def test_outer_flatten_is_feature_major():
    f = Tensor([[1.0, 2.0]])
    p = Tensor([[10.0, 20.0, 30.0]])
    np.testing.assert_array_equal(outer_flatten(f, p).data, [[10.0, 20.0, 30.0, 20.0, 40.0, 60.0]])


def test_gradient_reversal_is_identity_forward_and_negated_backward():
    x = Tensor([[1.0, -2.0]], requires_grad=True)
    out = gradient_reversal(x, 0.5)
    np.testing.assert_array_equal(out.data, x.data)
    with Tape() as tape:
        loss = sum_(gradient_reversal(x, 0.5) * 3.0)
    backward(loss, tape)
    np.testing.assert_array_equal(x.grad, [[-1.5, -1.5]])


def test_gradient_reversal_rejects_negative_scale():
    with pytest.raises(ValueError):
        gradient_reversal(Tensor([1.0]), -1.0)


def test_stop_gradient_blocks_gradient():
    x = Tensor([2.0, 3.0], requires_grad=True)
    with Tape() as tape:
        loss = sum_(stop_gradient(x) * x)
    backward(loss, tape)
    np.testing.assert_array_equal(x.grad, [2.0, 3.0])


def test_backward_requires_scalar_loss():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        out = x * 2.0
    with pytest.raises(DimensionError):
        backward(out, tape)


def test_gradients_accumulate_across_uses():
    x = Tensor([3.0], requires_grad=True)
    with Tape() as tape:
        loss = sum_(x * x + x)
    backward(loss, tape)
    np.testing.assert_allclose(x.grad, [7.0])


def test_nothing_is_recorded_without_a_tape_or_without_grad():
    x = Tensor([1.0], requires_grad=True)
    y = x * 2.0
    assert not y.requires_grad
    with Tape() as tape:
        Tensor([1.0]) * 2.0
    assert len(tape) == 0


def test_tapes_are_per_thread():
    x = Tensor([1.0], requires_grad=True)
    recorded = {}

    def worker():
        with Tape() as inner:
            x * 2.0
        recorded["inner"] = len(inner)

    with Tape() as outer:
        thread = threading.Thread(target=worker)
        thread.start()
        thread.join()
    assert recorded["inner"] == 1
    assert len(outer) == 0


def test_reduce_axis_validation():
    with pytest.raises(DimensionError):
        sum_(Tensor(np.ones((2, 2))), axis=2)
    with pytest.raises(ValueError):
        reduce("max", Tensor([1.0]))


def test_reduction_examples():
    np.testing.assert_array_equal(mean(Tensor([2.0, 4.0, 6.0])).data, 4.0)
    np.testing.assert_array_equal(sum_(Tensor([[1.0, 2.0], [3.0, 4.0]]), axis=0).data, [4.0, 6.0])
    x = Tensor([1.0, 5.0, -2.0, 0.5], requires_grad=True)
    with Tape() as tape:
        loss = mean(x)
    backward(loss, tape)
    np.testing.assert_allclose(x.grad, [0.25] * 4)


def test_softmax_of_log_weights():
    np.testing.assert_allclose(softmax_rows(Tensor([[np.log(1.0), np.log(3.0)]])).data, [[0.25, 0.75]])


def test_outer_flatten_examples():
    np.testing.assert_array_equal(outer_flatten(Tensor([[1.0, 2.0]]), Tensor([[1.0, 0.0]])).data, [[1.0, 0.0, 2.0, 0.0]])
    np.testing.assert_array_equal(outer_flatten(Tensor([[1.0, 1.0]]), Tensor([[0.5, 0.5]])).data, [[0.5] * 4])


def test_outer_flatten_is_bilinear(rng):
    f = rng.uniform(-2.0, 2.0, size=(5, 3))
    p = softmax_rows(Tensor(rng.standard_normal((5, 4)))).data
    blocks = outer_flatten(Tensor(f), Tensor(p)).data.reshape(5, 3, 4)
    # Row i holds p_ik f_i in class slot k, so weighting the slots by w gives (w . p_i) f_i
    np.testing.assert_allclose(blocks.sum(axis=2), f)
    w = rng.uniform(size=4)
    np.testing.assert_allclose(blocks @ w, f * (p @ w)[:, None])
    uniform = outer_flatten(Tensor(f), Tensor(np.full((5, 4), 0.25))).data.reshape(5, 3, 4)
    for k in range(4):
        np.testing.assert_allclose(uniform[:, :, k], f / 4)


def test_gradient_reversal_examples():
    np.testing.assert_array_equal(gradient_reversal(Tensor([1.0, 2.0]), 5.0).data, [1.0, 2.0])
    for scale, expected in ((1.0, [-1.0, -1.0, -1.0]), (0.0, [0.0, 0.0, 0.0])):
        x = Tensor([0.3, -1.0, 2.0], requires_grad=True)
        with Tape() as tape:
            loss = sum_(gradient_reversal(x, scale))
        backward(loss, tape)
        np.testing.assert_array_equal(x.grad, expected)


def test_stop_gradient_of_sum_is_zero():
    x = Tensor([1.0, -2.0, 3.0], requires_grad=True)
    np.testing.assert_array_equal(stop_gradient(x).data, x.data)
    with Tape() as tape:
        loss = sum_(stop_gradient(x))
    backward(loss, tape)
    np.testing.assert_array_equal(x.grad, [0.0, 0.0, 0.0])


def test_repeated_backward_calls_accumulate():
    x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    with Tape() as tape:
        loss = sum_(x)
    backward(loss, tape)
    np.testing.assert_array_equal(x.grad, [1.0, 1.0, 1.0])
    backward(loss, tape)
    np.testing.assert_array_equal(x.grad, [2.0, 2.0, 2.0])
