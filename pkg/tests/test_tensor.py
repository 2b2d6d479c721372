import numpy as np
import pytest

from src.tensor import (ComputeGraph, DiffArray, add, add_bias, backward, batched_matmul, cross_entropy,
                        embedding, forward_primitive, grad_check, layer_norm, matmul, mul, no_grad, relu,
                        reshape, scale, softmax, sum_all, transpose)
from src.utils.errors import GraphError, ShapeError


def leaf(values):
    return DiffArray(np.asarray(values, dtype=np.float64), requires_grad=True)


def test_matmul_shape():
    out = matmul(DiffArray(np.ones((2, 3))), DiffArray(np.ones((3, 4))))
    assert out.shape == (2, 4)
    assert np.all(out.values == 3.0)


def test_softmax_of_equal_scores_is_uniform():
    out = softmax(DiffArray(np.full(5, 0.7)))
    assert np.allclose(out.values, 0.2)


def test_softmax_mask_zeroes_probability():
    out = softmax(DiffArray(np.zeros((2, 4))), mask=np.array([True, True, False, True]))
    assert np.allclose(out.values[:, 2], 0.0)
    assert np.allclose(out.values.sum(axis=-1), 1.0)


def test_cross_entropy_of_certain_prediction_is_zero():
    logits = DiffArray(np.array([[0.0, 1000.0, 0.0]]))
    assert cross_entropy(logits, np.array([1])).item() == pytest.approx(0.0, abs=1e-12)


def test_cross_entropy_ignores_masked_positions():
    logits = DiffArray(np.random.default_rng(0).normal(size=(1, 3, 5)))
    targets = np.array([[1, 2, 3]])
    full = cross_entropy(DiffArray(logits.values[:, :2]), targets[:, :2]).item()
    masked = cross_entropy(logits, targets, mask=np.array([[True, True, False]])).item()
    assert masked == pytest.approx(full)


def test_backward_of_sum_gives_ones():
    x = leaf([1.0, 2.0, 3.0])
    graph = ComputeGraph()
    with graph:
        loss = sum_all(x)
    graph.backward(loss)
    assert np.array_equal(x.grad, np.ones(3))


def test_backward_of_dot_product_gives_twice_x():
    x = leaf([1.0, 2.0])
    graph = ComputeGraph()
    with graph:
        loss = sum_all(mul(x, x))
    backward(loss)
    assert np.allclose(x.grad, [2.0, 4.0])


def test_gradients_accumulate_over_shared_parents():
    x = leaf([1.0, -2.0])
    graph = ComputeGraph()
    with graph:
        loss = sum_all(add(scale(x, 3.0), x))
    graph.backward(loss)
    assert np.allclose(x.grad, [4.0, 4.0])


def test_backward_of_a_sum_adds_separate_gradients():
    rng = np.random.default_rng(4)
    w = DiffArray(rng.normal(size=(3, 2)))

    def first(x):
        return sum_all(mul(x, x))

    def second(x):
        return sum_all(relu(matmul(x, w)))

    x = leaf(rng.normal(size=(4, 3)))
    with ComputeGraph() as graph:
        loss = add(first(x), second(x))
    graph.backward(loss)
    combined = x.grad.copy()

    x.zero_grad()
    with ComputeGraph() as graph:
        loss = first(x)
    graph.backward(loss)
    with ComputeGraph() as graph:
        loss = second(x)
    graph.backward(loss)
    assert np.allclose(combined, x.grad, rtol=0, atol=1e-12)


def test_backward_restricted_to_inputs():
    x, y = leaf([1.0, 2.0]), leaf([3.0, 4.0])
    graph = ComputeGraph()
    with graph:
        loss = sum_all(mul(x, y))
    graph.backward(loss, inputs=[x])
    assert np.allclose(x.grad, [3.0, 4.0])
    assert y.grad is None


def test_graph_refuses_second_backward():
    x = leaf([1.0])
    graph = ComputeGraph()
    with graph:
        loss = sum_all(x)
    graph.backward(loss)
    with pytest.raises(GraphError):
        graph.backward(loss)


def test_backward_needs_scalar_loss():
    x = leaf([1.0, 2.0])
    graph = ComputeGraph()
    with graph:
        out = scale(x, 2.0)
    with pytest.raises(GraphError):
        graph.backward(out)


def test_nothing_recorded_outside_a_graph_or_under_no_grad():
    x = leaf([1.0, 2.0])
    assert add(x, x).op_record is None
    graph = ComputeGraph()
    with graph:
        with no_grad():
            out = add(x, x)
    assert out.op_record is None
    assert len(graph) == 0


def test_constants_are_not_recorded():
    graph = ComputeGraph()
    with graph:
        out = add(DiffArray([1.0]), DiffArray([2.0]))
    assert out.op_record is None
    assert len(graph) == 0


def test_nodes_of_another_graph_are_constants():
    x = leaf([1.0, 2.0])
    first = ComputeGraph()
    with first:
        doubled = scale(x, 2.0)
    second = ComputeGraph()
    with second:
        loss = sum_all(mul(doubled, x))
    second.backward(loss)
    assert np.allclose(x.grad, doubled.values)


def test_shape_mismatch_raises():
    with pytest.raises(ShapeError):
        add(DiffArray(np.ones(2)), DiffArray(np.ones(3)))
    with pytest.raises(ShapeError):
        matmul(DiffArray(np.ones((2, 3))), DiffArray(np.ones((2, 3))))
    with pytest.raises(ShapeError):
        batched_matmul(DiffArray(np.ones((2, 3, 4))), DiffArray(np.ones((3, 4, 5))))


def test_unknown_primitive_is_rejected():
    with pytest.raises(GraphError):
        forward_primitive("conv2d", [DiffArray(np.ones(2))])


def test_forward_primitive_dispatches_by_name():
    out = forward_primitive("matmul", [DiffArray(np.ones((2, 3))), DiffArray(np.ones((3, 4)))])
    assert out.shape == (2, 4)


def test_grad_check_identity_sum():
    assert grad_check(sum_all, leaf(np.arange(6.0))) < 1e-9


def test_grad_check_rejects_zero_step():
    with pytest.raises(ValueError):
        grad_check(sum_all, leaf([1.0]), h=0.0)


def test_grad_check_restores_point():
    point = leaf(np.arange(4.0))
    before = point.values.copy()
    grad_check(lambda x: sum_all(mul(x, x)), point)
    assert np.array_equal(point.values, before)
    assert point.grad is None


def _weighted(out: DiffArray, seed: int) -> DiffArray:
    weights = DiffArray(np.random.default_rng(seed).normal(size=out.shape))
    return sum_all(mul(out, weights))


@pytest.mark.parametrize("seed", range(100))
def test_primitives_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    rows, t, d = int(rng.integers(1, 4)), int(rng.integers(2, 5)), int(rng.integers(2, 6))

    x = leaf(rng.normal(size=(rows, t, d)))
    w = DiffArray(rng.normal(size=(d, 3)))
    assert grad_check(lambda p: _weighted(matmul(p, w), seed), x) < 1e-6

    w_leaf = leaf(rng.normal(size=(d, 3)))
    assert grad_check(lambda p: _weighted(matmul(x, p), seed), w_leaf) < 1e-6

    bias = leaf(rng.normal(size=d))
    assert grad_check(lambda p: _weighted(add_bias(x, p), seed), bias) < 1e-6

    other = DiffArray(rng.normal(size=(rows, d, t)))
    assert grad_check(lambda p: _weighted(batched_matmul(p, other), seed), x) < 1e-6

    assert grad_check(lambda p: _weighted(transpose(p, (2, 0, 1)), seed), x) < 1e-6
    assert grad_check(lambda p: _weighted(reshape(p, (rows * t, d)), seed), x) < 1e-6

    mask = rng.random((rows, t, d)) < 0.7
    mask[..., 0] = True
    assert grad_check(lambda p: _weighted(softmax(p, mask), seed), x) < 1e-6

    gamma, beta = leaf(rng.normal(size=d)), leaf(rng.normal(size=d))
    assert grad_check(lambda p: _weighted(layer_norm(p, gamma, beta), seed), x) < 1e-6
    assert grad_check(lambda p: _weighted(layer_norm(x, p, beta), seed), gamma) < 1e-6
    assert grad_check(lambda p: _weighted(layer_norm(x, gamma, p), seed), beta) < 1e-6

    away_from_kink = leaf(rng.choice([-1.0, 1.0], size=(rows, t)) * rng.uniform(0.1, 1.0, size=(rows, t)))
    assert grad_check(lambda p: _weighted(relu(p), seed), away_from_kink) < 1e-6

    table = leaf(rng.normal(size=(7, d)))
    ids = rng.integers(0, 7, size=(rows, t))
    assert grad_check(lambda p: _weighted(embedding(p, ids), seed), table) < 1e-6

    logits = leaf(rng.normal(size=(rows, t, 6)))
    targets = rng.integers(0, 6, size=(rows, t))
    target_mask = rng.random((rows, t)) < 0.8
    target_mask[0, 0] = True
    assert grad_check(lambda p: cross_entropy(p, targets, target_mask), logits) < 1e-6
