import numpy as np
import pytest

from survmlp import autodiff as ad


def test_affine_identity():
    out = ad.affine(np.eye(2), np.zeros(2), ad.constant([3.0, 4.0]))
    np.testing.assert_array_equal(out.value, [3.0, 4.0])


def test_affine_hand_arithmetic():
    out = ad.affine(np.array([[1.0, 2.0]]), np.array([1.0]), ad.constant([1.0, 1.0]))
    np.testing.assert_array_equal(out.value, [4.0])


def test_affine_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    W0 = rng.standard_normal((4, 3))
    b0 = rng.standard_normal(4)
    x0 = rng.standard_normal(3)

    def f(arrs):
        return float(ad.affine(ad.constant(arrs[0]), ad.constant(arrs[1]), ad.constant(arrs[2])).value.sum())

    fd = ad.finite_diff_grad(f, [W0, b0, x0], 1e-6)

    W, b, x = ad.parameter(W0), ad.parameter(b0), ad.parameter(x0)
    ad.backward(ad.sum_all(ad.affine(W, b, x)))
    # gradient of sum(W x + b) w.r.t. W is the outer product ones x^T
    np.testing.assert_allclose(W.grad, np.tile(x0, (4, 1)), rtol=1e-12)
    for node, g in zip((W, b, x), fd):
        rel = np.abs(node.grad - g) / (np.maximum(np.abs(node.grad), np.abs(g)) + 1e-4)
        assert rel.max() < 1e-6


def test_affine_shape_mismatch_rejected():
    with pytest.raises(ValueError, match="columns of W"):
        ad.affine(np.eye(2), np.zeros(2), ad.constant([1.0, 2.0, 3.0]))
    with pytest.raises(ValueError, match="bias length"):
        ad.affine(np.eye(2), np.zeros(3), ad.constant([1.0, 2.0]))


def test_sigmoid_analytic():
    x = ad.parameter(np.array(0.0))
    y = ad.sigmoid(x)
    assert y.value == 0.5
    ad.backward(y)
    assert x.grad == 0.25


def test_log_analytic():
    x = ad.parameter(np.array(1.0))
    y = ad.log(x)
    assert y.value == 0.0
    ad.backward(y)
    assert x.grad == 1.0


def test_log_domain_error_names_index():
    with pytest.raises(ValueError, match="flat index 1"):
        ad.log(ad.constant([1.0, -2.0, 3.0]))


def test_composite_log_sigmoid():
    w = ad.parameter(np.array(0.0))
    y = ad.log(ad.sigmoid(w))
    assert np.isclose(y.value, -np.log(2.0), atol=1e-15)
    ad.backward(y)
    assert np.isclose(w.grad, 0.5, atol=1e-15)
    fd = ad.finite_diff_grad(lambda p: float(np.log(1.0 / (1.0 + np.exp(-p[0])))), [np.array(0.0)], 1e-6)
    assert np.isclose(fd[0], 0.5, atol=1e-9)


def test_backward_square():
    w = ad.parameter(np.array(3.0))
    ad.backward(ad.mul(w, w))
    assert w.grad == 6.0


def test_backward_sum_gives_ones():
    w = ad.parameter(np.arange(5.0))
    ad.backward(ad.sum_all(w))
    np.testing.assert_array_equal(w.grad, np.ones(5))


def test_backward_rejects_non_scalar():
    w = ad.parameter(np.arange(4.0))
    with pytest.raises(ValueError, match="scalar"):
        ad.backward(ad.relu(w))


def test_backward_returns_leaf_gradient_map():
    w = ad.parameter(np.array([1.0, 2.0]))
    c = ad.constant(np.array([3.0, 4.0]))
    grads = ad.backward(ad.sum_all(ad.mul(w, c)))
    assert list(grads) == [w]
    np.testing.assert_array_equal(grads[w], [3.0, 4.0])


def test_backward_linear_in_loss():
    rng = np.random.default_rng(5)
    v0 = rng.standard_normal(6)

    def loss_pair(w):
        l1 = ad.sum_all(ad.mul(w, w))
        l2 = ad.sum_all(ad.exp(ad.mul(w, 0.1)))
        return l1, l2

    w = ad.parameter(v0)
    l1, l2 = loss_pair(w)
    ad.backward(ad.add(l1, l2))
    combined = w.grad.copy()

    w = ad.parameter(v0)
    l1, _ = loss_pair(w)
    ad.backward(l1)
    g1 = w.grad.copy()
    w2 = ad.parameter(v0)
    _, l2 = loss_pair(w2)
    ad.backward(l2)
    np.testing.assert_allclose(combined, g1 + w2.grad, rtol=1e-15)


def test_backward_repeatable():
    rng = np.random.default_rng(9)
    w = ad.parameter(rng.standard_normal((3, 3)))
    x = ad.constant(rng.standard_normal(3))
    root = ad.sum_all(ad.relu(ad.affine(w, ad.constant(np.zeros(3)), x)))
    ad.backward(root)
    first = w.grad.copy()
    ad.backward(root)
    np.testing.assert_array_equal(w.grad, first)


def test_non_finite_rejected():
    with pytest.raises(ValueError, match="non-finite"):
        ad.constant(np.array([1.0, np.inf]))


def test_clamp_blocks_gradient_outside_band():
    x = ad.parameter(np.array([-1.0, 0.5, 2.0]))
    ad.backward(ad.sum_all(ad.clamp(x, 0.0, 1.0)))
    np.testing.assert_array_equal(x.grad, [0.0, 1.0, 0.0])


def test_structural_ops_roundtrip_gradients():
    rng = np.random.default_rng(21)
    v0 = rng.standard_normal((2, 5))
    mix = rng.standard_normal((2, 4))

    def build(w):
        a = ad.cumsum_cols(ad.slice_cols(w, 0, 5, 2))
        b = ad.prepend_zero_col(a)
        c = ad.row_sum(ad.mul(b, ad.constant(mix)))
        return ad.mean_all(ad.mul(ad.repeat_rows(ad.reshape(c, (2, 1)), 3), 2.0))

    w = ad.parameter(v0)
    ad.backward(build(w))
    fd = ad.finite_diff_grad(lambda p: float(build(ad.constant(p[0])).value), [v0], 1e-6)
    rel = np.abs(w.grad - fd[0]) / (np.maximum(np.abs(w.grad), np.abs(fd[0])) + 1e-4)
    assert rel.max() < 1e-6


def test_finite_diff_quadratic_exact():
    fd = ad.finite_diff_grad(lambda p: float(p[0] ** 2), [np.array(3.0)], 1e-4)
    assert abs(fd[0] - 6.0) < 1e-7


def test_finite_diff_sine():
    fd = ad.finite_diff_grad(lambda p: float(np.sin(p[0])), [np.array(0.0)], 1e-6)
    assert abs(fd[0] - 1.0) < 1e-9


def test_finite_diff_constant_is_zero():
    fd = ad.finite_diff_grad(lambda p: 7.5, [np.arange(4.0)], 1e-6)
    np.testing.assert_array_equal(fd[0], np.zeros(4))


def test_finite_diff_rejects_bad_step():
    with pytest.raises(ValueError, match="positive"):
        ad.finite_diff_grad(lambda p: 0.0, [np.zeros(2)], 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_random_mlp_gradients_match_fd(seed):
    rng = np.random.default_rng(seed)
    W1_0, b1_0 = rng.standard_normal((4, 3)), rng.standard_normal(4)
    W2_0, b2_0 = rng.standard_normal((1, 4)), rng.standard_normal(1)
    x = rng.standard_normal(3)

    def forward(arrs, as_params):
        mk = ad.parameter if as_params else ad.constant
        W1, b1, W2, b2 = (mk(a) for a in arrs)
        h = ad.relu(ad.affine(W1, b1, ad.constant(x)))
        out = ad.log(ad.sigmoid(ad.affine(W2, b2, h)))
        return ad.sum_all(out), [W1, b1, W2, b2]

    arrays = [W1_0, b1_0, W2_0, b2_0]
    root, nodes = forward(arrays, as_params=True)
    ad.backward(root)
    fd = ad.finite_diff_grad(lambda p: float(forward(p, as_params=False)[0].value), arrays, 1e-6)
    for node, g in zip(nodes, fd):
        rel = np.abs(node.grad - g) / (np.maximum(np.abs(node.grad), np.abs(g)) + 1e-4)
        assert rel.max() < 1e-4
