import numpy as np
import pytest

from rnnlab.gradcheck import finite_diff
from rnnlab.heads import dense_backward, dense_forward, init_dense, softmax_xent

# -log softmax([1, 2, 3])[2], mpmath 30-digit evaluation
XENT_123_LABEL2 = 0.4076059644443803


class TestDenseForward:
    def test_zero_params_zero_logits(self):
        head = {"W_out": np.zeros((4, 3)), "b_out": np.zeros(4)}
        np.testing.assert_array_equal(dense_forward(head, np.ones(3)), np.zeros(4))

    def test_identity_passthrough(self):
        head = {"W_out": np.eye(3), "b_out": np.zeros(3)}
        h = np.array([0.3, -1.0, 2.0])
        np.testing.assert_array_equal(dense_forward(head, h), h)

    def test_hand_arithmetic(self):
        head = {"W_out": np.array([[1.0, 0.0], [0.0, 2.0]]), "b_out": np.array([1.0, 1.0])}
        np.testing.assert_array_equal(dense_forward(head, np.array([3.0, 4.0])), [4.0, 9.0])

    def test_shape_mismatch(self):
        head = init_dense(3, 4, np.random.default_rng(0))
        with pytest.raises(ValueError, match="expected 4"):
            dense_forward(head, np.zeros(5))

    def test_needs_two_classes(self):
        with pytest.raises(ValueError, match="at least 2"):
            init_dense(1, 4, np.random.default_rng(0))


class TestSoftmaxXent:
    def test_uniform_logits_loss_is_log_k(self):
        for k in (2, 5, 10):
            loss, d = softmax_xent(np.zeros(k), 0)
            assert loss == pytest.approx(np.log(k), abs=1e-12)
            expected = np.full(k, 1.0 / k)
            expected[0] -= 1.0
            np.testing.assert_allclose(d, expected, atol=1e-12)

    def test_confident_correct_limit(self):
        loss, _ = softmax_xent(np.array([1e3, 0.0]), 0)
        assert loss == pytest.approx(0.0, abs=1e-12)

    def test_frozen_value(self):
        loss, _ = softmax_xent(np.array([1.0, 2.0, 3.0]), 2)
        assert loss == pytest.approx(XENT_123_LABEL2, abs=1e-12)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            softmax_xent(np.zeros(3), 3)

    def test_shift_invariance(self):
        rng = np.random.default_rng(0)
        logits = rng.normal(size=6)
        loss_a, d_a = softmax_xent(logits, 2)
        loss_b, d_b = softmax_xent(logits + 123.456, 2)
        assert loss_a == pytest.approx(loss_b, abs=1e-12)
        np.testing.assert_allclose(d_a, d_b, atol=1e-12)

    def test_gradient_sums_to_zero(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            _, d = softmax_xent(rng.normal(size=7), int(rng.integers(7)))
            assert abs(d.sum()) < 1e-12

    def test_loss_nonnegative(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            loss, _ = softmax_xent(rng.normal(scale=4.0, size=5), int(rng.integers(5)))
            assert loss >= 0.0

    def test_d_logits_matches_finite_differences(self):
        logits = np.array([0.2, -1.0, 0.7, 0.1])
        _, d = softmax_xent(logits, 1)
        fd = finite_diff(
            lambda arrs: softmax_xent(arrs["logits"], 1)[0], {"logits": logits}, epsilon=1e-6
        )
        np.testing.assert_allclose(d, fd["logits"], atol=1e-7)

    def test_batched_mean_reduction(self):
        logits = np.array([[1.0, 2.0, 3.0], [3.0, 2.0, 1.0]])
        labels = np.array([2, 0])
        loss, d = softmax_xent(logits, labels)
        solo_losses = [softmax_xent(logits[i], labels[i])[0] for i in range(2)]
        assert loss == pytest.approx(np.mean(solo_losses), abs=1e-12)
        for i in range(2):
            _, solo_d = softmax_xent(logits[i], labels[i])
            np.testing.assert_allclose(d[i], solo_d / 2.0, atol=1e-12)


class TestDenseBackward:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        head = init_dense(3, 4, rng)
        h = rng.normal(size=4)

        def loss(arrays):
            logits = dense_forward({"W_out": arrays["W_out"], "b_out": arrays["b_out"]}, h)
            return softmax_xent(logits, 1)[0]

        logits = dense_forward(head, h)
        _, d_logits = softmax_xent(logits, 1)
        grads, d_h = dense_backward(head, h, d_logits)
        fd = finite_diff(loss, head, epsilon=1e-6)
        np.testing.assert_allclose(grads["W_out"], fd["W_out"], atol=1e-7)
        np.testing.assert_allclose(grads["b_out"], fd["b_out"], atol=1e-7)

        fd_h = finite_diff(
            lambda arrs: softmax_xent(dense_forward(head, arrs["h"]), 1)[0],
            {"h": h},
            epsilon=1e-6,
        )
        np.testing.assert_allclose(d_h, fd_h["h"], atol=1e-7)

    def test_batched_grads_sum_over_batch(self):
        rng = np.random.default_rng(4)
        head = init_dense(3, 4, rng)
        h = rng.normal(size=(5, 4))
        d_logits = rng.normal(size=(5, 3))
        grads, d_h = dense_backward(head, h, d_logits)
        expected_W = sum(np.outer(d_logits[i], h[i]) for i in range(5))
        np.testing.assert_allclose(grads["W_out"], expected_W, atol=1e-12)
        np.testing.assert_allclose(grads["b_out"], d_logits.sum(axis=0), atol=1e-12)
        assert d_h.shape == (5, 4)
