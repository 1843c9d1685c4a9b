import numpy as np
import pytest

from rnnlab.gradcheck import check_cell, finite_diff


class TestFiniteDiff:
    def test_constant_loss_zero_gradient(self):
        params = {"w": np.random.default_rng(0).normal(size=(3, 2))}
        grads = finite_diff(lambda arrs: 7.25, params, epsilon=1e-5)
        np.testing.assert_allclose(grads["w"], np.zeros((3, 2)), atol=1e-12)

    def test_quadratic_exactness(self):
        # central differences are exact on quadratics up to roundoff
        params = {"theta": np.array([1.0, 2.0])}
        grads = finite_diff(
            lambda arrs: float(arrs["theta"] @ arrs["theta"]), params, epsilon=1e-5
        )
        np.testing.assert_allclose(grads["theta"], [2.0, 4.0], atol=1e-9)

    def test_requires_positive_epsilon(self):
        with pytest.raises(ValueError, match="epsilon"):
            finite_diff(lambda arrs: 0.0, {"w": np.zeros(1)}, epsilon=0.0)

    def test_nonfinite_loss_raises(self):
        params = {"w": np.zeros(2)}

        def bad_loss(arrs):
            return float("nan")

        with pytest.raises(FloatingPointError, match="non-finite loss"):
            finite_diff(bad_loss, params, epsilon=1e-5)

    def test_does_not_mutate_params(self):
        params = {"w": np.array([1.0, 2.0])}
        finite_diff(lambda arrs: float(arrs["w"].sum() ** 2), params, epsilon=1e-5)
        np.testing.assert_array_equal(params["w"], [1.0, 2.0])


class TestCheckCell:
    def test_smallest_case_passes(self):
        report = check_cell("rnn", n=1, m=1, T=1, seeds=[0])
        assert report.passed

    def test_rejects_degenerate_dims(self):
        with pytest.raises(ValueError):
            check_cell("rnn", n=0, m=1, T=1, seeds=[0])

    def test_unknown_architecture(self):
        with pytest.raises(ValueError, match="unknown architecture"):
            check_cell("transformer", n=2, m=2, T=2, seeds=[0])

    def test_report_names_slots(self):
        report = check_cell("litelstm", n=2, m=2, T=3, seeds=[1, 2])
        text = report.format()
        for slot in ("W_fx", "U_fh", "W_fc", "b_f", "W_gx", "U_gh", "b_g"):
            assert slot in text
        assert "PASS" in text

    def test_detects_a_wrong_gradient(self):
        # sanity: the checker is not vacuously green. Corrupt the analytic
        # side by checking a cell against finite differences of a *different*
        # loss scale.
        report = check_cell("rnn", n=2, m=2, T=2, seeds=[3])
        assert report.passed
        from rnnlab.cells import CellParams, forward_sequence, get_cell

        cell = get_cell("rnn")
        rng = np.random.default_rng(0)
        arrays = {
            "W_hx": rng.normal(size=(2, 2)),
            "U_hh": rng.normal(size=(2, 2)),
            "b_h": rng.normal(size=2),
        }
        xs = rng.normal(size=(2, 2))

        def loss(arrs):
            p = CellParams(arch="rnn", n=2, m=2, gate_fn="logistic", arrays=arrs)
            states, _ = forward_sequence(cell, p, xs)
            return 2.0 * sum(float(s.h.sum()) for s in states)

        fd = finite_diff(loss, arrays, epsilon=1e-5)
        p = CellParams(arch="rnn", n=2, m=2, gate_fn="logistic", arrays=arrays)
        from rnnlab.cells import backward_sequence

        states, caches = forward_sequence(cell, p, xs)
        analytic = backward_sequence(cell, p, caches, [np.ones(2)] * 2).by_name
        # the doubled loss must NOT match the singly-scaled analytic grads
        assert not np.allclose(analytic["W_hx"], fd["W_hx"], rtol=1e-4, atol=1e-7)
