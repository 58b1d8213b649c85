import numpy as np
import pytest

from oedkit.exceptions import NotDifferentiable
from oedkit.linalg import finite_difference_gradient
from oedkit.oed import DesignVector, Penalty, penalty_gradient, penalty_value


class TestValues:
    def test_l0_counts_nonzeros(self):
        assert penalty_value(Penalty("l0"), DesignVector([1.0, 0.0, 1.0, 0.0])) == 2.0

    def test_l0_counts_fractional_weights_too(self):
        assert penalty_value(Penalty("l0"), DesignVector([0.3, 0.0, 1.0])) == 2.0

    def test_l1_sums_weights(self):
        assert penalty_value(Penalty("l1"), DesignVector([0.25, 0.5, 1.0])) == 1.75

    def test_smoothed_l0_approaches_l0_on_binary(self):
        design = DesignVector([1.0, 0.0, 1.0, 1.0])
        previous_gap = np.inf
        for eps in (1e-2, 1e-4, 1e-6, 1e-8):
            value = penalty_value(Penalty("smoothed-l0", epsilon=eps), design)
            gap = abs(value - 3.0)
            assert gap < previous_gap
            previous_gap = gap
        assert previous_gap <= 1e-7

    def test_budget_equality(self):
        p = Penalty("budget-equality", budget=2)
        assert penalty_value(p, DesignVector([1.0, 1.0, 0.0])) == 0.0
        assert penalty_value(p, DesignVector([1.0, 1.0, 1.0])) == 1.0

    def test_budget_larger_than_design_rejected(self):
        p = Penalty("budget-equality", budget=5)
        with pytest.raises(ValueError):
            penalty_value(p, DesignVector([1.0, 0.0]))


class TestGradients:
    def test_l0_has_no_gradient(self):
        with pytest.raises(NotDifferentiable):
            penalty_gradient(Penalty("l0"), DesignVector([1.0, 0.0]))

    def test_l1_gradient_is_ones(self):
        grad = penalty_gradient(Penalty("l1"), DesignVector([0.2, 0.9, 0.5]))
        np.testing.assert_array_equal(grad, np.ones(3))

    @pytest.mark.parametrize("kind,kwargs", [
        ("l1", {}),
        ("smoothed-l0", {"epsilon": 1e-2}),
        ("budget-equality", {"budget": 2}),
    ])
    def test_matches_finite_differences(self, kind, kwargs):
        p = Penalty(kind, **kwargs)
        rng = np.random.default_rng(1)
        for _ in range(5):
            w = rng.uniform(0.1, 0.9, size=4)
            grad = penalty_gradient(p, DesignVector(w))
            fd = finite_difference_gradient(lambda v: penalty_value(p, DesignVector(v)), w, 1e-6)
            np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-8)


class TestValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Penalty("l2")

    def test_negative_alpha(self):
        with pytest.raises(ValueError):
            Penalty("l1", alpha=-1.0)

    def test_budget_required(self):
        with pytest.raises(ValueError):
            Penalty("budget-equality")

    def test_smoothing_must_be_positive(self):
        with pytest.raises(ValueError):
            Penalty("smoothed-l0", epsilon=0.0)

    def test_differentiable_flag(self):
        assert not Penalty("l0").differentiable
        assert Penalty("smoothed-l0").differentiable
