import numpy as np
import pytest

from oedkit.exceptions import NonBinaryDesign
from oedkit.models import GaussianMeasure
from oedkit.oed import (
    DesignVector,
    WeightedNoiseModel,
    weighted_precision_binary,
    weighted_precision_relaxed,
)


def random_spd(n, rng, shift=0.5):
    a = rng.standard_normal((n, n))
    return a @ a.T + shift * np.eye(n)


def random_binary(n, rng):
    while True:
        z = (rng.random(n) < 0.5).astype(float)
        if z.any():
            return z


class TestBinaryPath:
    def test_all_ones_is_plain_precision(self):
        r = random_spd(5, np.random.default_rng(0))
        out = weighted_precision_binary(r, DesignVector.ones(5))
        np.testing.assert_allclose(out @ r, np.eye(5), atol=1e-11)

    def test_all_zeros_is_zero_matrix(self):
        r = random_spd(4, np.random.default_rng(1))
        out = weighted_precision_binary(r, DesignVector.zeros(4))
        np.testing.assert_array_equal(out, np.zeros((4, 4)))

    def test_matches_svd_pseudo_inverse(self):
        rng = np.random.default_rng(2)
        r = random_spd(6, rng)
        z = random_binary(6, rng)
        d = np.diag(z)
        expected = np.linalg.pinv(d @ r @ d)
        out = weighted_precision_binary(r, DesignVector(z))
        np.testing.assert_allclose(out, expected, atol=1e-10)

    def test_rejects_relaxed_design(self):
        with pytest.raises(NonBinaryDesign):
            weighted_precision_binary(np.eye(3), DesignVector([1.0, 0.5, 0.0]))


class TestRelaxedPath:
    def test_all_ones_is_plain_precision(self):
        r = random_spd(5, np.random.default_rng(3))
        out = weighted_precision_relaxed(r, DesignVector.ones(5))
        np.testing.assert_allclose(out @ r, np.eye(5), atol=1e-11)

    def test_binary_designs_match_pseudo_inverse_path(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            r = random_spd(n, rng)
            z = random_binary(n, rng)
            binary = weighted_precision_binary(r, DesignVector(z))
            relaxed = weighted_precision_relaxed(r, DesignVector(z))
            assert np.linalg.norm(binary - relaxed) <= 1e-10

    def test_perturbation_converges_monotonically(self):
        rng = np.random.default_rng(5)
        r = random_spd(6, rng)
        z = random_binary(6, rng)
        reference = weighted_precision_relaxed(r, DesignVector(z))
        previous = np.inf
        for k in range(2, 7):
            delta = 10.0**-k
            perturbed = np.where(z == 1.0, 1.0 - delta, delta)
            w = weighted_precision_relaxed(r, DesignVector(perturbed))
            distance = np.linalg.norm(w - reference)
            assert distance < previous
            previous = distance
        assert previous <= 1e-3 * np.linalg.norm(reference)

    def test_zero_weight_rows_exactly_zero(self):
        r = random_spd(4, np.random.default_rng(6))
        out = weighted_precision_relaxed(r, DesignVector([0.7, 0.0, 0.3, 0.0]))
        assert np.all(out[1, :] == 0.0) and np.all(out[:, 3] == 0.0)

    def test_output_symmetric(self):
        r = random_spd(5, np.random.default_rng(7))
        out = weighted_precision_relaxed(r, DesignVector([0.2, 0.9, 0.0, 0.5, 1.0]))
        np.testing.assert_array_equal(out, out.T)


class TestWeightedNoiseModel:
    def test_defaults_to_all_active(self):
        base = GaussianMeasure(np.zeros(3), np.diag([2.0, 4.0, 8.0]))
        model = WeightedNoiseModel(base)
        np.testing.assert_allclose(model.precision(), np.diag([0.5, 0.25, 0.125]), atol=1e-14)

    def test_set_design_invalidates_cache(self):
        base = GaussianMeasure(np.zeros(2), np.eye(2))
        model = WeightedNoiseModel(base)
        first = model.precision()
        model.set_design(DesignVector([1.0, 0.0]))
        second = model.precision()
        assert first[1, 1] == 1.0 and second[1, 1] == 0.0

    def test_with_design_leaves_original(self):
        base = GaussianMeasure(np.zeros(2), np.eye(2))
        model = WeightedNoiseModel(base)
        other = model.with_design(DesignVector([0.0, 1.0]))
        assert model.design.is_binary and model.precision()[0, 0] == 1.0
        assert other.precision()[0, 0] == 0.0

    def test_design_length_checked(self):
        base = GaussianMeasure(np.zeros(3), np.eye(3))
        with pytest.raises(ValueError):
            WeightedNoiseModel(base, DesignVector([1.0, 1.0]))

    def test_unknown_mode_rejected(self):
        base = GaussianMeasure(np.zeros(2), np.eye(2))
        with pytest.raises(ValueError):
            WeightedNoiseModel(base, mode="schur")

    def test_hadamard_mode_accepts_relaxed_designs(self):
        base = GaussianMeasure(np.zeros(2), np.eye(2))
        model = WeightedNoiseModel(base, DesignVector([0.5, 1.0]), mode="hadamard-relaxed")
        w = model.precision()
        np.testing.assert_allclose(np.diag(w), [0.25, 1.0], atol=1e-14)
